//! Bagged multi-output regression forest.
//!
//! Tree `t` is trained from the child seed `seed.child("tree", t)`, so fitted
//! trees do not depend on thread scheduling and growing `n_trees` leaves the
//! earlier trees untouched.

mod tree;

use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

pub use tree::{Node, RegressionTree};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features_fraction: f64,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features_fraction: 1.0,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    /// 450 trees of depth at most 10, the configuration used for the
    /// experimental RF-PCA forward models.
    pub fn experimental() -> Self {
        ForestParams {
            n_trees: 450,
            max_depth: Some(10),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("forest {what}")));
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be positive");
        }
        if self.min_samples_split < 2 {
            return bad("min_samples_split must be at least 2");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be positive");
        }
        if !(self.max_features_fraction > 0.0 && self.max_features_fraction <= 1.0) {
            return bad("max_features_fraction must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<RegressionTree>,
    input_dim: usize,
    output_dim: usize,
    params: ForestParams,
    y_min: Vec<f64>,
    y_max: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: T,
}

impl ForestModel {
    /// Fits `params.n_trees` trees on rows of `x` (n x M) against `y` (n x K).
    pub fn fit(x: ArrayView2<f64>, y: ArrayView2<f64>, params: &ForestParams, seed: RngSeed) -> Result<Self> {
        params.validate()?;
        let n = x.nrows();
        if n == 0 {
            return Err(Error::EmptyInput("forest training set"));
        }
        if y.nrows() != n {
            return Err(Error::dim("forest targets", n, y.nrows()));
        }
        let (m, k) = (x.ncols(), y.ncols());
        if m == 0 || k == 0 {
            return Err(Error::EmptyInput("forest feature or output columns"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("forest training data is not finite".into()));
        }

        let y_rows: Vec<f64> = y.iter().copied().collect();
        let means = y.mean_axis(Axis(0)).expect("n > 0");
        let centered: Vec<f64> = y_rows
            .iter()
            .enumerate()
            .map(|(i, v)| v - means[i % k])
            .collect();
        let y_min: Vec<f64> = y.columns().into_iter().map(|c| c.fold(f64::INFINITY, |a, &b| a.min(b))).collect();
        let y_max: Vec<f64> = y.columns().into_iter().map(|c| c.fold(f64::NEG_INFINITY, |a, &b| a.max(b))).collect();
        let data = tree::TrainingSet {
            x,
            y: &y_rows,
            centered: &centered,
            k,
            y_min: &y_min,
            y_max: &y_max,
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| tree::fit_tree(&data, params, seed.child("tree", t as u64).rng()))
            .collect();
        Ok(ForestModel {
            trees,
            input_dim: m,
            output_dim: k,
            params: params.clone(),
            y_min,
            y_max,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Mean of the trees' leaf values at `x`, written into `out`.
    pub fn predict_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.input_dim);
        out.fill(0.0);
        for t in &self.trees {
            for (o, v) in out.iter_mut().zip(t.leaf(x)) {
                *o += v;
            }
        }
        let inv = 1.0 / self.trees.len() as f64;
        for (j, o) in out.iter_mut().enumerate() {
            // The mean of in-range values is in range; the clamp absorbs rounding.
            *o = (*o * inv).clamp(self.y_min[j], self.y_max[j]);
        }
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::dim("forest input", self.input_dim, x.len()));
        }
        let mut out = vec![0.0; self.output_dim];
        self.predict_into(x, &mut out);
        Ok(out)
    }

    /// Row-wise predictions, `n x K`.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim {
            return Err(Error::dim("forest input", self.input_dim, x.ncols()));
        }
        let mut out = Array2::zeros((x.nrows(), self.output_dim));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(x.axis_iter(Axis(0)).into_par_iter())
            .for_each(|(mut o, row)| {
                let row = row.to_vec();
                self.predict_into(&row, o.as_slice_mut().expect("standard layout"));
            });
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Versioned {
            format: "alps-forest".into(),
            version: FORMAT_VERSION,
            body: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Versioned<ForestModel> = serde_json::from_str(text)?;
        if v.version != FORMAT_VERSION {
            return Err(Error::Version {
                kind: "forest",
                expected: FORMAT_VERSION,
                found: v.version,
            });
        }
        v.body.check()?;
        Ok(v.body)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let ok = !self.trees.is_empty()
            && self.y_min.len() == self.output_dim
            && self.y_max.len() == self.output_dim
            && self
                .trees
                .iter()
                .all(|t| t.output_dim() == self.output_dim && t.is_well_formed(self.input_dim));
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("forest model is structurally invalid".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;

    fn single_tree() -> ForestParams {
        ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_match_library_regression_defaults() {
        let p = ForestParams::default();
        assert_eq!(p.n_trees, 100);
        assert_eq!(p.max_depth, None);
        assert_eq!((p.min_samples_split, p.min_samples_leaf), (2, 1));
        assert_eq!(p.max_features_fraction, 1.0);
        assert!(p.bootstrap);
        let e = ForestParams::experimental();
        assert_eq!((e.n_trees, e.max_depth), (450, Some(10)));
    }

    #[test]
    fn constant_targets_predict_constant() {
        let x = array![[0.0, 1.0], [2.0, 3.0], [4.0, -1.0], [1.0, 1.0]];
        let y = Array2::from_elem((4, 3), 0.1);
        let f = ForestModel::fit(x.view(), y.view(), &ForestParams::default(), RngSeed(1)).unwrap();
        let p = f.predict(array![[10.0, 10.0], [-3.0, 0.5]].view()).unwrap();
        assert!(p.iter().all(|&v| v == 0.1));
    }

    #[test]
    fn single_row_is_constant_predictor() {
        let x = array![[0.5, 0.5]];
        let y = array![[1.0, -2.0]];
        let f = ForestModel::fit(x.view(), y.view(), &ForestParams::default(), RngSeed(1)).unwrap();
        assert_eq!(f.predict_one(&[100.0, -4.0]).unwrap(), vec![1.0, -2.0]);
    }

    #[test]
    fn step_data_is_interpolated() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = array![[0.0], [0.0], [1.0], [1.0]];
        let f = ForestModel::fit(x.view(), y.view(), &single_tree(), RngSeed(0)).unwrap();
        let p = f.predict(x.view()).unwrap();
        assert_eq!(p, y);
        // Only one split is needed: x <= 1.5.
        assert_eq!(f.trees()[0].nodes().len(), 3);
        match f.trees()[0].nodes()[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (0, 1.5)),
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn errors() {
        let x = Array2::<f64>::zeros((0, 2));
        let y = Array2::<f64>::zeros((0, 1));
        assert!(matches!(
            ForestModel::fit(x.view(), y.view(), &ForestParams::default(), RngSeed(0)),
            Err(Error::EmptyInput(_))
        ));
        let x = Array2::<f64>::zeros((3, 2));
        let y = Array2::<f64>::zeros((2, 1));
        assert!(matches!(
            ForestModel::fit(x.view(), y.view(), &ForestParams::default(), RngSeed(0)),
            Err(Error::Dimension { .. })
        ));
        let y = Array2::<f64>::zeros((3, 1));
        let f = ForestModel::fit(x.view(), y.view(), &ForestParams::default(), RngSeed(0)).unwrap();
        assert!(matches!(f.predict(Array2::zeros((1, 3)).view()), Err(Error::Dimension { .. })));
        let bad = ForestParams {
            max_features_fraction: 0.0,
            ..Default::default()
        };
        assert!(ForestModel::fit(x.view(), y.view(), &bad, RngSeed(0)).is_err());
    }

    fn random_data(n: usize, m: usize, k: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
        let mut rng = RngSeed(seed).rng();
        let x = Array2::from_shape_fn((n, m), |_| rng.random::<f64>());
        let y = Array2::from_shape_fn((n, k), |_| rng.random::<f64>() * 10.0 - 5.0);
        (x, y)
    }

    #[test]
    fn max_depth_is_respected() {
        let (x, y) = random_data(60, 3, 2, 4);
        let p = ForestParams {
            n_trees: 5,
            max_depth: Some(3),
            ..Default::default()
        };
        let f = ForestModel::fit(x.view(), y.view(), &p, RngSeed(2)).unwrap();
        assert!(f.trees().iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn min_samples_leaf_limits_leaf_count() {
        let (x, y) = random_data(40, 2, 1, 5);
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            min_samples_leaf: 5,
            ..Default::default()
        };
        let f = ForestModel::fit(x.view(), y.view(), &p, RngSeed(2)).unwrap();
        assert!(f.trees()[0].n_leaves() <= 8);
    }

    #[test]
    fn prefix_stability_and_determinism() {
        let (x, y) = random_data(30, 3, 2, 6);
        let small = ForestParams {
            n_trees: 4,
            max_features_fraction: 0.5,
            ..Default::default()
        };
        let big = ForestParams {
            n_trees: 9,
            ..small.clone()
        };
        let a = ForestModel::fit(x.view(), y.view(), &small, RngSeed(3)).unwrap();
        let b = ForestModel::fit(x.view(), y.view(), &big, RngSeed(3)).unwrap();
        assert_eq!(a.trees(), &b.trees()[..4]);
        let c = ForestModel::fit(x.view(), y.view(), &small, RngSeed(3)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn parallel_and_serial_fits_agree() {
        let (x, y) = random_data(50, 3, 4, 8);
        let p = ForestParams {
            n_trees: 16,
            ..Default::default()
        };
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
        let a = serial.install(|| ForestModel::fit(x.view(), y.view(), &p, RngSeed(1)).unwrap());
        let b = wide.install(|| ForestModel::fit(x.view(), y.view(), &p, RngSeed(1)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let (x, y) = random_data(20, 2, 3, 9);
        let f = ForestModel::fit(x.view(), y.view(), &ForestParams { n_trees: 3, ..Default::default() }, RngSeed(4)).unwrap();
        let g = ForestModel::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(f, g);
        let bumped = f.to_json().unwrap().replace("\"version\":1", "\"version\":99");
        assert!(matches!(ForestModel::from_json(&bumped), Err(Error::Version { found: 99, .. })));
        assert!(ForestModel::from_json("{\"format\":\"alps-forest\"").is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn predictions_stay_in_training_range(seed in 0u64..1000, n in 1usize..40) {
            let (x, y) = random_data(n, 3, 2, seed);
            let p = ForestParams { n_trees: 7, ..Default::default() };
            let f = ForestModel::fit(x.view(), y.view(), &p, RngSeed(seed)).unwrap();
            let (probe, _) = random_data(50, 3, 1, seed + 1);
            let pred = f.predict((&probe * 3.0 - 1.0).view()).unwrap();
            for j in 0..2 {
                let lo = y.column(j).fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = y.column(j).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                proptest::prop_assert!(pred.column(j).iter().all(|&v| lo <= v && v <= hi));
            }
        }
    }
}
