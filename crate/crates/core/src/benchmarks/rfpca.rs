//! RF-PCA forward model: a forest predicts PCA scores of an emissivity curve
//! from laser parameters, and the PCA inverse maps the scores back to the
//! full curve.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{linspace, wavelength_grid, ForwardModel, OutOfBounds};
use crate::domain::{rmse, Bounds};
use crate::error::{Error, Result};
use crate::forest::{ForestModel, ForestParams};
use crate::pca::PcaModel;
use crate::rng::RngSeed;

pub const DATASET_PARAM_COLUMNS: [&str; 3] = ["power_w", "speed_mm_s", "spacing_um"];
const FORMAT: &str = "alps-rfpca";
const FORMAT_VERSION: u32 = 1;

/// Laser parameters (`n x 3`) and their measured curves (`n x N`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmissivityDataset {
    pub params: Array2<f64>,
    pub curves: Array2<f64>,
}

impl EmissivityDataset {
    pub fn len(&self) -> usize {
        self.params.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.params.nrows() == 0
    }

    pub fn n_wavelengths(&self) -> usize {
        self.curves.ncols()
    }

    /// Header `power_w,speed_mm_s,spacing_um,e_0,...,e_{N-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = DATASET_PARAM_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain((0..self.n_wavelengths()).map(|i| format!("e_{i}")));
        w.write_record(header)?;
        for (p, c) in self.params.rows().into_iter().zip(self.curves.rows()) {
            w.write_record(p.iter().chain(c.iter()).map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_dataset(path: &Path) -> Result<EmissivityDataset> {
    let malformed = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 4 || headers.iter().take(3).map(str::trim).ne(DATASET_PARAM_COLUMNS) {
        return Err(malformed(format!(
            "header must start with {} followed by emissivity columns",
            DATASET_PARAM_COLUMNS.join(",")
        )));
    }
    let n_wl = headers.len() - 3;
    let mut params = Vec::new();
    let mut curves = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        if rec.len() != n_wl + 3 {
            return Err(malformed(format!(
                "row {} has {} emissivity values, expected {n_wl}",
                line + 1,
                rec.len().saturating_sub(3)
            )));
        }
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| malformed(format!("row {} column {i}: `{field}` is not a number", line + 1)))?;
            if !v.is_finite() {
                return Err(malformed(format!("row {} column {i} is not finite", line + 1)));
            }
            if i < 3 {
                params.push(v);
            } else if !(0.0..=1.0).contains(&v) {
                return Err(malformed(format!("row {} emissivity {v} outside [0, 1]", line + 1)));
            } else {
                curves.push(v);
            }
        }
    }
    let n = params.len() / 3;
    if n == 0 {
        return Err(malformed("no data rows".into()));
    }
    Ok(EmissivityDataset {
        params: Array2::from_shape_vec((n, 3), params).expect("row-major"),
        curves: Array2::from_shape_vec((n, n_wl), curves).expect("row-major"),
    })
}

/// Smooth analytic stand-in for a laser-texturing dataset over the Inconel
/// parameter box: a baseline emissivity set by power and speed, an absorption
/// bump whose centre moves with speed, and a spacing-dependent tilt. Values
/// stay inside `[0.1, 0.95]`.
pub fn synthetic_emissivity_dataset(n: usize, n_wavelengths: usize, seed: RngSeed) -> EmissivityDataset {
    let bounds = super::inconel_bounds();
    let grid = linspace(2.5, 12.5, n_wavelengths);
    let mut rng = seed.rng();
    let params = Array2::from_shape_fn((n, 3), |(_, d)| {
        bounds.lower()[d] + rng.random::<f64>() * bounds.width(d)
    });
    let curves = Array2::from_shape_fn((n, n_wavelengths), |(i, j)| {
        let p = (params[[i, 0]] - 0.2) / 1.1;
        let s = (params[[i, 1]] - 10.0) / 690.0;
        let h = (params[[i, 2]] - 15.0) / 13.0;
        analytic_emissivity(p, s, h, grid[j])
    });
    EmissivityDataset { params, curves }
}

fn analytic_emissivity(p: f64, s: f64, h: f64, wavelength: f64) -> f64 {
    let base = 0.2 + 0.5 * p * (1.0 - 0.5 * s);
    let centre = 4.0 + 6.0 * s;
    let width = 1.5 + p;
    let bump = 0.25 * (1.0 - h) * (-((wavelength - centre) / width).powi(2)).exp();
    base + bump - 0.1 * h * (wavelength - 2.5) / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfPcaModel {
    forest: ForestModel,
    pca: PcaModel,
    bounds: Bounds,
    wavelengths: Vec<f64>,
    #[serde(default)]
    policy: OutOfBounds,
}

/// Hold-out metrics of an RF-PCA fit. RMSE values are means of per-curve RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_train: usize,
    pub n_test: usize,
    pub pca_components: usize,
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    pub test_rmse_max: Option<f64>,
    pub test_rmse_std: Option<f64>,
    pub pca_test_rmse: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub pca_k: usize,
    pub forest: ForestParams,
    pub test_fraction: f64,
    /// Parameter box of the fitted model; the data's bounding box when absent.
    pub bounds: Option<Bounds>,
    pub seed: RngSeed,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            pca_k: 10,
            forest: ForestParams::experimental(),
            test_fraction: 0.25,
            bounds: None,
            seed: RngSeed(0),
        }
    }
}

/// Loads a dataset CSV and fits an RF-PCA model with a shuffled hold-out split.
pub fn rfpca_train(csv_path: &Path, options: &TrainOptions) -> Result<(RfPcaModel, TrainReport)> {
    let data = load_dataset(csv_path)?;
    RfPcaModel::train(&data, options)
}

impl RfPcaModel {
    pub fn train(data: &EmissivityDataset, options: &TrainOptions) -> Result<(Self, TrainReport)> {
        let n = data.len();
        if n == 0 {
            return Err(Error::EmptyInput("emissivity dataset"));
        }
        if !(0.0..1.0).contains(&options.test_fraction) {
            return Err(Error::InvalidArgument("test fraction must lie in [0, 1)".into()));
        }
        if options.pca_k == 0 {
            return Err(Error::InvalidArgument("PCA component count must be positive".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut options.seed.child("split", 0).rng());
        let n_test = (n as f64 * options.test_fraction).floor() as usize;
        let (test_idx, train_idx) = order.split_at(n_test);

        let train_x = data.params.select(Axis(0), train_idx);
        let train_y = data.curves.select(Axis(0), train_idx);
        let n_wl = data.n_wavelengths();

        let pca = if train_idx.len() >= 2 {
            PcaModel::fit(train_y.view(), options.pca_k.min(train_idx.len()).min(n_wl))?
        } else {
            PcaModel::fit(ndarray::concatenate![Axis(0), train_y, train_y].view(), 1)?
        };
        let scores = pca.transform(train_y.view())?;
        let forest = ForestModel::fit(train_x.view(), scores.view(), &options.forest, options.seed.child("forest", 0))?;

        let bounds = match &options.bounds {
            Some(b) => {
                if b.dim() != 3 {
                    return Err(Error::dim("RF-PCA bounds", 3, b.dim()));
                }
                b.clone()
            }
            None => {
                let lo: Vec<f64> = data.params.columns().into_iter().map(|c| c.fold(f64::INFINITY, |a, &b| a.min(b))).collect();
                let hi: Vec<f64> = data.params.columns().into_iter().map(|c| c.fold(f64::NEG_INFINITY, |a, &b| a.max(b))).collect();
                Bounds::new(lo, hi)?
            }
        };
        let wavelengths = if n_wl == 822 { wavelength_grid() } else { linspace(2.5, 12.5, n_wl) };
        let model = RfPcaModel {
            forest,
            pca,
            bounds,
            wavelengths,
            policy: OutOfBounds::Clip,
        };

        let curve_errors = |x: &Array2<f64>, y: &Array2<f64>| -> Result<Vec<f64>> {
            let pred = model.predict(x)?;
            pred.rows()
                .into_iter()
                .zip(y.rows())
                .map(|(a, b)| rmse(a.as_slice().expect("contiguous"), &b.to_vec()))
                .collect()
        };
        let train_errs = curve_errors(&train_x, &train_y)?;
        let mut report = TrainReport {
            n_train: train_idx.len(),
            n_test,
            pca_components: model.pca.n_components(),
            train_rmse: mean(&train_errs),
            test_rmse: None,
            test_rmse_max: None,
            test_rmse_std: None,
            pca_test_rmse: None,
        };
        if n_test > 0 {
            let test_x = data.params.select(Axis(0), test_idx);
            let test_y = data.curves.select(Axis(0), test_idx);
            let errs = curve_errors(&test_x, &test_y)?;
            let m = mean(&errs);
            report.test_rmse = Some(m);
            report.test_rmse_max = Some(errs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            report.test_rmse_std = Some((errs.iter().map(|e| (e - m).powi(2)).sum::<f64>() / errs.len() as f64).sqrt());
            report.pca_test_rmse = Some(model.pca.reconstruction_rmse(test_y.view())?);
        }
        Ok((model, report))
    }

    pub fn forest(&self) -> &ForestModel {
        &self.forest
    }

    pub fn pca(&self) -> &PcaModel {
        &self.pca
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.dim() != self.forest.input_dim() {
            return Err(Error::dim("RF-PCA bounds", self.forest.input_dim(), bounds.dim()));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn with_policy(mut self, policy: OutOfBounds) -> Self {
        self.policy = policy;
        self
    }

    /// Curves for each row of `x`, `n x N`.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let scores = self.forest.predict(x.view())?;
        self.pca.inverse(scores.view())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            format: &'static str,
            version: u32,
            #[serde(flatten)]
            model: &'a RfPcaModel,
        }
        Ok(serde_json::to_string(&Out {
            format: FORMAT,
            version: FORMAT_VERSION,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct In {
            format: String,
            version: u32,
            #[serde(flatten)]
            model: RfPcaModel,
        }
        let v: In = serde_json::from_str(text)?;
        if v.format != FORMAT {
            return Err(Error::InvalidInput(format!("expected an {FORMAT} file, found `{}`", v.format)));
        }
        if v.version != FORMAT_VERSION {
            return Err(Error::Version {
                kind: "RF-PCA model",
                expected: FORMAT_VERSION,
                found: v.version,
            });
        }
        let m = v.model;
        m.forest.check()?;
        if m.forest.output_dim() != m.pca.n_components()
            || m.pca.input_dim() != m.wavelengths.len()
            || m.bounds.dim() != m.forest.input_dim()
        {
            return Err(Error::InvalidInput("RF-PCA parts have inconsistent dimensions".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl ForwardModel for RfPcaModel {
    fn name(&self) -> &str {
        "rfpca"
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn output_dim(&self) -> usize {
        self.wavelengths.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.policy.apply(&self.bounds, x)?;
        let scores = self.forest.predict_one(&x)?;
        let mut out = vec![0.0; self.wavelengths.len()];
        self.pca.inverse_one(&scores, &mut out);
        Ok(out)
    }
}

fn mean(v: &[f64]) -> f64 {
    Array1::from(v.to_vec()).mean().unwrap_or(f64::NAN)
}
