//! Latin Hypercube and uniform random sampling over box bounds.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::Bounds;
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// `n` rows, one design vector per row.
pub type SampleMatrix = Array2<f64>;

// Keeps jittered points off the shared faces of adjacent strata so that
// rounding in `lower + u * width` can never push a point into a neighbour.
const STRATUM_MARGIN: f64 = 1e-9;

/// Stratified sample: in every dimension the `n` points fall one per
/// equal-width stratum, with an independent stratum permutation per
/// dimension and a uniform position inside each stratum.
pub fn lhs(n: usize, bounds: &Bounds, seed: RngSeed) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let m = bounds.dim();
    let mut rng = seed.rng();
    let mut out = Array2::zeros((n, m));
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..m {
        strata.shuffle(&mut rng);
        let (lo, width) = (bounds.lower()[d], bounds.width(d));
        for (i, &k) in strata.iter().enumerate() {
            let r: f64 = rng.random();
            let jitter = STRATUM_MARGIN + r * (1.0 - 2.0 * STRATUM_MARGIN);
            let u = (k as f64 + jitter) / n as f64;
            out[[i, d]] = (lo + u * width).min(bounds.upper()[d]);
        }
    }
    Ok(out)
}

/// i.i.d. uniform rows inside `bounds`.
pub fn uniform(n: usize, bounds: &Bounds, seed: RngSeed) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let mut rng = seed.rng();
    Ok(Array2::from_shape_fn((n, bounds.dim()), |(_, d)| {
        uniform_coordinate(&mut rng, bounds, d)
    }))
}

pub(crate) fn uniform_point<R: Rng>(rng: &mut R, bounds: &Bounds) -> Vec<f64> {
    (0..bounds.dim())
        .map(|d| uniform_coordinate(rng, bounds, d))
        .collect()
}

fn uniform_coordinate<R: Rng>(rng: &mut R, bounds: &Bounds, d: usize) -> f64 {
    let r: f64 = rng.random();
    (bounds.lower()[d] + r * bounds.width(d)).min(bounds.upper()[d])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strata_hit_once(samples: &SampleMatrix, bounds: &Bounds) -> bool {
        let n = samples.nrows();
        (0..bounds.dim()).all(|d| {
            let mut seen = vec![false; n];
            samples.column(d).iter().all(|&x| {
                let u = (x - bounds.lower()[d]) / bounds.width(d);
                let k = (u * n as f64).floor() as usize;
                k < n && !std::mem::replace(&mut seen[k], true)
            })
        })
    }

    #[test]
    fn single_point_in_unit_interval() {
        let b = Bounds::new(vec![0.], vec![1.]).unwrap();
        let s = lhs(1, &b, RngSeed(3)).unwrap();
        assert_eq!(s.dim(), (1, 1));
        assert!((0.0..1.0).contains(&s[[0, 0]]));
    }

    #[test]
    fn quartiles_hit_once() {
        let b = Bounds::new(vec![0.], vec![1.]).unwrap();
        for seed in 0..20 {
            let s = lhs(4, &b, RngSeed(seed)).unwrap();
            let mut v: Vec<f64> = s.column(0).to_vec();
            v.sort_by(f64::total_cmp);
            for (k, x) in v.iter().enumerate() {
                assert!(*x >= k as f64 / 4.0 && *x < (k + 1) as f64 / 4.0);
            }
        }
    }

    #[test]
    fn logistic_box_600() {
        let b = Bounds::new(vec![100., 100., 0.01], vec![1200., 1400., 0.4]).unwrap();
        let s = lhs(600, &b, RngSeed(11)).unwrap();
        assert!(s.rows().into_iter().all(|r| b.contains(r.as_slice().unwrap())));
        assert!(strata_hit_once(&s, &b));
    }

    #[test]
    fn zero_samples_rejected() {
        let b = Bounds::new(vec![0.], vec![1.]).unwrap();
        assert!(matches!(lhs(0, &b, RngSeed(0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(uniform(0, &b, RngSeed(0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn degenerate_dimension_is_constant() {
        let b = Bounds::new(vec![0., 2.5], vec![1., 2.5]).unwrap();
        let s = lhs(5, &b, RngSeed(1)).unwrap();
        assert!(s.column(1).iter().all(|&v| v == 2.5));
        let u = uniform(1, &b, RngSeed(1)).unwrap();
        assert_eq!(u[[0, 1]], 2.5);
    }

    #[test]
    fn uniform_examples() {
        let b = Bounds::new(vec![0.], vec![1.]).unwrap();
        let s = uniform(1000, &b, RngSeed(2024)).unwrap();
        let mean = s.column(0).sum() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05, "mean {mean}");

        let b = Bounds::new(vec![-1., 5.], vec![1., 6.]).unwrap();
        let s = uniform(3, &b, RngSeed(9)).unwrap();
        assert_eq!(s.dim(), (3, 2));
        assert!(s.rows().into_iter().all(|r| b.contains(r.as_slice().unwrap())));
    }

    #[test]
    fn samplers_are_deterministic() {
        let b = Bounds::new(vec![0., -3.], vec![1., 3.]).unwrap();
        assert_eq!(lhs(17, &b, RngSeed(5)).unwrap(), lhs(17, &b, RngSeed(5)).unwrap());
        assert_ne!(lhs(17, &b, RngSeed(5)).unwrap(), lhs(17, &b, RngSeed(6)).unwrap());
        assert_eq!(uniform(8, &b, RngSeed(5)).unwrap(), uniform(8, &b, RngSeed(5)).unwrap());
    }

    proptest::proptest! {
        #[test]
        fn stratification_holds(n in 1usize..200, m in 1usize..5, seed in proptest::prelude::any::<u64>()) {
            let lower: Vec<f64> = (0..m).map(|d| d as f64 * -1.5).collect();
            let upper: Vec<f64> = (0..m).map(|d| 1.0 + d as f64 * 10.0).collect();
            let b = Bounds::new(lower, upper).unwrap();
            let s = lhs(n, &b, RngSeed(seed)).unwrap();
            proptest::prop_assert!(strata_hit_once(&s, &b));
        }
    }
}
