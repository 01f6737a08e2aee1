use std::f64::consts::PI;

use super::{ForwardModel, OutOfBounds};
use crate::domain::Bounds;
use crate::error::{Error, Result};

/// `[a, beta, gamma, phi]` used when no true coefficients are configured.
pub const SINUSOID_DEFAULT_TRUE: [f64; 4] = [3.5, 0.15, 1.0, 6.0];
/// `[K, P0, r]` used when no true coefficients are configured.
pub const LOGISTIC_DEFAULT_TRUE: [f64; 3] = [900.0, 150.0, 0.25];

/// `n` evenly spaced points from `start` to `end`, both included.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Damped oscillation `a * exp(-beta t) * sin(gamma t + phi)` sampled at
/// 100 times on `[0, 20 pi]`.
#[derive(Debug, Clone)]
pub struct SinusoidModel {
    bounds: Bounds,
    times: Vec<f64>,
    policy: OutOfBounds,
}

impl SinusoidModel {
    pub fn new(policy: OutOfBounds) -> Self {
        SinusoidModel {
            bounds: Bounds::from_pairs(&[(2.0, 5.0), (0.05, 0.4), (0.0, 2.0), (3.0, 15.0)])
                .expect("static bounds"),
            times: linspace(0.0, 20.0 * PI, 100),
            policy,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

impl Default for SinusoidModel {
    fn default() -> Self {
        Self::new(OutOfBounds::Strict)
    }
}

impl ForwardModel for SinusoidModel {
    fn name(&self) -> &str {
        "sinusoid"
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn output_dim(&self) -> usize {
        self.times.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.policy.apply(&self.bounds, x)?;
        let (a, beta, gamma, phi) = (x[0], x[1], x[2], x[3]);
        Ok(self
            .times
            .iter()
            .map(|&t| a * (-beta * t).exp() * (gamma * t + phi).sin())
            .collect())
    }
}

/// Logistic growth `K / (1 + (K - P0) / P0 * exp(-r t))` sampled at 50
/// times on `[0, 10]` years.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    bounds: Bounds,
    times: Vec<f64>,
    policy: OutOfBounds,
}

impl LogisticModel {
    pub fn new(policy: OutOfBounds) -> Self {
        LogisticModel {
            bounds: Bounds::from_pairs(&[(100.0, 1200.0), (100.0, 1400.0), (0.01, 0.4)])
                .expect("static bounds"),
            times: linspace(0.0, 10.0, 50),
            policy,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

impl Default for LogisticModel {
    fn default() -> Self {
        Self::new(OutOfBounds::Strict)
    }
}

impl ForwardModel for LogisticModel {
    fn name(&self) -> &str {
        "logistic"
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn output_dim(&self) -> usize {
        self.times.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.policy.apply(&self.bounds, x)?;
        let (k, p0, r) = (x[0], x[1], x[2]);
        if p0 <= 0.0 {
            return Err(Error::InvalidArgument(format!("initial population {p0} must be positive")));
        }
        let ratio = (k - p0) / p0;
        Ok(self
            .times
            .iter()
            .map(|&t| k / (1.0 + ratio * (-r * t).exp()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::uniform;
    use crate::RngSeed;

    #[test]
    fn grids() {
        let s = SinusoidModel::default();
        assert_eq!(s.times().len(), 100);
        assert_eq!(s.times()[0], 0.0);
        assert_eq!(*s.times().last().unwrap(), 20.0 * PI);
        let l = LogisticModel::default();
        assert_eq!(l.times().len(), 50);
        assert_eq!(*l.times().last().unwrap(), 10.0);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn sinusoid_constant_phase() {
        let s = SinusoidModel::default();
        let y = s.evaluate(&[2.0, 0.05, 0.0, 3.0]).unwrap();
        assert!((y[0] - 2.0 * 3f64.sin()).abs() < 1e-15);
        assert!((y[0] - 0.28224).abs() < 1e-5);
        for (t, v) in s.times().iter().zip(&y) {
            let want = 2.0 * (-0.05 * t).exp() * 3f64.sin();
            assert!((v - want).abs() <= 1e-12 * want.abs().max(1e-300));
        }
    }

    #[test]
    fn sinusoid_damping_and_envelope() {
        let s = SinusoidModel::default();
        let y = s.evaluate(&[5.0, 0.4, 1.3, 7.0]).unwrap();
        assert!(y.last().unwrap().abs() < 1e-10);
        let pts = uniform(200, s.bounds(), RngSeed(3)).unwrap();
        for row in pts.rows() {
            let x = row.to_vec();
            let y = s.evaluate(&x).unwrap();
            assert!(y.iter().all(|v| v.abs() <= x[0]));
        }
    }

    #[test]
    fn sinusoid_policies() {
        let strict = SinusoidModel::new(OutOfBounds::Strict);
        assert!(matches!(strict.evaluate(&[6.0, 0.1, 1.0, 5.0]), Err(Error::OutOfBounds { index: 0, .. })));
        let clip = SinusoidModel::new(OutOfBounds::Clip);
        assert_eq!(
            clip.evaluate(&[6.0, 0.1, 1.0, 5.0]).unwrap(),
            strict.evaluate(&[5.0, 0.1, 1.0, 5.0]).unwrap()
        );
        assert!(matches!(clip.evaluate(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn logistic_examples() {
        let l = LogisticModel::default();
        let flat = l.evaluate(&[500.0, 500.0, 0.2]).unwrap();
        assert!(flat.iter().all(|&v| v == 500.0));

        let y = l.evaluate(&[1200.0, 100.0, 0.4]).unwrap();
        assert!((y[0] - 100.0).abs() <= 1e-12 * 100.0);
        assert!(y.windows(2).all(|w| w[1] > w[0]));
        assert!(y.iter().all(|&v| v < 1200.0));
        // Direct substitution at t = 10: 1200 / (1 + 11 e^-4).
        let oracle = 1200.0 / (1.0 + 11.0 * (-4.0f64).exp());
        assert!((y[49] - oracle).abs() <= 1e-12 * oracle);
        assert!((oracle - 998.774_813_110_879_8).abs() < 1e-9);
    }

    #[test]
    fn logistic_rejects_nonpositive_p0() {
        let l = LogisticModel {
            bounds: Bounds::from_pairs(&[(100.0, 1200.0), (-10.0, 1400.0), (0.01, 0.4)]).unwrap(),
            times: linspace(0.0, 10.0, 50),
            policy: OutOfBounds::Strict,
        };
        assert!(matches!(l.evaluate(&[500.0, 0.0, 0.1]), Err(Error::InvalidArgument(_))));
    }
}
