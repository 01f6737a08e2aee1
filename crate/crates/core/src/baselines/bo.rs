use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::domain::{Bounds, ConvergenceTrace};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::sampling::{lhs, uniform};

use super::{check_budget, initial_simplex, simplex_search};

pub const MATERN_LENGTH_SCALE: f64 = 1.0;
const BASE_JITTER: f64 = 1e-8;
const JITTER_STEPS: i32 = 6;

fn matern52(a: &[f64], b: &[f64]) -> f64 {
    let r = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() / MATERN_LENGTH_SCALE;
    let s = 5f64.sqrt() * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

/// Zero-mean GP with a unit-variance Matérn 5/2 kernel fitted to
/// standardized observations. Inputs are used as given.
#[derive(Debug, Clone)]
pub struct GpModel {
    x: Vec<Vec<f64>>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    y_mean: f64,
    y_scale: f64,
    best: f64,
    jitter: f64,
}

impl GpModel {
    /// Retries the Cholesky factorization with jitter 1e-8, 1e-7, ..., 1e-2.
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("GP training set"));
        }
        if x.len() != y.len() {
            return Err(Error::dim("GP targets", x.len(), y.len()));
        }
        let n = x.len();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
        let y_scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let ys = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_scale));
        let k = DMatrix::from_fn(n, n, |i, j| matern52(&x[i], &x[j]));

        for step in 0..=JITTER_STEPS {
            let jitter = BASE_JITTER * 10f64.powi(step);
            let kj = &k + DMatrix::identity(n, n) * jitter;
            if let Some(chol) = kj.cholesky() {
                let alpha = chol.solve(&ys);
                return Ok(GpModel {
                    x: x.to_vec(),
                    chol,
                    alpha,
                    y_mean,
                    y_scale,
                    best: ys.min(),
                    jitter,
                });
            }
        }
        Err(Error::Numerical(format!(
            "GP kernel matrix ({n}x{n}) not positive definite with jitter up to {:e}",
            BASE_JITTER * 10f64.powi(JITTER_STEPS)
        )))
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and standard deviation on the standardized scale.
    pub fn predict_standardized(&self, x: &[f64]) -> (f64, f64) {
        let ks = DVector::from_iterator(self.x.len(), self.x.iter().map(|xi| matern52(xi, x)));
        let mu = ks.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&ks).expect("nonsingular factor");
        let var = (1.0 - v.norm_squared()).max(0.0);
        (mu, var.sqrt())
    }

    /// Posterior mean and standard deviation in the units of the observations.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let (mu, sd) = self.predict_standardized(x);
        (self.y_mean + self.y_scale * mu, self.y_scale * sd)
    }

    /// Expected improvement below the best observation, standardized scale.
    pub fn ei(&self, x: &[f64], xi: f64) -> f64 {
        let (mu, sd) = self.predict_standardized(x);
        expected_improvement(mu, sd, self.best, xi)
    }
}

/// `(best - mu - xi) Phi(z) + sigma phi(z)` with `z = (best - mu - xi) / sigma`;
/// zero spread gives the positive part of the improvement.
pub fn expected_improvement(mu: f64, sigma: f64, best: f64, xi: f64) -> f64 {
    let imp = best - mu - xi;
    if sigma <= 1e-300 {
        return imp.max(0.0);
    }
    let z = imp / sigma;
    let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (imp * cdf + sigma * pdf).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoParams {
    pub n_init: usize,
    pub xi: f64,
    pub n_probes: usize,
    pub n_refine: usize,
    /// Objective calls per simplex refinement of EI.
    pub refine_evals: usize,
}

impl Default for BoParams {
    fn default() -> Self {
        BoParams {
            n_init: 5,
            xi: 0.01,
            n_probes: 512,
            n_refine: 4,
            refine_evals: 100,
        }
    }
}

pub fn bo_minimize(objective: &mut Objective<'_>, bounds: &Bounds, budget: usize, seed: RngSeed) -> Result<ConvergenceTrace> {
    bo_minimize_with(objective, bounds, budget, seed, &BoParams::default())
}

/// GP-EI on the scalar discrepancy: LHS start, then one evaluation per
/// iteration at the approximate EI maximizer found by uniform probing and
/// simplex refinement of the best probes.
pub fn bo_minimize_with(
    objective: &mut Objective<'_>,
    bounds: &Bounds,
    budget: usize,
    seed: RngSeed,
    params: &BoParams,
) -> Result<ConvergenceTrace> {
    if params.n_init == 0 || params.n_probes == 0 {
        return Err(Error::InvalidArgument("n_init and n_probes must be positive".into()));
    }
    check_budget(objective, bounds, budget, params.n_init + 1)?;
    let start = objective.evaluations();
    let init = lhs(params.n_init, bounds, seed.child("init", 0))?;
    for row in init.rows() {
        objective.evaluate(row.as_slice().expect("contiguous"))?;
    }

    let mut iter = 0u64;
    while objective.evaluations() - start < budget {
        let records = &objective.ledger().records()[start..];
        let xs: Vec<Vec<f64>> = records.iter().map(|r| r.design.to_vec()).collect();
        let ys: Vec<f64> = records.iter().map(|r| r.discrepancy).collect();
        let gp = GpModel::fit(&xs, &ys)?;
        let next = maximize_ei(&gp, bounds, params, seed.child("acquisition", iter))?;
        objective.evaluate(&next)?;
        iter += 1;
    }
    objective.trace()
}

fn maximize_ei(gp: &GpModel, bounds: &Bounds, params: &BoParams, seed: RngSeed) -> Result<Vec<f64>> {
    let ei = |x: &[f64]| gp.ei(x, params.xi);
    let probes = uniform(params.n_probes, bounds, seed)?;
    let mut scored: Vec<(usize, f64)> = probes
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, r)| (i, ei(r.as_slice().expect("contiguous"))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let first = scored[0].0;
    let mut best_x = probes.row(first).to_vec();
    let mut best_ei = scored[0].1;
    for &(i, _) in scored.iter().take(params.n_refine) {
        let x0 = probes.row(i).to_vec();
        let (x, neg) = simplex_search(|x| Ok(-ei(x)), initial_simplex(&x0, bounds), bounds, params.refine_evals)?;
        if -neg > best_ei {
            best_ei = -neg;
            best_x = x;
        }
    }
    Ok(best_x)
}
