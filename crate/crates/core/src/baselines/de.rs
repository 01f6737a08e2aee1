use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Bounds, ConvergenceTrace};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::sampling::uniform_point;

use super::check_budget;

/// rand/1/bin settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeParams {
    pub pop: usize,
    pub f: f64,
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            pop: 10,
            f: 0.8,
            cr: 0.9,
        }
    }
}

pub fn de_minimize(objective: &mut Objective<'_>, bounds: &Bounds, budget: usize, seed: RngSeed) -> Result<ConvergenceTrace> {
    de_minimize_with(objective, bounds, budget, seed, &DeParams::default())
}

/// Differential evolution, rand/1/bin. Trial vectors of a generation are
/// built from the previous generation; each replaces its parent when it is
/// no worse.
pub fn de_minimize_with(
    objective: &mut Objective<'_>,
    bounds: &Bounds,
    budget: usize,
    seed: RngSeed,
    params: &DeParams,
) -> Result<ConvergenceTrace> {
    if params.pop < 4 {
        return Err(Error::InvalidArgument(format!("rand/1 needs pop >= 4, got {}", params.pop)));
    }
    check_budget(objective, bounds, budget, params.pop)?;
    let m = bounds.dim();
    let mut rng = seed.rng();

    let mut pop: Vec<Vec<f64>> = (0..params.pop).map(|_| uniform_point(&mut rng, bounds)).collect();
    let mut fit = Vec::with_capacity(params.pop);
    for p in &pop {
        fit.push(objective.evaluate(p)?);
    }

    let mut used = params.pop;
    while used < budget {
        let mut next = pop.clone();
        let mut next_fit = fit.clone();
        for i in 0..params.pop {
            if used >= budget {
                break;
            }
            let [r1, r2, r3] = distinct_three(&mut rng, params.pop, i);
            let j_rand = rng.random_range(0..m);
            let mut trial: Vec<f64> = (0..m)
                .map(|d| {
                    if d == j_rand || rng.random::<f64>() < params.cr {
                        pop[r1][d] + params.f * (pop[r2][d] - pop[r3][d])
                    } else {
                        pop[i][d]
                    }
                })
                .collect();
            bounds.clip_in_place(&mut trial);
            let f = objective.evaluate(&trial)?;
            used += 1;
            if f <= fit[i] {
                next[i] = trial;
                next_fit[i] = f;
            }
        }
        pop = next;
        fit = next_fit;
    }
    objective.trace()
}

fn distinct_three<R: Rng>(rng: &mut R, n: usize, exclude: usize) -> [usize; 3] {
    let mut out = [exclude; 3];
    for k in 0..3 {
        loop {
            let c = rng.random_range(0..n);
            if c != exclude && !out[..k].contains(&c) {
                out[k] = c;
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::*;
    use crate::benchmarks::ForwardModel;

    #[test]
    fn sphere_sanity() {
        let (m, t) = sphere(3);
        for s in 0..5 {
            let mut obj = Objective::new(&m, t.clone(), 500).unwrap();
            let trace = de_minimize(&mut obj, m.bounds(), 500, RngSeed(s)).unwrap();
            assert_eq!(trace.len(), 500);
            assert!(trace.last() < 1e-2, "seed {s}: {}", trace.last());
            assert!(obj.ledger().records().iter().all(|r| m.bounds().contains(&r.design)));
        }
    }

    #[test]
    fn pop_equals_budget_is_init_only() {
        let (m, t) = sphere(2);
        let mut obj = Objective::new(&m, t, 10).unwrap();
        de_minimize(&mut obj, m.bounds(), 10, RngSeed(3)).unwrap();
        let mut rng = RngSeed(3).rng();
        for r in obj.ledger().records() {
            assert_eq!(r.design.as_slice(), uniform_point(&mut rng, m.bounds()).as_slice());
        }
    }

    #[test]
    fn distinct_indices() {
        let mut rng = RngSeed(0).rng();
        for i in 0..200 {
            let [a, b, c] = distinct_three(&mut rng, 4, i % 4);
            let all = [a, b, c, i % 4];
            for x in 0..4 {
                for y in x + 1..4 {
                    assert_ne!(all[x], all[y]);
                }
            }
        }
    }

    #[test]
    fn errors() {
        let (m, t) = sphere(2);
        let mut obj = Objective::new(&m, t, 20).unwrap();
        assert!(matches!(de_minimize(&mut obj, m.bounds(), 9, RngSeed(0)), Err(Error::InvalidArgument(_))));
        let p = DeParams { pop: 3, ..Default::default() };
        assert!(de_minimize_with(&mut obj, m.bounds(), 10, RngSeed(0), &p).is_err());
    }
}
