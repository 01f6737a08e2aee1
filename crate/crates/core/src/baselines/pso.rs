use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Bounds, ConvergenceTrace};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::sampling::uniform_point;

use super::check_budget;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm_size: 10,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
        }
    }
}

pub fn pso_minimize(objective: &mut Objective<'_>, bounds: &Bounds, budget: usize, seed: RngSeed) -> Result<ConvergenceTrace> {
    pso_minimize_with(objective, bounds, budget, seed, &PsoParams::default())
}

/// Global-best PSO. Velocities start at zero and are clamped to
/// `[-width, width]` per axis; positions are clipped to the box. Particles
/// are updated one at a time and the global best is refreshed after each
/// evaluation.
pub fn pso_minimize_with(
    objective: &mut Objective<'_>,
    bounds: &Bounds,
    budget: usize,
    seed: RngSeed,
    params: &PsoParams,
) -> Result<ConvergenceTrace> {
    if params.swarm_size == 0 {
        return Err(Error::InvalidArgument("swarm_size must be positive".into()));
    }
    check_budget(objective, bounds, budget, params.swarm_size)?;
    let m = bounds.dim();
    let widths = bounds.widths();
    let mut rng = seed.rng();

    let mut pos: Vec<Vec<f64>> = (0..params.swarm_size).map(|_| uniform_point(&mut rng, bounds)).collect();
    let mut vel = vec![vec![0.0; m]; params.swarm_size];
    let mut pbest = pos.clone();
    let mut pbest_f = Vec::with_capacity(params.swarm_size);
    for p in &pos {
        pbest_f.push(objective.evaluate(p)?);
    }
    let mut g = argmin(&pbest_f);
    let mut gbest = pbest[g].clone();
    let mut gbest_f = pbest_f[g];

    let mut used = params.swarm_size;
    'outer: loop {
        for i in 0..params.swarm_size {
            if used >= budget {
                break 'outer;
            }
            for d in 0..m {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let v = params.inertia * vel[i][d]
                    + params.cognitive * r1 * (pbest[i][d] - pos[i][d])
                    + params.social * r2 * (gbest[d] - pos[i][d]);
                vel[i][d] = v.clamp(-widths[d], widths[d]);
                pos[i][d] += vel[i][d];
            }
            bounds.clip_in_place(&mut pos[i]);
            let f = objective.evaluate(&pos[i])?;
            used += 1;
            if f < pbest_f[i] {
                pbest_f[i] = f;
                pbest[i] = pos[i].clone();
                if f < gbest_f {
                    g = i;
                    gbest_f = f;
                    gbest = pos[g].clone();
                }
            }
        }
    }
    objective.trace()
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("nonempty")
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
            let mut obj = Objective::new(&m, t.clone(), 300).unwrap();
            let trace = pso_minimize(&mut obj, m.bounds(), 300, RngSeed(s)).unwrap();
            assert_eq!(trace.len(), 300);
            assert!(trace.last() < 1e-2, "seed {s}: {}", trace.last());
            assert!(obj.ledger().records().iter().all(|r| m.bounds().contains(&r.design)));
        }
    }

    #[test]
    fn swarm_equals_budget_is_random_init() {
        let (m, t) = sphere(2);
        let mut obj = Objective::new(&m, t, 10).unwrap();
        pso_minimize(&mut obj, m.bounds(), 10, RngSeed(4)).unwrap();
        let mut rng = RngSeed(4).rng();
        for r in obj.ledger().records() {
            assert_eq!(r.design.as_slice(), uniform_point(&mut rng, m.bounds()).as_slice());
        }
    }

    #[test]
    fn budget_below_swarm() {
        let (m, t) = sphere(2);
        let mut obj = Objective::new(&m, t, 10).unwrap();
        assert!(matches!(pso_minimize(&mut obj, m.bounds(), 9, RngSeed(0)), Err(Error::InvalidArgument(_))));
    }
}
