use crate::domain::{Bounds, ConvergenceTrace};
use crate::error::Result;
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::sampling::uniform_point;

use super::check_budget;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.05;

/// Bounded simplex search from a uniform random start, run until `budget`
/// evaluations are spent. A collapsed simplex keeps re-evaluating its
/// vertices, so the trace goes flat rather than the run ending early.
pub fn nelder_mead(objective: &mut Objective<'_>, bounds: &Bounds, budget: usize, seed: RngSeed) -> Result<ConvergenceTrace> {
    check_budget(objective, bounds, budget, bounds.dim() + 2)?;
    let x0 = uniform_point(&mut seed.rng(), bounds);
    let simplex = initial_simplex(&x0, bounds);
    simplex_search(|x| objective.evaluate(x), simplex, bounds, budget)?;
    objective.trace()
}

/// `x0` plus one vertex per axis offset by 5% of that axis' width, stepping
/// inward when the forward step would leave the box.
pub(crate) fn initial_simplex(x0: &[f64], bounds: &Bounds) -> Vec<Vec<f64>> {
    let mut simplex = vec![x0.to_vec()];
    for d in 0..x0.len() {
        let step = INITIAL_STEP * bounds.width(d);
        let mut v = x0.to_vec();
        v[d] = if x0[d] + step <= bounds.upper()[d] { x0[d] + step } else { x0[d] - step };
        bounds.clip_in_place(&mut v);
        simplex.push(v);
    }
    simplex
}

struct Counted<F> {
    f: F,
    used: usize,
    max: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counted<F> {
    /// `None` once `max` evaluations have been made.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.used >= self.max {
            return Ok(None);
        }
        self.used += 1;
        let v = (self.f)(x)?;
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        Ok(Some(v))
    }
}

fn affine(a: &[f64], b: &[f64], t: f64, bounds: &Bounds) -> Vec<f64> {
    // a + t (b - a), projected onto the box
    let mut out: Vec<f64> = a.iter().zip(b).map(|(&a, &b)| a + t * (b - a)).collect();
    bounds.clip_in_place(&mut out);
    out
}

/// Minimizes `f` from `simplex` with at most `max_evals` calls and returns
/// the best point seen.
pub(crate) fn simplex_search<F>(f: F, simplex: Vec<Vec<f64>>, bounds: &Bounds, max_evals: usize) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut c = Counted {
        f,
        used: 0,
        max: max_evals,
        best: None,
    };
    let n = simplex.len();
    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    for v in simplex {
        match c.eval(&v)? {
            Some(fv) => verts.push((v, fv)),
            None => return Ok(c.best.expect("max_evals >= 1")),
        }
    }
    let m = n - 1;
    loop {
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let dim = verts[0].0.len();
        let centroid: Vec<f64> = (0..dim)
            .map(|d| verts[..m].iter().map(|v| v.0[d]).sum::<f64>() / m as f64)
            .collect();
        let (worst, f_worst) = verts[m].clone();

        let xr = affine(&centroid, &worst, -REFLECT, bounds);
        let Some(fr) = c.eval(&xr)? else { break };

        if fr < verts[0].1 {
            let xe = affine(&centroid, &xr, EXPAND, bounds);
            let Some(fe) = c.eval(&xe)? else { break };
            verts[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < verts[m - 1].1 {
            verts[m] = (xr, fr);
            continue;
        }
        let (xc, outside) = if fr < f_worst {
            (affine(&centroid, &xr, CONTRACT, bounds), true)
        } else {
            (affine(&centroid, &worst, CONTRACT, bounds), false)
        };
        let Some(fc) = c.eval(&xc)? else { break };
        if (outside && fc <= fr) || (!outside && fc < f_worst) {
            verts[m] = (xc, fc);
            continue;
        }
        let best = verts[0].0.clone();
        for v in verts.iter_mut().skip(1) {
            let x = affine(&best, &v.0, SHRINK, bounds);
            let Some(fx) = c.eval(&x)? else {
                return Ok(c.best.expect("evaluated at least once"));
            };
            *v = (x, fx);
        }
    }
    Ok(c.best.expect("evaluated at least once"))
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::*;
    use crate::benchmarks::ForwardModel;
    use crate::error::Error;

    #[test]
    fn quadratic_converges() {
        let (m, t) = quadratic();
        for s in 0..10 {
            let mut obj = Objective::new(&m, t.clone(), 50).unwrap();
            nelder_mead(&mut obj, m.bounds(), 50, RngSeed(s)).unwrap();
            assert_eq!(obj.evaluations(), 50);
            let best = obj.ledger().best().unwrap();
            assert!((best.design[0] - 2.0).abs() < 1e-3, "seed {s}: {:?}", best.design);
        }
    }

    #[test]
    fn rosenbrock_like_progress() {
        let (m, t) = sphere(3);
        let mut obj = Objective::new(&m, t, 300).unwrap();
        let trace = nelder_mead(&mut obj, m.bounds(), 300, RngSeed(2)).unwrap();
        assert!(trace.last() < 1e-4);
        assert!(obj.ledger().records().iter().all(|r| m.bounds().contains(&r.design)));
    }

    #[test]
    fn budget_floor() {
        let (m, t) = sphere(3);
        let mut obj = Objective::new(&m, t, 10).unwrap();
        assert!(matches!(nelder_mead(&mut obj, m.bounds(), 4, RngSeed(0)), Err(Error::InvalidArgument(_))));
        nelder_mead(&mut obj, m.bounds(), 5, RngSeed(0)).unwrap();
        assert_eq!(obj.evaluations(), 5);
    }

    #[test]
    fn optimal_start_gives_zero_first() {
        let (m, t) = zero(2);
        let mut obj = Objective::new(&m, t, 8).unwrap();
        let trace = nelder_mead(&mut obj, m.bounds(), 8, RngSeed(0)).unwrap();
        assert_eq!(trace.at(1), 0.0);
    }

    #[test]
    fn simplex_near_upper_face_steps_inward() {
        let b = Bounds::from_pairs(&[(0.0, 1.0), (0.0, 10.0)]).unwrap();
        let s = initial_simplex(&[1.0, 5.0], &b);
        assert_eq!(s, vec![vec![1.0, 5.0], vec![0.95, 5.0], vec![1.0, 5.5]]);
    }
}
