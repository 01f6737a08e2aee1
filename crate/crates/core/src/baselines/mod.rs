//! Comparison optimizers sharing the `(objective, bounds, budget, seed)`
//! signature. Each spends exactly `budget` evaluations of the objective and
//! returns the best-so-far trace of its ledger.

mod bo;
mod de;
mod nelder_mead;
mod pso;

use crate::domain::{Bounds, ConvergenceTrace};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::sampling::uniform_point;

pub use bo::{bo_minimize, bo_minimize_with, expected_improvement, BoParams, GpModel, MATERN_LENGTH_SCALE};
pub use de::{de_minimize, de_minimize_with, DeParams};
pub use nelder_mead::nelder_mead;
pub(crate) use nelder_mead::{initial_simplex, simplex_search};
pub use pso::{pso_minimize, pso_minimize_with, PsoParams};

/// `budget` i.i.d. uniform designs.
pub fn random_search(objective: &mut Objective<'_>, bounds: &Bounds, budget: usize, seed: RngSeed) -> Result<ConvergenceTrace> {
    check_budget(objective, bounds, budget, 1)?;
    let mut rng = seed.rng();
    for _ in 0..budget {
        let x = uniform_point(&mut rng, bounds);
        objective.evaluate(&x)?;
    }
    objective.trace()
}

pub(crate) fn check_budget(objective: &Objective<'_>, bounds: &Bounds, budget: usize, minimum: usize) -> Result<()> {
    if bounds.dim() != objective.model().input_dim() {
        return Err(Error::dim("bounds vs model input", objective.model().input_dim(), bounds.dim()));
    }
    if budget < minimum.max(1) {
        return Err(Error::InvalidArgument(format!("budget {budget} is below the minimum of {}", minimum.max(1))));
    }
    if budget > objective.remaining() {
        return Err(Error::BudgetExhausted {
            budget: objective.ledger().budget(),
        });
    }
    Ok(())
}
