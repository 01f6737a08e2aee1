use crate::benchmarks::ForwardModel;
use crate::domain::{best_so_far_trace, ConvergenceTrace, DesignVector, EvaluationLedger, TargetCurve};
use crate::error::{Error, Result};

/// Routes every true-model evaluation through a budgeted ledger and returns
/// the discrepancy to the optimizer.
pub struct Objective<'m> {
    model: &'m dyn ForwardModel,
    ledger: EvaluationLedger,
}

impl<'m> Objective<'m> {
    pub fn new(model: &'m dyn ForwardModel, target: TargetCurve, budget: usize) -> Result<Self> {
        if model.output_dim() != target.len() {
            return Err(Error::dim("model output vs target", target.len(), model.output_dim()));
        }
        Ok(Objective {
            model,
            ledger: EvaluationLedger::new(target, budget)?,
        })
    }

    pub fn model(&self) -> &'m dyn ForwardModel {
        self.model
    }

    pub fn target(&self) -> &TargetCurve {
        self.ledger.target()
    }

    pub fn ledger(&self) -> &EvaluationLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> EvaluationLedger {
        self.ledger
    }

    pub fn evaluations(&self) -> usize {
        self.ledger.len()
    }

    pub fn remaining(&self) -> usize {
        self.ledger.remaining()
    }

    pub fn exhausted(&self) -> bool {
        self.ledger.is_full()
    }

    /// Evaluates `x` with the true model and returns its discrepancy.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if self.ledger.is_full() {
            return Err(Error::BudgetExhausted {
                budget: self.ledger.budget(),
            });
        }
        let design = DesignVector::new(x.to_vec())?;
        let response = self.model.evaluate(x)?;
        Ok(self.ledger.record(design, response)?.discrepancy)
    }

    pub fn trace(&self) -> Result<ConvergenceTrace> {
        best_so_far_trace(&self.ledger)
    }
}
