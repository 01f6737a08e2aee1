//! Domain types shared by every optimizer: box bounds, design vectors,
//! target curves, the RMSE discrepancy and the append-only evaluation ledger.

use std::io::Write;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box constraints `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::EmptyInput("bounds"));
        }
        if lower.len() != upper.len() {
            return Err(Error::dim("bounds", lower.len(), upper.len()));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "bound {i} is not finite: [{lo}, {hi}]"
                )));
            }
            if lo > hi {
                return Err(Error::InvalidInput(format!(
                    "bound {i} has lower {lo} > upper {hi}"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (lower, upper) = pairs.iter().copied().unzip();
        Bounds::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Errors with the first offending coordinate.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::dim("design vector", self.dim(), x.len()));
        }
        for (i, &v) in x.iter().enumerate() {
            if !(self.lower[i] <= v && v <= self.upper[i]) {
                return Err(Error::OutOfBounds {
                    index: i,
                    value: v,
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
        }
        Ok(())
    }

    pub fn clip_in_place(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.clip_in_place(&mut out);
        out
    }
}

/// A point of the decision space. All entries are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DesignVector(Vec<f64>);

impl DesignVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "design coordinate {i} is not finite"
            )));
        }
        Ok(DesignVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DesignVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DesignVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DesignVector::new(v)
    }
}

impl From<DesignVector> for Vec<f64> {
    fn from(v: DesignVector) -> Self {
        v.0
    }
}

/// The user-defined response the inverse design tries to reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCurve {
    values: Vec<f64>,
    abscissa: Option<Vec<f64>>,
}

impl TargetCurve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("target curve"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("target curve has non-finite entries".into()));
        }
        Ok(TargetCurve {
            values,
            abscissa: None,
        })
    }

    pub fn with_abscissa(values: Vec<f64>, abscissa: Vec<f64>) -> Result<Self> {
        let mut t = TargetCurve::new(values)?;
        if abscissa.len() != t.values.len() {
            return Err(Error::dim("target abscissa", t.values.len(), abscissa.len()));
        }
        if abscissa.iter().any(|v| !v.is_finite()) || abscissa.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "target abscissa must be finite and strictly increasing".into(),
            ));
        }
        t.abscissa = Some(abscissa);
        Ok(t)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn abscissa(&self) -> Option<&[f64]> {
        self.abscissa.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Root-mean-square error between two equally long vectors.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dim("rmse", a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("rmse"));
    }
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput("rmse input is not finite".into()));
        }
        let d = x - y;
        acc += d * d;
    }
    Ok((acc / a.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub design: DesignVector,
    pub response: Vec<f64>,
    pub discrepancy: f64,
}

/// Append-only log of true-model evaluations against one target, capped at
/// `budget` entries.
#[derive(Debug, Clone)]
pub struct EvaluationLedger {
    target: TargetCurve,
    records: Vec<EvaluationRecord>,
    budget: usize,
}

impl EvaluationLedger {
    pub fn new(target: TargetCurve, budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidArgument("budget must be positive".into()));
        }
        Ok(EvaluationLedger {
            target,
            records: Vec::with_capacity(budget),
            budget,
        })
    }

    pub fn target(&self) -> &TargetCurve {
        &self.target
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.records.len()
    }

    pub fn is_full(&self) -> bool {
        self.records.len() >= self.budget
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    /// Scores `response` against the target and appends it.
    pub fn record(&mut self, design: DesignVector, response: Vec<f64>) -> Result<&EvaluationRecord> {
        if self.is_full() {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        if response.len() != self.target.len() {
            return Err(Error::dim("response", self.target.len(), response.len()));
        }
        let discrepancy = rmse(&response, self.target.values())?;
        self.records.push(EvaluationRecord {
            design,
            response,
            discrepancy,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Minimal-discrepancy record; the earliest one wins ties.
    pub fn best(&self) -> Option<&EvaluationRecord> {
        self.records.iter().fold(None, |best: Option<&EvaluationRecord>, r| match best {
            Some(b) if b.discrepancy <= r.discrepancy => Some(b),
            _ => Some(r),
        })
    }

    pub fn discrepancies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.discrepancy).collect()
    }

    /// Header `x_0..x_{M-1},eps`, one row per record.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let m = self.records.first().map_or(0, |r| r.design.len());
        let mut header: Vec<String> = (0..m).map(|i| format!("x_{i}")).collect();
        header.push("eps".into());
        w.write_record(&header)?;
        for r in &self.records {
            let row = r
                .design
                .iter()
                .chain(std::iter::once(&r.discrepancy))
                .map(|v| v.to_string());
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Responses only, N columns per row, same row order as [`write_csv`](Self::write_csv).
    pub fn write_responses_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for r in &self.records {
            w.write_record(r.response.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `ledger.csv` and `responses.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join("ledger.csv"))?)?;
        self.write_responses_csv(std::fs::File::create(dir.join("responses.csv"))?)?;
        Ok(())
    }
}

/// Running minimum of the discrepancy, one entry per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvergenceTrace(pub Vec<f64>);

impl ConvergenceTrace {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("traces are never empty")
    }

    /// Best-so-far value after `n` evaluations (1-based).
    pub fn at(&self, n: usize) -> f64 {
        self.0[n - 1]
    }
}

pub fn best_so_far_trace(ledger: &EvaluationLedger) -> Result<ConvergenceTrace> {
    running_min(&ledger.discrepancies())
}

pub fn running_min(values: &[f64]) -> Result<ConvergenceTrace> {
    if values.is_empty() {
        return Err(Error::EmptyInput("convergence trace"));
    }
    let mut best = f64::INFINITY;
    Ok(ConvergenceTrace(
        values
            .iter()
            .map(|&v| {
                best = best.min(v);
                best
            })
            .collect(),
    ))
}
