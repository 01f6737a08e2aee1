//! Greedy prediction-based batch infill on a random-forest surrogate.
//!
//! Each round draws a fresh Latin Hypercube pool, ranks it by the RMSE
//! between the surrogate's predicted response and the target, evaluates the
//! best `n_batch` pool members with the true model and refits the surrogate
//! from scratch on everything evaluated so far. The surrogate learns the
//! forward map `x -> f(x)`, not the discrepancy, which is what makes it
//! reusable as a warm start for a different target.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::benchmarks::ForwardModel;
use crate::domain::{rmse, Bounds, EvaluationLedger, EvaluationRecord, TargetCurve};
use crate::error::{Error, Result};
use crate::forest::{ForestModel, ForestParams};
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::sampling::{lhs, SampleMatrix};

/// Observes every ranking decision: `(surrogate, pool, target, n_batch, selected)`.
pub type SelectionHook = Arc<dyn Fn(&ForestModel, &SampleMatrix, &TargetCurve, usize, &SampleMatrix) + Send + Sync>;

#[derive(Clone)]
pub struct AlpsConfig {
    pub n_init: usize,
    pub n_batch: usize,
    /// Candidate pool size per round.
    pub n_s: usize,
    /// Total true-model evaluations.
    pub n_max: usize,
    pub forest: ForestParams,
    pub warm_start: Option<Arc<WarmStart>>,
    pub on_select: Option<SelectionHook>,
}

impl Default for AlpsConfig {
    fn default() -> Self {
        AlpsConfig {
            n_init: 5,
            n_batch: 5,
            n_s: 600,
            n_max: 100,
            forest: ForestParams::default(),
            warm_start: None,
            on_select: None,
        }
    }
}

impl fmt::Debug for AlpsConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlpsConfig")
            .field("n_init", &self.n_init)
            .field("n_batch", &self.n_batch)
            .field("n_s", &self.n_s)
            .field("n_max", &self.n_max)
            .field("forest", &self.forest)
            .field("warm_start", &self.warm_start.is_some())
            .finish()
    }
}

impl AlpsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_init == 0 || self.n_batch == 0 || self.n_s == 0 || self.n_max == 0 {
            return bad("n_init, n_batch, n_s and n_max must all be positive".into());
        }
        if self.n_init > self.n_max {
            return bad(format!("budget {} is smaller than n_init {}", self.n_max, self.n_init));
        }
        if self.n_batch > self.n_s {
            return bad(format!("n_batch {} exceeds pool size {}", self.n_batch, self.n_s));
        }
        if self.warm_start.is_some() && self.n_init > self.n_s {
            return bad(format!("warm start needs n_init {} <= n_s {}", self.n_init, self.n_s));
        }
        self.forest.validate()
    }
}

#[derive(Debug, Clone)]
pub struct AlpsResult {
    pub ledger: EvaluationLedger,
    pub best: EvaluationRecord,
    pub final_surrogate: ForestModel,
    pub bounds: Bounds,
}

/// Pool indices ordered by predicted discrepancy, ties by index, with the
/// predicted discrepancies.
pub fn rank_candidates(surrogate: &ForestModel, candidates: ArrayView2<f64>, target: &TargetCurve) -> Result<Vec<(usize, f64)>> {
    if surrogate.output_dim() != target.len() {
        return Err(Error::dim("surrogate output vs target", target.len(), surrogate.output_dim()));
    }
    let predicted = surrogate.predict(candidates)?;
    let mut scored = predicted
        .axis_iter(Axis(0))
        .enumerate()
        .map(|(i, row)| Ok((i, rmse(row.as_slice().expect("contiguous"), target.values())?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(scored)
}

/// The `n_batch` candidates with the smallest predicted RMSE, best first.
pub fn greedy_select(surrogate: &ForestModel, candidates: &SampleMatrix, target: &TargetCurve, n_batch: usize) -> Result<SampleMatrix> {
    if n_batch == 0 || candidates.nrows() < n_batch {
        return Err(Error::InvalidArgument(format!(
            "cannot select {n_batch} of {} candidates",
            candidates.nrows()
        )));
    }
    let ranked = rank_candidates(surrogate, candidates.view(), target)?;
    let picked: Vec<usize> = ranked.iter().take(n_batch).map(|(i, _)| *i).collect();
    Ok(candidates.select(Axis(0), &picked))
}

/// Runs the search to `config.n_max` evaluations and returns the ledger,
/// its best record and the last surrogate.
pub fn alps_run(target: &TargetCurve, model: &dyn ForwardModel, bounds: &Bounds, config: &AlpsConfig, seed: RngSeed) -> Result<AlpsResult> {
    config.validate()?;
    let mut objective = Objective::new(model, target.clone(), config.n_max)?;
    let final_surrogate = alps_minimize(&mut objective, bounds, config, seed)?;
    let ledger = objective.into_ledger();
    let best = ledger.best().expect("n_max >= 1").clone();
    Ok(AlpsResult {
        ledger,
        best,
        final_surrogate,
        bounds: bounds.clone(),
    })
}

/// Same loop against a caller-owned objective. When the true model fails the
/// error is returned and every evaluation made before it stays in the
/// objective's ledger.
pub fn alps_minimize(objective: &mut Objective<'_>, bounds: &Bounds, config: &AlpsConfig, seed: RngSeed) -> Result<ForestModel> {
    config.validate()?;
    let target = objective.target().clone();
    if bounds.dim() != objective.model().input_dim() {
        return Err(Error::dim("bounds vs model input", objective.model().input_dim(), bounds.dim()));
    }
    let n_max = config.n_max.min(objective.evaluations() + objective.remaining());

    let initial = match &config.warm_start {
        Some(ws) => {
            ws.ensure_compatible(bounds, target.len())?;
            let pool = lhs(config.n_s, bounds, seed.child("warm-pool", 0))?;
            let chosen = greedy_select(&ws.forest, &pool, &target, config.n_init)?;
            if let Some(hook) = &config.on_select {
                hook(&ws.forest, &pool, &target, config.n_init, &chosen);
            }
            chosen
        }
        None => lhs(config.n_init, bounds, seed.child("init", 0))?,
    };
    for row in initial.rows() {
        if objective.evaluations() >= n_max {
            break;
        }
        objective.evaluate(row.as_slice().expect("contiguous"))?;
    }
    let mut surrogate = fit_surrogate(objective.ledger(), &config.forest, seed.child("surrogate", 0))?;

    let mut round = 1u64;
    while objective.evaluations() < n_max {
        let pool = lhs(config.n_s, bounds, seed.child("pool", round))?;
        let batch = greedy_select(&surrogate, &pool, &target, config.n_batch)?;
        if let Some(hook) = &config.on_select {
            hook(&surrogate, &pool, &target, config.n_batch, &batch);
        }
        let take = config.n_batch.min(n_max - objective.evaluations());
        for row in batch.rows().into_iter().take(take) {
            objective.evaluate(row.as_slice().expect("contiguous"))?;
        }
        surrogate = fit_surrogate(objective.ledger(), &config.forest, seed.child("surrogate", round))?;
        round += 1;
    }
    Ok(surrogate)
}

fn fit_surrogate(ledger: &EvaluationLedger, params: &ForestParams, seed: RngSeed) -> Result<ForestModel> {
    let records = ledger.records();
    let n = records.len();
    if n == 0 {
        return Err(Error::EmptyInput("surrogate training set"));
    }
    let m = records[0].design.len();
    let k = records[0].response.len();
    let x = Array2::from_shape_fn((n, m), |(i, j)| records[i].design[j]);
    let y = Array2::from_shape_fn((n, k), |(i, j)| records[i].response[j]);
    ForestModel::fit(x.view(), y.view(), params, seed)
}

const WARM_START_FORMAT: &str = "alps-warm-start";
const WARM_START_VERSION: u32 = 1;

/// A forward surrogate saved from a finished run, used to pick the initial
/// designs of a later run against a different target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    forest: ForestModel,
    bounds: Bounds,
    target_len: usize,
}

#[derive(Serialize, Deserialize)]
struct WarmStartFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: WarmStart,
}

impl WarmStart {
    pub fn new(forest: ForestModel, bounds: Bounds) -> Result<Self> {
        if forest.input_dim() != bounds.dim() {
            return Err(Error::dim("warm-start input", bounds.dim(), forest.input_dim()));
        }
        let target_len = forest.output_dim();
        Ok(WarmStart {
            forest,
            bounds,
            target_len,
        })
    }

    pub fn from_result(result: &AlpsResult) -> Result<Self> {
        WarmStart::new(result.final_surrogate.clone(), result.bounds.clone())
    }

    pub fn forest(&self) -> &ForestModel {
        &self.forest
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.forest.predict(x)
    }

    /// The bounds may differ (e.g. another material); dimensions may not.
    pub fn ensure_compatible(&self, bounds: &Bounds, target_len: usize) -> Result<()> {
        if self.forest.input_dim() != bounds.dim() {
            return Err(Error::dim("warm-start input", bounds.dim(), self.forest.input_dim()));
        }
        if self.target_len != target_len {
            return Err(Error::dim("warm-start output", target_len, self.target_len));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = WarmStartFile {
            format: WARM_START_FORMAT.into(),
            version: WARM_START_VERSION,
            body: self.clone(),
        };
        std::fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: WarmStartFile = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if file.format != WARM_START_FORMAT {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                reason: format!("expected format `{WARM_START_FORMAT}`, found `{}`", file.format),
            });
        }
        if file.version != WARM_START_VERSION {
            return Err(Error::Version {
                kind: "warm start",
                expected: WARM_START_VERSION,
                found: file.version,
            });
        }
        let ws = file.body;
        ws.forest.check()?;
        if ws.forest.output_dim() != ws.target_len || ws.forest.input_dim() != ws.bounds.dim() {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                reason: "warm-start metadata disagrees with the stored forest".into(),
            });
        }
        Ok(ws)
    }
}

pub fn warm_start_export(result: &AlpsResult, path: &Path) -> Result<()> {
    WarmStart::from_result(result)?.save(path)
}

/// Loads a warm-start file and checks it against the bounds it will be used with.
pub fn warm_start_load(path: &Path, bounds: &Bounds) -> Result<WarmStart> {
    let ws = WarmStart::load(path)?;
    if ws.forest.input_dim() != bounds.dim() {
        return Err(Error::dim("warm-start input", bounds.dim(), ws.forest.input_dim()));
    }
    Ok(ws)
}
