//! Repeated-trial campaigns, sweeps and their file outputs.

mod plot;
mod stats;

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    bo_minimize_with, de_minimize_with, nelder_mead, pso_minimize_with, random_search, BoParams, DeParams, PsoParams,
};
use crate::benchmarks::{
    make_target, near_perfect_target, read_target_csv, step_target, ForwardModel, LogisticModel, OutOfBounds, RfPcaModel,
    SinusoidModel, LOGISTIC_DEFAULT_TRUE, SINUSOID_DEFAULT_TRUE, TPV_CUTOFF_UM,
};
use crate::domain::{best_so_far_trace, ConvergenceTrace, TargetCurve};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::objective::Objective;
use crate::rng::RngSeed;
use crate::search::{alps_run, AlpsConfig, AlpsResult, WarmStart};

pub use plot::{plot_convergence, render_convergence_svg, LOG_FLOOR};
pub use stats::{final_values, percentiles, welch_t_test, FinalStats, StatsSummary, WelchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Alps,
    Random,
    Pso,
    De,
    #[serde(alias = "nm")]
    NelderMead,
    Bo,
}

impl Optimizer {
    pub const ALL: [Optimizer; 6] = [
        Optimizer::Alps,
        Optimizer::Random,
        Optimizer::Pso,
        Optimizer::De,
        Optimizer::NelderMead,
        Optimizer::Bo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Alps => "alps",
            Optimizer::Random => "random",
            Optimizer::Pso => "pso",
            Optimizer::De => "de",
            Optimizer::NelderMead => "nelder_mead",
            Optimizer::Bo => "bo",
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "nm" => Ok(Optimizer::NelderMead),
            _ => Optimizer::ALL
                .into_iter()
                .find(|o| o.name() == key)
                .ok_or_else(|| Error::Config(format!("unknown optimizer `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlpsSettings {
    pub n_init: usize,
    pub n_batch: usize,
    pub n_s: usize,
    pub forest: ForestParams,
    /// Surrogate file used to pick every trial's initial designs.
    pub warm_start: Option<PathBuf>,
    /// Where to save trial 0's final surrogate.
    pub export_warm_start: Option<PathBuf>,
}

impl Default for AlpsSettings {
    fn default() -> Self {
        let d = AlpsConfig::default();
        AlpsSettings {
            n_init: d.n_init,
            n_batch: d.n_batch,
            n_s: d.n_s,
            forest: d.forest,
            warm_start: None,
            export_warm_start: None,
        }
    }
}

/// `sinusoid` and `logistic` take an optional `x_true`; `rfpca` needs a
/// saved `model` and a `target` of `tpv`, `near_perfect`, or a `target_file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub name: String,
    pub x_true: Option<Vec<f64>>,
    pub model: Option<PathBuf>,
    pub target: Option<String>,
    pub target_file: Option<PathBuf>,
    pub out_of_bounds: OutOfBounds,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            name: "sinusoid".into(),
            x_true: None,
            model: None,
            target: None,
            target_file: None,
            out_of_bounds: OutOfBounds::Strict,
        }
    }
}

impl BenchmarkSpec {
    pub fn named(name: &str) -> Self {
        BenchmarkSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<(Arc<dyn ForwardModel>, TargetCurve)> {
        let (model, default_true): (Arc<dyn ForwardModel>, Option<&[f64]>) = match self.name.as_str() {
            "sinusoid" => (Arc::new(SinusoidModel::new(self.out_of_bounds)), Some(&SINUSOID_DEFAULT_TRUE)),
            "logistic" => (Arc::new(LogisticModel::new(self.out_of_bounds)), Some(&LOGISTIC_DEFAULT_TRUE)),
            "rfpca" => {
                let path = self
                    .model
                    .as_ref()
                    .ok_or_else(|| Error::Config("benchmark `rfpca` needs `model`".into()))?;
                (Arc::new(RfPcaModel::load(path)?.with_policy(OutOfBounds::Clip)), None)
            }
            other => return Err(Error::Config(format!("unknown benchmark `{other}`"))),
        };
        let target = if let Some(path) = &self.target_file {
            read_target_csv(fs::File::open(path)?)?
        } else if let Some(kind) = &self.target {
            match kind.as_str() {
                "near_perfect" => near_perfect_target(model.output_dim())?,
                "tpv" => {
                    let grid = match model_wavelengths(&self.name, self.model.as_deref())? {
                        Some(g) => g,
                        None => return Err(Error::Config("target `tpv` needs a model with a wavelength grid".into())),
                    };
                    step_target(&grid, TPV_CUTOFF_UM)?
                }
                other => return Err(Error::Config(format!("unknown target `{other}`"))),
            }
        } else {
            let x = self.x_true.as_deref().or(default_true).ok_or_else(|| {
                Error::Config(format!("benchmark `{}` needs `x_true`, `target` or `target_file`", self.name))
            })?;
            make_target(model.as_ref(), x)?
        };
        if target.len() != model.output_dim() {
            return Err(Error::dim("target length vs model output", model.output_dim(), target.len()));
        }
        Ok((model, target))
    }
}

fn model_wavelengths(name: &str, path: Option<&Path>) -> Result<Option<Vec<f64>>> {
    match (name, path) {
        ("rfpca", Some(p)) => Ok(Some(RfPcaModel::load(p)?.wavelengths().to_vec())),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub optimizer: Optimizer,
    pub benchmark: BenchmarkSpec,
    pub trials: usize,
    /// True-model evaluations per trial.
    pub budget: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    pub parallelism: usize,
    pub alps: AlpsSettings,
    pub pso: PsoParams,
    pub de: DeParams,
    pub bo: BoParams,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            optimizer: Optimizer::Alps,
            benchmark: BenchmarkSpec::default(),
            trials: 100,
            budget: 100,
            seed: 0,
            out: None,
            parallelism: 0,
            alps: AlpsSettings::default(),
            pso: PsoParams::default(),
            de: DeParams::default(),
            bo: BoParams::default(),
        }
    }
}

impl CampaignConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: CampaignConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if !matches!(self.benchmark.name.as_str(), "sinusoid" | "logistic" | "rfpca") {
            return Err(Error::Config(format!("unknown benchmark `{}`", self.benchmark.name)));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.optimizer.name().to_string()
    }

    fn alps_config(&self, warm_start: Option<Arc<WarmStart>>) -> AlpsConfig {
        AlpsConfig {
            n_init: self.alps.n_init,
            n_batch: self.alps.n_batch,
            n_s: self.alps.n_s,
            n_max: self.budget,
            forest: self.alps.forest.clone(),
            warm_start,
            on_select: None,
        }
    }

    fn threads(&self) -> usize {
        match self.parallelism {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub traces: Vec<ConvergenceTrace>,
    pub summary: StatsSummary,
}

/// One seeded trial of any optimizer. ALPS also hands back its full result.
pub fn run_trial(
    config: &CampaignConfig,
    model: &dyn ForwardModel,
    target: &TargetCurve,
    warm_start: Option<Arc<WarmStart>>,
    seed: RngSeed,
) -> Result<(ConvergenceTrace, Option<AlpsResult>)> {
    let bounds = model.bounds();
    let budget = config.budget;
    if config.optimizer == Optimizer::Alps {
        let result = alps_run(target, model, bounds, &config.alps_config(warm_start), seed)?;
        return Ok((best_so_far_trace(&result.ledger)?, Some(result)));
    }
    let mut objective = Objective::new(model, target.clone(), budget)?;
    let trace = match config.optimizer {
        Optimizer::Random => random_search(&mut objective, bounds, budget, seed)?,
        Optimizer::Pso => pso_minimize_with(&mut objective, bounds, budget, seed, &config.pso)?,
        Optimizer::De => de_minimize_with(&mut objective, bounds, budget, seed, &config.de)?,
        Optimizer::NelderMead => nelder_mead(&mut objective, bounds, budget, seed)?,
        Optimizer::Bo => bo_minimize_with(&mut objective, bounds, budget, seed, &config.bo)?,
        Optimizer::Alps => unreachable!(),
    };
    Ok((trace, None))
}

/// Runs the campaign's benchmark and writes artifacts when `config.out` is set.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let (model, target) = config.benchmark.build()?;
    run_campaign_with(config, model.as_ref(), &target)
}

/// Same as [`run_campaign`] against a caller-supplied model and target.
pub fn run_campaign_with(config: &CampaignConfig, model: &dyn ForwardModel, target: &TargetCurve) -> Result<CampaignResult> {
    config.validate()?;
    if let Some(out) = &config.out {
        fs::create_dir_all(out)?;
    }
    let warm_start = match (&config.alps.warm_start, config.optimizer) {
        (Some(path), Optimizer::Alps) => {
            let ws = WarmStart::load(path)?;
            ws.ensure_compatible(model.bounds(), target.len())?;
            Some(Arc::new(ws))
        }
        _ => None,
    };
    let master = RngSeed(config.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<(ConvergenceTrace, Option<AlpsResult>)> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let keep = t == 0 && config.alps.export_warm_start.is_some();
                let (trace, alps) = run_trial(config, model, target, warm_start.clone(), master.child("trial", t as u64))?;
                Ok((trace, if keep { alps } else { None }))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    if let (Some(path), Some((_, Some(first)))) = (&config.alps.export_warm_start, outcomes.first()) {
        WarmStart::from_result(first)?.save(path)?;
    }
    let traces: Vec<ConvergenceTrace> = outcomes.into_iter().map(|(t, _)| t).collect();
    let summary = StatsSummary::from_traces(config.label(), &traces)?;
    let result = CampaignResult {
        config: config.clone(),
        traces,
        summary,
    };
    if let Some(out) = &config.out {
        write_artifacts(&result, out)?;
    }
    Ok(result)
}

#[derive(Serialize, Deserialize)]
struct SummaryFile {
    #[serde(flatten)]
    summary: StatsSummary,
    budget: usize,
    config: CampaignConfig,
}

/// `traces.csv`, `summary.json` and `convergence.svg` in `dir`.
pub fn write_artifacts(result: &CampaignResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_traces_csv(&result.traces, fs::File::create(dir.join("traces.csv"))?)?;
    let file = SummaryFile {
        summary: result.summary.clone(),
        budget: result.config.budget,
        config: result.config.clone(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&file)?)?;
    plot_convergence(std::slice::from_ref(&result.summary), &dir.join("convergence.svg"))
}

/// Columns `trial,eval_index,best_eps`; `eval_index` counts from 1.
pub fn write_traces_csv<W: Write>(traces: &[ConvergenceTrace], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "trial,eval_index,best_eps")?;
    for (t, trace) in traces.iter().enumerate() {
        for (i, v) in trace.values().iter().enumerate() {
            writeln!(w, "{t},{},{v}", i + 1)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_summary(path: &Path) -> Result<StatsSummary> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub n_batch: Vec<usize>,
    pub n_s: Vec<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            n_batch: vec![1, 5, 10, 20],
            n_s: vec![300, 600, 1200],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub n_batch: usize,
    pub n_s: usize,
    pub summary: StatsSummary,
}

/// The ALPS campaign at every `(n_batch, n_s)` pair. Every cell reuses the
/// base seed, so a cell equals the same campaign run on its own. With an
/// output directory each cell writes its artifacts to `b{n_batch}_s{n_s}/`
/// and the table goes to `sweep.csv`.
pub fn run_sweep(base: &CampaignConfig, grid: &SweepGrid) -> Result<Vec<SweepCell>> {
    if base.optimizer != Optimizer::Alps {
        return Err(Error::Config("sweeps vary ALPS settings; set optimizer = \"alps\"".into()));
    }
    if grid.n_batch.is_empty() || grid.n_s.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    base.validate()?;
    let (model, target) = base.benchmark.build()?;
    let mut cells = Vec::new();
    for &n_batch in &grid.n_batch {
        for &n_s in &grid.n_s {
            let mut cfg = base.clone();
            cfg.alps.n_batch = n_batch;
            cfg.alps.n_s = n_s;
            cfg.alps.export_warm_start = None;
            cfg.out = base.out.as_ref().map(|o| o.join(format!("b{n_batch}_s{n_s}")));
            let r = run_campaign_with(&cfg, model.as_ref(), &target)?;
            cells.push(SweepCell {
                n_batch,
                n_s,
                summary: r.summary,
            });
        }
    }
    if let Some(out) = &base.out {
        write_sweep_csv(&cells, fs::File::create(out.join("sweep.csv"))?)?;
    }
    Ok(cells)
}

/// One row per cell: `n_batch,n_s,mean,std,min,max` of the final error.
pub fn write_sweep_csv<W: Write>(cells: &[SweepCell], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "n_batch,n_s,mean,std,min,max")?;
    for c in cells {
        let f = &c.summary.final_stats;
        writeln!(w, "{},{},{},{},{},{}", c.n_batch, c.n_s, f.mean, f.std, f.min, f.max)?;
    }
    w.flush()?;
    Ok(())
}
