//! Surrogate-assisted inverse design with a random-forest forward model.

pub mod baselines;
pub mod benchmarks;
pub mod domain;
pub mod error;
pub mod forest;
pub mod harness;
pub mod objective;
pub mod pca;
pub mod rng;
pub mod sampling;
pub mod search;

pub use domain::{best_so_far_trace, rmse, Bounds, ConvergenceTrace, DesignVector, EvaluationLedger, EvaluationRecord, TargetCurve};
pub use error::{Error, Result};
pub use forest::{ForestModel, ForestParams};
pub use objective::Objective;
pub use pca::PcaModel;
pub use rng::RngSeed;
pub use search::{alps_run, greedy_select, AlpsConfig, AlpsResult, WarmStart};
