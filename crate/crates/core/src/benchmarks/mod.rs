//! Forward models and target generators.

mod rfpca;
mod synthetic;
mod targets;

use serde::{Deserialize, Serialize};

use crate::domain::Bounds;
use crate::error::Result;

pub use rfpca::{
    load_dataset, rfpca_train, synthetic_emissivity_dataset, EmissivityDataset, RfPcaModel, TrainOptions, TrainReport,
    DATASET_PARAM_COLUMNS,
};
pub use synthetic::{
    linspace, LogisticModel, SinusoidModel, LOGISTIC_DEFAULT_TRUE, SINUSOID_DEFAULT_TRUE,
};
pub use targets::{
    inconel_bounds, make_target, near_perfect_target, read_target_csv, stainless_bounds, step_target,
    wavelength_grid, write_target_csv, TPV_CUTOFF_UM,
};

/// A deterministic map from a design vector to an `output_dim` response.
pub trait ForwardModel: Send + Sync {
    fn name(&self) -> &str;

    fn bounds(&self) -> &Bounds;

    fn output_dim(&self) -> usize;

    fn input_dim(&self) -> usize {
        self.bounds().dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// What a model does with a design outside its bounds box.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutOfBounds {
    /// Reject with [`Error::OutOfBounds`](crate::Error::OutOfBounds).
    #[default]
    Strict,
    /// Project onto the box, then evaluate.
    Clip,
}

impl OutOfBounds {
    pub(crate) fn apply(self, bounds: &Bounds, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            OutOfBounds::Strict => {
                bounds.check(x)?;
                Ok(x.to_vec())
            }
            OutOfBounds::Clip => {
                if x.len() != bounds.dim() {
                    bounds.check(x)?;
                }
                Ok(bounds.clip(x))
            }
        }
    }
}

type ResponseFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Wraps a closure as a forward model, e.g. for analytic test objectives.
pub struct FnModel {
    name: String,
    bounds: Bounds,
    output_dim: usize,
    f: Box<ResponseFn>,
}

impl FnModel {
    pub fn new<F>(name: impl Into<String>, bounds: Bounds, output_dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        FnModel {
            name: name.into(),
            bounds,
            output_dim,
            f: Box::new(f),
        }
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel").field("name", &self.name).field("bounds", &self.bounds).finish()
    }
}

impl ForwardModel for FnModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.bounds.check(x)?;
        let y = (self.f)(x);
        if y.len() != self.output_dim {
            return Err(crate::Error::dim("FnModel response", self.output_dim, y.len()));
        }
        Ok(y)
    }
}
