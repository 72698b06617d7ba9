//! Deterministic synthetic benchmarks and column standardization.

mod lorenz;
mod motivation;
mod ode;
mod rectangles;
mod standardize;

pub use lorenz::{gen_lorenz, lorenz_hessians, LorenzParams};
pub use motivation::{
    gen_motivation, gen_motivation_noisy, motivation_fn, motivation_hessian, MOTIVATION_RANGE,
};
pub use ode::{integrate, rk4_step};
pub use rectangles::{gen_rectangles, polar_moment, rectangle_moment, RectangleParams, J_SCALE};
pub use standardize::{standardize, StandardizationParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::lim::HessianOracle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatagenError {
    #[error("column {0} is constant")]
    ConstantColumn(String),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// A generator and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Motivation { n_samples: usize },
    MotivationNoisy { n_samples: usize, noise_std: f64 },
    Lorenz(LorenzParams),
    Rectangles {
        n_samples: usize,
        #[serde(flatten)]
        params: RectangleParams,
    },
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Motivation { .. } => "motivation",
            Self::MotivationNoisy { .. } => "motivation-noisy",
            Self::Lorenz(_) => "lorenz",
            Self::Rectangles { .. } => "rectangles",
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset, DatagenError> {
        match self {
            Self::Motivation { n_samples } => Ok(gen_motivation(*n_samples, seed)),
            Self::MotivationNoisy {
                n_samples,
                noise_std,
            } => gen_motivation_noisy(*n_samples, *noise_std, seed),
            Self::Lorenz(p) => gen_lorenz(p, seed),
            Self::Rectangles { n_samples, params } => gen_rectangles(*n_samples, params, seed),
        }
    }

    /// Hessian-norm oracle of the noise-free target, in the coordinates
    /// described by `params` (raw units when `None`).
    pub fn oracle(&self, params: Option<&StandardizationParams>) -> HessianOracle {
        match self {
            Self::Motivation { .. } | Self::MotivationNoisy { .. } => {
                let params = params.cloned();
                HessianOracle::analytic(move |x| {
                    let raw = match &params {
                        Some(p) => p.raw_features(x),
                        None => x.to_vec(),
                    };
                    scaled_frobenius(&[motivation_hessian(&raw)], 2, params.as_ref())
                })
            }
            Self::Lorenz(_) => {
                let h: Vec<Vec<f64>> = lorenz_hessians().iter().map(|m| m.to_vec()).collect();
                HessianOracle::Constant(scaled_frobenius(&h, 3, params))
            }
            Self::Rectangles { params: rp, .. } => {
                let centroid = rp.centroid;
                let params = params.cloned();
                HessianOracle::finite_difference(move |x| {
                    let raw = match &params {
                        Some(p) => p.raw_features(x),
                        None => x.to_vec(),
                    };
                    let y = [rectangle_moment(&raw, centroid) / J_SCALE];
                    match &params {
                        Some(p) => p.scaled_labels(&y),
                        None => y.to_vec(),
                    }
                })
                // corners span hundreds of pixels; keep the step well above
                // round-off in raw units
                .with_step(1e-2)
            }
        }
    }
}

/// Frobenius norm of raw per-output Hessians after the change of variables
/// `x = mu + s x'`, `y' = (y - mu_l) / s_l`.
fn scaled_frobenius(
    hessians: &[Vec<f64>],
    n: usize,
    params: Option<&StandardizationParams>,
) -> f64 {
    let mut sum = 0.0;
    for (o, h) in hessians.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let v = match params {
                    Some(p) => {
                        h[i * n + j] * p.feature_std[i] * p.feature_std[j] / p.label_std[o]
                    }
                    None => h[i * n + j],
                };
                sum += v * v;
            }
        }
    }
    sum.sqrt()
}
