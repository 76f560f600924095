//! Minimal network substrate for the CNN soft actor-critic: conv/dense
//! layers with hand-derived backward passes, tanh-Gaussian sampling, Adam,
//! and versioned JSON parameter files. Everything is verifiable against
//! finite differences at 64-bit precision.

mod adam;
mod gaussian;
mod io;
mod layers;
mod tensor;

pub use adam::{adam_step_slice, AdamConfig, AdamState, ScalarAdam};
pub use gaussian::{clamp_log_std, squashed_gaussian_sample, tanh_mean, LOG_STD_MAX, LOG_STD_MIN, TANH_EPS};
pub use io::{load_params, save_params};
pub use layers::{
    backward, forward, init_params, Activation, ForwardCache, Gradients, Layer, NetworkSpec,
    Params,
};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed parameter document: {0}")]
    Malformed(String),
    #[error("unsupported parameter file version {0}")]
    VersionMismatch(u64),
}
