//! Soft actor-critic over the depth-image observation: replay buffer, twin
//! critics with target networks, a tanh-Gaussian actor and the training and
//! evaluation loops.

mod loops;
mod replay;
mod sac;

pub use loops::{
    evaluate, evaluate_policy, train, EvalReport, TrainRow, TrainingLog, TRAIN_LOG_HEADER,
};
pub use replay::{ReplayBuffer, StoredObs, StoredTransition};
pub use sac::{
    critic_target, deterministic_action, polyak_update, select_action, update_step, FeatureNet,
    Losses, SacConfig, SacState, ACTION_DIM,
};

use thiserror::Error;

use crate::env::EnvError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("replay buffer holds {have} transitions, batch needs {need}")]
    BufferTooSmall { have: usize, need: usize },
    #[error("no initial conditions to train on")]
    NoInitialConditions,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
}
