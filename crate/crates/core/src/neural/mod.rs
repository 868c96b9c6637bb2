//! Policy/value networks and the PPO learner.

pub mod buffer;
pub mod checkpoint;
pub mod dist;
pub mod gae;
pub mod net;
pub mod ppo;

use thiserror::Error;

pub use buffer::RolloutBuffer;
pub use checkpoint::{load_params, save_params, ParamsFile};
pub use dist::{log_softmax, sample, softmax};
pub use gae::gae;
pub use net::{loss_and_grad, Batch, InitGains, LossCoefs, LossParts, NetParams};
pub use ppo::{ppo_update, Adam, Experience, PolicyNet, PpoHyper, UpdateStats};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(
        "non-finite loss in epoch {epoch} (policy {policy_loss}, value {value_loss}, entropy {entropy})"
    )]
    NonFinite { epoch: usize, policy_loss: f64, value_loss: f64, entropy: f64 },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
