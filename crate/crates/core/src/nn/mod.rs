//! Minimal dense neural-network engine: matrices, feed-forward networks with
//! reverse-mode gradients, BCE/MSE losses, SGD/Adam, a small VAE, a seeded
//! training loop and bit-exact checkpoints.

mod checkpoint;
mod loss;
mod matrix;
mod network;
mod optim;
mod train;
mod vae;

pub use checkpoint::{load_network, load_vae, network_from_json, network_to_json, save_network, save_vae, vae_from_json, vae_to_json};
pub use loss::{bce_loss, mse_loss, BCE_CLAMP};
pub use matrix::Matrix;
pub use network::{logit, sigmoid, Activation, Dense, Gradients, LayerSpec, Network, Trace};
pub use optim::{sgd_step, Adam, AdamState, Optimizer, OptimizerConfig, Sgd};
pub use train::{accuracy, train, train_vae, LossKind, TrainConfig};
pub use vae::{Vae, VaeLoss, DEFAULT_BETA};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {op}: expected {expected:?}, got {got:?}")]
    Shape {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("backward called before forward")]
    NoForwardPass,
    #[error("non-finite gradient at parameter index {index}")]
    NonFiniteGradient { index: usize },
    #[error("non-finite parameter at index {index} after optimizer step")]
    NonFiniteParameter { index: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
