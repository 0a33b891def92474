//! The small feed-forward classifier shared by the poisoning, inversion and
//! property experiments.

use serde::{Deserialize, Serialize};

use crate::nn::{train, Activation, LossKind, Matrix, Network, NnError, OptimizerConfig, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden: 8,
            epochs: 60,
            batch_size: 32,
            learning_rate: 0.01,
        }
    }
}

impl ClassifierConfig {
    /// `in → hidden (relu) → 1 (sigmoid)` with Glorot init from `init_seed`.
    pub fn build(&self, in_dim: usize, init_seed: u64) -> Result<Network, NnError> {
        Network::mlp(&[in_dim, self.hidden, 1], Activation::Relu, Activation::Sigmoid, init_seed)
    }

    /// Builds and trains with BCE; returns the network and its loss history.
    pub fn fit(&self, x: &Matrix, y: &Matrix, init_seed: u64, train_seed: u64) -> Result<(Network, Vec<f64>), NnError> {
        let mut net = self.build(x.cols(), init_seed)?;
        let tc = TrainConfig::new(
            self.epochs,
            self.batch_size,
            OptimizerConfig::adam(self.learning_rate),
            train_seed,
        );
        let history = train(&mut net, x, y, LossKind::Bce, &tc)?;
        Ok((net, history))
    }
}
