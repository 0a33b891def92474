use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{bce_loss, mse_loss, Matrix, Network, NnError, OptimizerConfig, Vae};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Bce,
    Mse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize, optimizer: OptimizerConfig, seed: u64) -> Self {
        Self {
            epochs,
            batch_size,
            optimizer,
            seed,
        }
    }

    fn validate(&self, rows: usize) -> Result<(), NnError> {
        if rows == 0 {
            return Err(NnError::EmptyDataset);
        }
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch_size must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Mini-batch training of a feed-forward network. Returns the mean batch loss
/// of every epoch; the shuffle order is fully determined by `cfg.seed`.
pub fn train(net: &mut Network, x: &Matrix, y: &Matrix, loss: LossKind, cfg: &TrainConfig) -> Result<Vec<f64>, NnError> {
    cfg.validate(x.rows())?;
    if y.rows() != x.rows() || y.cols() != net.out_dim() {
        return Err(NnError::Shape {
            op: "train",
            expected: (x.rows(), net.out_dim()),
            got: y.shape(),
        });
    }
    let mut opt = cfg.optimizer.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    net.zero_grad();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = x.select_rows(chunk);
            let yb = y.select_rows(chunk);
            let pred = net.forward(&xb)?;
            let (l, grad) = match loss {
                LossKind::Bce => bce_loss(&pred, &yb)?,
                LossKind::Mse => mse_loss(&pred, &yb)?,
            };
            net.backward(&grad)?;
            net.step(opt.as_mut())?;
            total += l;
            batches += 1;
        }
        history.push(total / batches as f64);
    }
    Ok(history)
}

/// Trains a VAE on `x`. Reparameterization noise is drawn from the same seeded
/// stream as the shuffle, so a run is replayable from `cfg.seed`.
pub fn train_vae(vae: &mut Vae, x: &Matrix, cfg: &TrainConfig) -> Result<Vec<f64>, NnError> {
    cfg.validate(x.rows())?;
    let mut opt = cfg.optimizer.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    vae.zero_grad();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = x.select_rows(chunk);
            let noise_data: Vec<f64> = (0..chunk.len() * vae.latent_dim())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let noise = Matrix::from_vec(chunk.len(), vae.latent_dim(), noise_data)?;
            let l = vae.loss_and_backward(&xb, &noise)?;
            vae.step(opt.as_mut())?;
            total += l.total;
            batches += 1;
        }
        history.push(total / batches as f64);
    }
    Ok(history)
}

/// Fraction of rows whose thresholded (0.5) first output equals the label.
pub fn accuracy(net: &Network, x: &Matrix, y: &Matrix) -> Result<f64, NnError> {
    let pred = net.predict(x)?;
    if x.rows() == 0 {
        return Ok(0.0);
    }
    let correct = (0..x.rows())
        .filter(|&r| (pred.get(r, 0) >= 0.5) == (y.get(r, 0) >= 0.5))
        .count();
    Ok(correct as f64 / x.rows() as f64)
}
