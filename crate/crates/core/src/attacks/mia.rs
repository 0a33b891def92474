//! Membership inference by reconstruction error: a VAE overfit on the
//! training pool reconstructs members more accurately than non-members.

use serde::{Deserialize, Serialize};

use super::metrics::{auc, percentile, roc_curve};
use super::{AttackError, AttackKind, AttackReport};
use crate::nn::{train_vae, Matrix, OptimizerConfig, TrainConfig, Vae};
use crate::synthdata::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiaConfig {
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta: f64,
    /// Percentile of the *training* error distribution used as threshold.
    pub threshold_percentile: f64,
    pub seed: u64,
}

impl Default for MiaConfig {
    fn default() -> Self {
        Self {
            latent_dim: 2,
            hidden_dim: 8,
            epochs: 2000,
            batch_size: 64,
            learning_rate: 0.01,
            beta: crate::nn::DEFAULT_BETA,
            threshold_percentile: 95.0,
            seed: 0,
        }
    }
}

impl MiaConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        if !(self.threshold_percentile > 0.0 && self.threshold_percentile < 100.0) {
            return Err(AttackError::InvalidConfig(format!(
                "threshold_percentile {} outside (0, 100)",
                self.threshold_percentile
            )));
        }
        if self.epochs == 0 || self.latent_dim == 0 || self.hidden_dim == 0 || self.batch_size == 0 {
            return Err(AttackError::InvalidConfig(
                "epochs, latent_dim, hidden_dim and batch_size must be ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// Result of thresholding: member iff error < τ.
pub fn predict_member(error: f64, threshold: f64) -> bool {
    error < threshold
}

/// Trains a VAE on the identity view of `train` and scores every record of
/// `train ∪ holdout` by its reconstruction error.
pub fn mia_run(train: &Dataset, holdout: &Dataset, cfg: &MiaConfig) -> Result<AttackReport, AttackError> {
    mia_run_on(&train.identity_view(), &holdout.identity_view(), cfg)
}

/// Same attack over caller-prepared feature matrices.
pub fn mia_run_on(train_x: &Matrix, holdout_x: &Matrix, cfg: &MiaConfig) -> Result<AttackReport, AttackError> {
    cfg.validate()?;
    if train_x.rows() == 0 || holdout_x.rows() == 0 {
        return Err(AttackError::EmptyInput("membership pools"));
    }
    let mut vae = Vae::new(train_x.cols(), cfg.hidden_dim, cfg.latent_dim, cfg.seed)?.with_beta(cfg.beta);
    let tc = TrainConfig::new(
        cfg.epochs,
        cfg.batch_size,
        OptimizerConfig::adam(cfg.learning_rate),
        cfg.seed.wrapping_add(1),
    );
    let history = train_vae(&mut vae, train_x, &tc)?;

    let member_err = vae.reconstruction_errors(train_x)?;
    let other_err = vae.reconstruction_errors(holdout_x)?;
    let threshold = percentile(&member_err, cfg.threshold_percentile);

    let scores: Vec<f64> = member_err.iter().chain(&other_err).copied().collect();
    let labels: Vec<bool> = std::iter::repeat(true)
        .take(member_err.len())
        .chain(std::iter::repeat(false).take(other_err.len()))
        .collect();

    let mut report = AttackReport::new(AttackKind::Mia, cfg, cfg.seed);
    let degenerate = scores.windows(2).all(|w| w[0] == w[1]);
    let area = if degenerate {
        report.flag("all reconstruction errors equal; AUC reported as 0.5");
        0.5
    } else {
        auc(&scores, &labels)?
    };
    let tpr = member_err.iter().filter(|&&e| predict_member(e, threshold)).count() as f64 / member_err.len() as f64;
    let fpr = other_err.iter().filter(|&&e| predict_member(e, threshold)).count() as f64 / other_err.len() as f64;

    report.set_metric("auc", area);
    report.set_metric("advantage", tpr - fpr);
    report.set_metric("tpr", tpr);
    report.set_metric("fpr", fpr);
    report.set_metric("threshold", threshold);
    report.set_metric("mean_member_error", mean(&member_err));
    report.set_metric("mean_nonmember_error", mean(&other_err));
    report.set_metric("final_train_loss", history.last().copied().unwrap_or(0.0));
    if !degenerate {
        report.artifacts.roc = Some(roc_curve(&scores, &labels)?);
    }
    report.artifacts.loss_trace = Some(history);
    report.finish()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}
