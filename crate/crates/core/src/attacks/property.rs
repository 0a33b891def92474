//! Property inference with shadow models: estimate the positive-label
//! fraction of a target's training set from its mean output on a probe grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::ClassifierConfig;
use super::{AttackError, AttackKind, AttackReport};
use crate::nn::{Matrix, Network};
use crate::synthdata::{generate, Dataset, Record};

/// Prevalences the shadow datasets cycle through.
pub const SHADOW_PREVALENCES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyConfig {
    pub shadow_count: usize,
    /// Lattice points per axis of the probe grid.
    pub grid_size: usize,
    pub train_size: usize,
    pub pool_size: usize,
    pub model: ClassifierConfig,
    pub seed: u64,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            shadow_count: 16,
            grid_size: 5,
            train_size: 400,
            pool_size: 4000,
            model: ClassifierConfig::default(),
            seed: 0,
        }
    }
}

/// `k × k` lattice over normalized (age, income), once per gender.
pub fn probe_grid(k: usize) -> Matrix {
    let step = |i: usize| if k == 1 { 0.5 } else { i as f64 / (k - 1) as f64 };
    let mut rows = Vec::with_capacity(2 * k * k);
    for g in [0.0, 1.0] {
        for i in 0..k {
            for j in 0..k {
                rows.push([step(i), step(j), g]);
            }
        }
    }
    Matrix::from_rows(&rows)
}

/// Mean model output over `grid`.
pub fn probe_statistic(net: &Network, grid: &Matrix) -> Result<f64, AttackError> {
    Ok(net.predict(grid)?.mean())
}

/// `n` records drawn with replacement from `pool`, exactly `round(p·n)` of
/// them positive.
pub fn prevalence_dataset(pool: &Dataset, p: f64, n: usize, seed: u64) -> Result<Dataset, AttackError> {
    if !(0.0..=1.0).contains(&p) || n == 0 {
        return Err(AttackError::InvalidConfig(format!("prevalence {p} / size {n} invalid")));
    }
    let (pos, neg): (Vec<&Record>, Vec<&Record>) = pool.records.iter().partition(|r| r.condition == 1);
    let n_pos = (p * n as f64).round() as usize;
    if (n_pos > 0 && pos.is_empty()) || (n_pos < n && neg.is_empty()) {
        return Err(AttackError::EmptyInput("pool lacks one label class"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let from = if i < n_pos { &pos } else { &neg };
        records.push(from[rng.gen_range(0..from.len())].clone());
    }
    Ok(Dataset {
        records,
        bounds: pool.bounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shadow {
    pub prevalence: f64,
    pub statistic: f64,
}

/// Least-squares calibration `p ≈ α·s + β` fitted on shadow models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyEstimator {
    pub shadows: Vec<Shadow>,
    pub alpha: f64,
    pub beta: f64,
    /// All shadow statistics equal: the slope is undefined and estimates
    /// fall back to the mean shadow prevalence.
    pub degenerate: bool,
}

impl PropertyEstimator {
    pub fn from_shadows(shadows: Vec<Shadow>) -> Result<Self, AttackError> {
        if shadows.is_empty() {
            return Err(AttackError::EmptyInput("shadow models"));
        }
        let n = shadows.len() as f64;
        let ms = shadows.iter().map(|s| s.statistic).sum::<f64>() / n;
        let mp = shadows.iter().map(|s| s.prevalence).sum::<f64>() / n;
        let sxx: f64 = shadows.iter().map(|s| (s.statistic - ms).powi(2)).sum();
        let sxy: f64 = shadows.iter().map(|s| (s.statistic - ms) * (s.prevalence - mp)).sum();
        let degenerate = sxx == 0.0;
        let alpha = if degenerate { 0.0 } else { sxy / sxx };
        Ok(Self {
            alpha,
            beta: mp - alpha * ms,
            degenerate,
            shadows,
        })
    }

    /// Trains `cfg.shadow_count` shadows on attacker-generated data.
    pub fn fit(cfg: &PropertyConfig) -> Result<Self, AttackError> {
        Self::fit_with(cfg, Ok)
    }

    /// As [`fit`](Self::fit), passing every shadow training set through
    /// `prep` first.
    pub fn fit_with(
        cfg: &PropertyConfig,
        prep: impl Fn(Dataset) -> Result<Dataset, AttackError>,
    ) -> Result<Self, AttackError> {
        if cfg.shadow_count == 0 || cfg.grid_size == 0 {
            return Err(AttackError::InvalidConfig("shadow_count and grid_size must be ≥ 1".into()));
        }
        let pool = generate(cfg.pool_size, cfg.seed ^ 0x5ead_0000)?;
        let grid = probe_grid(cfg.grid_size);
        let mut shadows = Vec::with_capacity(cfg.shadow_count);
        for i in 0..cfg.shadow_count {
            let p = SHADOW_PREVALENCES[i % SHADOW_PREVALENCES.len()];
            let s = cfg.seed.wrapping_mul(1000).wrapping_add(i as u64);
            let ds = prep(prevalence_dataset(&pool, p, cfg.train_size, s)?)?;
            let net = train_property_model(&ds, &cfg.model, s)?;
            shadows.push(Shadow {
                prevalence: p,
                statistic: probe_statistic(&net, &grid)?,
            });
        }
        Self::from_shadows(shadows)
    }

    /// Clamped estimate of the prevalence behind statistic `s`.
    pub fn estimate(&self, s: f64) -> f64 {
        (self.alpha * s + self.beta).clamp(0.0, 1.0)
    }
}

/// The training procedure the attacker assumes for the target.
pub fn train_property_model(ds: &Dataset, model: &ClassifierConfig, seed: u64) -> Result<Network, AttackError> {
    let (net, _) = model.fit(&ds.feature_view(), &ds.label_view(), seed, seed.wrapping_add(1))?;
    Ok(net)
}

/// Scores `target` with an already fitted estimator.
pub fn property_attack(
    estimator: &PropertyEstimator,
    target: &Network,
    p_true: f64,
    cfg: &PropertyConfig,
) -> Result<AttackReport, AttackError> {
    let s = probe_statistic(target, &probe_grid(cfg.grid_size))?;
    let estimate = estimator.estimate(s);
    let mut report = AttackReport::new(AttackKind::Property, cfg, cfg.seed);
    if estimator.degenerate {
        report.flag("all shadow statistics equal; estimator undefined");
    }
    report.set_metric("property_estimate", estimate);
    report.set_metric("property_mae", (estimate - p_true).abs());
    report.set_metric("property_true", p_true);
    report.set_metric("target_statistic", s);
    report.set_metric("alpha", estimator.alpha);
    report.set_metric("beta", estimator.beta);
    report.finish()
}

/// Fits shadows and estimates the positive fraction behind `target`.
pub fn property_run(target: &Network, p_true: f64, cfg: &PropertyConfig) -> Result<AttackReport, AttackError> {
    let estimator = PropertyEstimator::fit(cfg)?;
    property_attack(&estimator, target, p_true, cfg)
}

/// Harness side: a target trained on a pool the attacker never sees.
pub fn train_property_target(p: f64, cfg: &PropertyConfig, target_seed: u64) -> Result<Network, AttackError> {
    train_property_target_with(p, cfg, target_seed, Ok)
}

/// As [`train_property_target`], with the training set passed through `prep`.
pub fn train_property_target_with(
    p: f64,
    cfg: &PropertyConfig,
    target_seed: u64,
    prep: impl Fn(Dataset) -> Result<Dataset, AttackError>,
) -> Result<Network, AttackError> {
    let pool = generate(cfg.pool_size, target_seed ^ 0x7a49_0000)?;
    let ds = prep(prevalence_dataset(&pool, p, cfg.train_size, target_seed)?)?;
    train_property_model(&ds, &cfg.model, target_seed.wrapping_add(77))
}
