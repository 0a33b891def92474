//! Label-flip plus feature-noise poisoning of a fraction of training records.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::classifier::ClassifierConfig;
use super::{AttackError, AttackKind, AttackReport};
use crate::nn::accuracy;
use crate::synthdata::{split, Dataset, AGE_RANGE};

/// A poisoned copy of a dataset and the positions that were altered.
#[derive(Clone, Debug, PartialEq)]
pub struct Poisoned {
    pub dataset: Dataset,
    pub poisoned_indices: Vec<usize>,
}

/// Flips the label of `floor(rate·N)` seeded-chosen records and adds
/// Gaussian noise to their normalized age and income (clamped to [0,1]).
/// Ages are stored in whole years, so the noisy age is rounded.
pub fn poison(ds: &Dataset, rate: f64, noise_std: f64, seed: u64) -> Result<Poisoned, AttackError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(AttackError::InvalidConfig(format!("poison rate {rate} outside [0, 1]")));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(AttackError::InvalidConfig(format!("noise_std {noise_std} must be ≥ 0")));
    }
    let n = ds.len();
    let count = (rate * n as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut chosen = order[..count].to_vec();
    chosen.sort_unstable();

    let noise = Normal::new(0.0, noise_std).expect("validated std");
    let mut out = ds.clone();
    let (a0, a1) = ds.bounds.age;
    let (i0, i1) = ds.bounds.income;
    for &i in &chosen {
        let [age_n, income_n, _] = ds.features_of(&ds.records[i]);
        let age_n = (age_n + noise.sample(&mut rng)).clamp(0.0, 1.0);
        let income_n = (income_n + noise.sample(&mut rng)).clamp(0.0, 1.0);
        let r = &mut out.records[i];
        r.condition = 1 - r.condition;
        r.age = ((age_n * (a1 - a0) + a0).round() as u32).clamp(AGE_RANGE.0, AGE_RANGE.1);
        r.income = ((income_n * (i1 - i0) + i0) * 100.0).round() / 100.0;
    }
    Ok(Poisoned {
        dataset: out,
        poisoned_indices: chosen,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoisoningConfig {
    pub rate: f64,
    pub noise_std: f64,
    pub train_fraction: f64,
    pub model: ClassifierConfig,
    pub seed: u64,
}

impl Default for PoisoningConfig {
    fn default() -> Self {
        Self {
            rate: 0.5,
            noise_std: 0.2,
            train_fraction: 0.8,
            model: ClassifierConfig::default(),
            seed: 0,
        }
    }
}

/// Trains a clean and a poisoned classifier from the same initialization
/// and scores both on the untouched test split.
pub fn poisoning_run(ds: &Dataset, cfg: &PoisoningConfig) -> Result<AttackReport, AttackError> {
    let (train, test) = split(ds, cfg.train_fraction, cfg.seed)?;
    let poisoned = poison(&train, cfg.rate, cfg.noise_std, cfg.seed.wrapping_add(1))?;
    let init_seed = cfg.seed.wrapping_add(2);
    let train_seed = cfg.seed.wrapping_add(3);

    let (clean_net, _) = cfg.model.fit(&train.feature_view(), &train.label_view(), init_seed, train_seed)?;
    let (dirty_net, history) = cfg.model.fit(
        &poisoned.dataset.feature_view(),
        &poisoned.dataset.label_view(),
        init_seed,
        train_seed,
    )?;

    let (tx, ty) = (test.feature_view(), test.label_view());
    let acc_clean = accuracy(&clean_net, &tx, &ty)?;
    let acc_poisoned = accuracy(&dirty_net, &tx, &ty)?;

    let mut report = AttackReport::new(AttackKind::Poisoning, cfg, cfg.seed);
    report.set_metric("accuracy_clean", acc_clean);
    report.set_metric("accuracy_poisoned", acc_poisoned);
    report.set_metric("degradation", acc_clean - acc_poisoned);
    report.set_metric("poisoned_count", poisoned.poisoned_indices.len() as f64);
    report.set_metric("models_identical", f64::from(u8::from(same_bits(&clean_net, &dirty_net))));
    report.artifacts.poisoned_indices = Some(poisoned.poisoned_indices);
    report.artifacts.loss_trace = Some(history);
    report.finish()
}

fn same_bits(a: &crate::nn::Network, b: &crate::nn::Network) -> bool {
    let (pa, pb) = (a.parameters(), b.parameters());
    pa.len() == pb.len() && pa.iter().zip(&pb).all(|(x, y)| x.to_bits() == y.to_bits())
}
