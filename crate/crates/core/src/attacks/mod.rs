//! The five privacy attacks, each a seeded experiment producing an
//! [`AttackReport`].

mod classifier;
mod extraction;
mod inversion;
mod metrics;
mod mia;
mod poisoning;
mod property;
mod report;

pub use classifier::ClassifierConfig;
pub use extraction::{
    build_corpus, canary_for_seed, canary_rank, charlm_complete, charlm_train, extraction_attack, extraction_run,
    make_decoys, plant_canary, Canary, CharLm, ExtractionConfig, MAX_ORDER, MIN_ORDER,
};
pub use inversion::{
    inversion_run, inversion_training_set, monotone_inverse, monotone_model, sickness_probability,
    train_inversion_model, train_inversion_target, InversionConfig,
};
pub use metrics::{auc, median, percentile, roc_curve};
pub use mia::{mia_run, mia_run_on, predict_member, MiaConfig};
pub use poisoning::{poison, poisoning_run, Poisoned, PoisoningConfig};
pub use property::{
    prevalence_dataset, probe_grid, probe_statistic, property_attack, property_run, train_property_model,
    train_property_target, train_property_target_with, PropertyConfig, PropertyEstimator, Shadow,
    SHADOW_PREVALENCES,
};
pub use report::{Artifacts, AttackKind, AttackReport};

use thiserror::Error;

use crate::nn::NnError;
use crate::synthdata::SynthError;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("scores ({scores}) and labels ({labels}) differ in length")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("AUC needs both classes present")]
    SingleClass,
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("report is missing metric {0}")]
    MissingMetric(String),
    #[error("metric {name} is not finite ({value})")]
    NonFiniteMetric { name: String, value: f64 },
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}
