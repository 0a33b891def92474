//! Experiment harness: data generation, single attacks, the full
//! evaluation matrix, risk scoring and CSV plots.

pub mod eval;
pub mod plot;
pub mod risk;

pub use eval::{redact_corpus, run_attack, run_eval, EvalConfig, EvalReport};
pub use plot::plot;
pub use risk::{exposure_from_attacks, risk_score, ExposureThresholds, Level, RiskLevel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 1 usage, 2 experiment failure, 3 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Experiment(_) | CliError::Io(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}
