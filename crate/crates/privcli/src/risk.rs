//! Sensitivity × exposure risk classification.

use std::fmt;

use privlab_core::attacks::{median, AttackKind, AttackReport};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskLevel {
    pub sensitivity: Level,
    pub exposure: Level,
    pub risk: Level,
}

/// Rows are sensitivity, columns exposure, both ordered low, medium, high.
pub const RISK_TABLE: [[Level; 3]; 3] = {
    use Level::*;
    [
        [Low, Low, Medium],
        [Low, Medium, High],
        [Medium, High, High],
    ]
};

pub fn risk_score(sensitivity: Level, exposure: Level) -> RiskLevel {
    RiskLevel {
        sensitivity,
        exposure,
        risk: RISK_TABLE[sensitivity as usize][exposure as usize],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExposureThresholds {
    /// AUC at or above this is high exposure.
    pub auc_high: f64,
    /// AUC in `[auc_medium, auc_high)` is medium exposure.
    pub auc_medium: f64,
    /// Extraction rate strictly above this is high exposure.
    pub extraction_rate: f64,
}

impl Default for ExposureThresholds {
    fn default() -> Self {
        Self {
            auc_high: 0.75,
            auc_medium: 0.6,
            extraction_rate: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exposure {
    pub level: Level,
    pub mia_auc: Option<f64>,
    pub extraction_rate: Option<f64>,
    pub thresholds: ExposureThresholds,
    /// Missing inputs; the level was computed from what was available.
    pub skipped: Vec<String>,
}

fn median_metric(reports: &[&AttackReport], kind: AttackKind, name: &str) -> Option<f64> {
    let vals: Vec<f64> = reports
        .iter()
        .filter(|r| r.attack_kind == kind)
        .filter_map(|r| r.metric(name))
        .collect();
    (!vals.is_empty()).then(|| median(&vals))
}

/// Exposure from the median MIA AUC and extraction rate over `reports`.
pub fn exposure_from_attacks(reports: &[&AttackReport], th: &ExposureThresholds) -> Exposure {
    let auc = median_metric(reports, AttackKind::Mia, "auc");
    let rate = median_metric(reports, AttackKind::Extraction, "extraction_rate");
    let mut skipped = Vec::new();
    if auc.is_none() {
        skipped.push("mia".to_string());
    }
    if rate.is_none() {
        skipped.push("extraction".to_string());
    }
    let level =
        if rate.is_some_and(|r| r > th.extraction_rate) || auc.is_some_and(|a| a >= th.auc_high) {
            Level::High
        } else if auc.is_some_and(|a| a >= th.auc_medium) {
            Level::Medium
        } else {
            Level::Low
        };
    Exposure {
        level,
        mia_auc: auc,
        extraction_rate: rate,
        thresholds: *th,
        skipped,
    }
}
