use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AttackError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Mia,
    Extraction,
    Poisoning,
    Inversion,
    Property,
}

impl AttackKind {
    pub const ALL: [AttackKind; 5] = [
        AttackKind::Mia,
        AttackKind::Extraction,
        AttackKind::Poisoning,
        AttackKind::Inversion,
        AttackKind::Property,
    ];

    /// Metric names every report of this kind must carry.
    pub fn required_metrics(self) -> &'static [&'static str] {
        match self {
            AttackKind::Mia => &["auc", "advantage"],
            AttackKind::Extraction => &["extraction_rate", "canary_rank"],
            AttackKind::Poisoning => &["accuracy_clean", "accuracy_poisoned", "degradation"],
            AttackKind::Inversion => &["inversion_output_gap"],
            AttackKind::Property => &["property_mae", "property_estimate"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::Mia => "mia",
            AttackKind::Extraction => "extraction",
            AttackKind::Poisoning => "poisoning",
            AttackKind::Inversion => "inversion",
            AttackKind::Property => "property",
        }
    }
}

/// Bulky per-run outputs kept for plotting and auditing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roc: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_trace: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisoned_indices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_input: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack_kind: AttackKind,
    pub config: serde_json::Value,
    pub seed: u64,
    pub defended: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Non-fatal conditions such as degenerate score distributions.
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default)]
    pub artifacts: Artifacts,
}

impl AttackReport {
    pub fn new<C: Serialize>(kind: AttackKind, config: &C, seed: u64) -> Self {
        Self {
            attack_kind: kind,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            seed,
            defended: false,
            metrics: BTreeMap::new(),
            flags: Vec::new(),
            artifacts: Artifacts::default(),
        }
    }

    pub fn with_metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn set_metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn flag(&mut self, msg: impl Into<String>) {
        self.flags.push(msg.into());
    }

    /// Checks that required metrics exist and that every metric is finite.
    pub fn validate(&self) -> Result<(), AttackError> {
        for name in self.attack_kind.required_metrics() {
            if !self.metrics.contains_key(*name) {
                return Err(AttackError::MissingMetric(name.to_string()));
            }
        }
        if let Some((name, v)) = self.metrics.iter().find(|(_, v)| !v.is_finite()) {
            return Err(AttackError::NonFiniteMetric {
                name: name.clone(),
                value: *v,
            });
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<Self, AttackError> {
        self.validate()?;
        Ok(self)
    }
}
