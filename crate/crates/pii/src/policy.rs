use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{PiiError, PiiKind};

pub const DEFAULT_AGE_BUCKETS: [f64; 6] = [18.0, 30.0, 40.0, 50.0, 65.0, 90.0];
pub const DEFAULT_INCOME_BUCKETS: [f64; 7] = [10_000.0, 25_000.0, 50_000.0, 75_000.0, 100_000.0, 150_000.0, 200_000.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Mask,
    Pseudonymize,
    Generalize,
    Allow,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PseudonymMode {
    /// Keyed hash of the value: repeats map to one token.
    #[default]
    Deterministic,
    /// Fresh random token per occurrence.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedactionPolicy {
    pub actions: BTreeMap<PiiKind, Action>,
    pub age_buckets: Vec<f64>,
    pub income_buckets: Vec<f64>,
    #[serde(default)]
    pub pseudonym_mode: PseudonymMode,
}

impl Default for RedactionPolicy {
    fn default() -> Self {
        Self::uniform(Action::Mask)
    }
}

impl RedactionPolicy {
    /// Same action for every kind, default buckets.
    pub fn uniform(action: Action) -> Self {
        Self {
            actions: PiiKind::ALL.iter().map(|&k| (k, action)).collect(),
            age_buckets: DEFAULT_AGE_BUCKETS.to_vec(),
            income_buckets: DEFAULT_INCOME_BUCKETS.to_vec(),
            pseudonym_mode: PseudonymMode::Deterministic,
        }
    }

    pub fn with_action(mut self, kind: PiiKind, action: Action) -> Self {
        self.actions.insert(kind, action);
        self
    }

    pub fn action(&self, kind: PiiKind) -> Action {
        self.actions.get(&kind).copied().unwrap_or(Action::Mask)
    }

    pub fn needs_vault(&self) -> bool {
        self.actions.values().any(|&a| a == Action::Pseudonymize)
    }

    pub fn validate(&self) -> Result<(), PiiError> {
        if let Some(k) = PiiKind::ALL.iter().find(|k| !self.actions.contains_key(k)) {
            return Err(PiiError::Policy(format!("no action for {k}")));
        }
        for (name, edges) in [("age_buckets", &self.age_buckets), ("income_buckets", &self.income_buckets)] {
            if edges.is_empty() || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(PiiError::Policy(format!("{name} must be finite and strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, PiiError> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, PiiError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn fmt_edge(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Label of the half-open bin `[lo, hi)` holding `value`: `"lo–hi"`, or
/// `"<first"` / `"≥last"` outside the edges. Edges must be strictly increasing.
pub fn generalize_numeric(value: f64, edges: &[f64]) -> String {
    match edges {
        [] => "*".to_string(),
        [first, ..] if value < *first => format!("<{}", fmt_edge(*first)),
        [.., last] if value >= *last => format!("≥{}", fmt_edge(*last)),
        _ => {
            let i = edges.partition_point(|&e| e <= value);
            format!("{}–{}", fmt_edge(edges[i - 1]), fmt_edge(edges[i]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_labels() {
        let ages = DEFAULT_AGE_BUCKETS;
        assert_eq!(generalize_numeric(34.0, &ages), "30–40");
        assert_eq!(generalize_numeric(18.0, &ages), "18–30");
        assert_eq!(generalize_numeric(17.9, &ages), "<18");
        assert_eq!(generalize_numeric(90.0, &ages), "≥90");
        assert_eq!(generalize_numeric(200_000.0, &DEFAULT_INCOME_BUCKETS), "≥200000");
        assert_eq!(generalize_numeric(0.5, &[0.0, 0.25, 1.0]), "0.25–1");
    }

    #[test]
    fn policy_json_round_trip_and_validation() {
        let p = RedactionPolicy::default().with_action(PiiKind::Ssn, Action::Pseudonymize);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"SSN\":\"pseudonymize\""));
        assert_eq!(RedactionPolicy::from_json(&json).unwrap(), p);

        let mut missing = p.clone();
        missing.actions.remove(&PiiKind::Email);
        assert!(missing.validate().is_err());
        let mut bad = p;
        bad.age_buckets = vec![30.0, 30.0];
        assert!(bad.validate().is_err());
    }
}
