use std::collections::BTreeMap;

use privlab_core::synthdata::Record;
use serde::{Deserialize, Serialize};

use crate::{detect, Action, PiiError, PiiKind, PiiSpan, PseudonymMode, RedactionPolicy, Vault};

/// What happened to one span. Never carries the original value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedAction {
    pub kind: PiiKind,
    pub action: Action,
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

pub type RedactionSummary = BTreeMap<PiiKind, usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Redaction {
    pub text: String,
    pub applied: Vec<AppliedAction>,
}

impl Redaction {
    /// Count of spans changed, per kind (allowed spans excluded).
    pub fn summary(&self) -> RedactionSummary {
        let mut m = RedactionSummary::new();
        for a in self.applied.iter().filter(|a| a.action != Action::Allow) {
            *m.entry(a.kind).or_insert(0) += 1;
        }
        m
    }
}

fn check_spans(text: &str, spans: &[PiiSpan]) -> Result<(), PiiError> {
    let mut prev_end = 0;
    for s in spans {
        let bad = s.start >= s.end
            || s.end > text.len()
            || s.start < prev_end
            || !text.is_char_boundary(s.start)
            || !text.is_char_boundary(s.end)
            || text[s.start..s.end] != s.value;
        if bad {
            return Err(PiiError::InvalidSpan {
                start: s.start,
                end: s.end,
                len: text.len(),
            });
        }
        prev_end = s.end;
    }
    Ok(())
}

fn replacement(
    kind: PiiKind,
    value: &str,
    policy: &RedactionPolicy,
    vault: Option<&Vault>,
) -> Result<Option<String>, PiiError> {
    Ok(match policy.action(kind) {
        Action::Allow => None,
        Action::Mask | Action::Generalize => Some(format!("[{}]", kind.as_str())),
        Action::Pseudonymize => {
            let vault = vault.ok_or(PiiError::VaultUnavailable)?;
            Some(match policy.pseudonym_mode {
                PseudonymMode::Deterministic => vault.put(kind, value)?,
                PseudonymMode::Random => vault.put_random(kind, value)?,
            })
        }
    })
}

/// Applies `policy` to sorted, non-overlapping `spans` of `text`, right to
/// left so earlier offsets stay valid. Pseudonymization without a vault is an
/// error, never a silent pass-through.
pub fn redact(
    text: &str,
    spans: &[PiiSpan],
    policy: &RedactionPolicy,
    vault: Option<&Vault>,
) -> Result<Redaction, PiiError> {
    check_spans(text, spans)?;
    let mut out = text.to_string();
    let mut applied = Vec::with_capacity(spans.len());
    for s in spans.iter().rev() {
        let action = policy.action(s.kind);
        let rep = replacement(s.kind, &s.value, policy, vault)?;
        if let Some(r) = &rep {
            out.replace_range(s.start..s.end, r);
        }
        applied.push(AppliedAction {
            kind: s.kind,
            action,
            start: s.start,
            end: s.end,
            replacement: rep.unwrap_or_else(|| "[ALLOWED]".to_string()),
        });
    }
    applied.reverse();
    Ok(Redaction { text: out, applied })
}

/// Detect then redact.
pub fn sanitize(text: &str, policy: &RedactionPolicy, vault: Option<&Vault>) -> Result<Redaction, PiiError> {
    redact(text, &detect(text), policy, vault)
}

/// Representative value of the bucket holding `value`: the midpoint of a
/// closed bin, or the nearest edge for the open-ended ones.
pub fn bucket_representative(value: f64, edges: &[f64]) -> f64 {
    match edges {
        [] => value,
        [first, ..] if value < *first => *first,
        [.., last] if value >= *last => *last,
        _ => {
            let i = edges.partition_point(|&e| e <= value);
            0.5 * (edges[i - 1] + edges[i])
        }
    }
}

/// Record-level defence: identifier fields follow the policy and age and
/// income are coarsened to bucket representatives.
pub fn sanitize_record(r: &Record, policy: &RedactionPolicy, vault: Option<&Vault>) -> Result<Record, PiiError> {
    let field = |kind: PiiKind, v: &str| -> Result<String, PiiError> {
        Ok(replacement(kind, v, policy, vault)?.unwrap_or_else(|| v.to_string()))
    };
    Ok(Record {
        id: r.id,
        name: field(PiiKind::PersonName, &r.name)?,
        email: field(PiiKind::Email, &r.email)?,
        ssn: field(PiiKind::Ssn, &r.ssn)?,
        credit_card: field(PiiKind::CreditCard, &r.credit_card)?,
        phone: field(PiiKind::Phone, &r.phone)?,
        age: bucket_representative(f64::from(r.age), &policy.age_buckets).round() as u32,
        income: bucket_representative(r.income, &policy.income_buckets),
        gender: r.gender,
        condition: r.condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::VaultKey;

    #[test]
    fn mask_email_example() {
        let r = sanitize("Contact alice@example.com now", &RedactionPolicy::default(), None).unwrap();
        assert_eq!(r.text, "Contact [EMAIL] now");
        assert_eq!(r.summary().get(&PiiKind::Email), Some(&1));
    }

    #[test]
    fn repeated_value_gets_one_token() {
        let vault = Vault::new(&VaultKey::from_bytes([9; 32]));
        let policy = RedactionPolicy::uniform(Action::Pseudonymize);
        let r = sanitize("SSN 123-45-6789, again 123-45-6789.", &policy, Some(&vault)).unwrap();
        let toks: Vec<&str> = r.applied.iter().map(|a| a.replacement.as_str()).collect();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0], toks[1]);
        assert_eq!(vault.len(), 1);
    }

    #[test]
    fn pseudonymize_without_vault_fails_closed() {
        let policy = RedactionPolicy::default().with_action(PiiKind::Ssn, Action::Pseudonymize);
        assert!(matches!(
            sanitize("SSN 123-45-6789", &policy, None),
            Err(PiiError::VaultUnavailable)
        ));
    }

    #[test]
    fn allow_leaves_text_and_is_not_counted() {
        let policy = RedactionPolicy::default().with_action(PiiKind::Email, Action::Allow);
        let r = sanitize("mail a.b@example.org or 123-45-6789", &policy, None).unwrap();
        assert_eq!(r.text, "mail a.b@example.org or [SSN]");
        assert_eq!(r.summary().len(), 1);
    }

    #[test]
    fn bad_spans_are_rejected() {
        let span = PiiSpan {
            kind: PiiKind::Ssn,
            start: 2,
            end: 40,
            value: String::new(),
            confidence: 1.0,
        };
        assert!(redact("short", &[span], &RedactionPolicy::default(), None).is_err());
    }

    #[test]
    fn records_are_sanitized_field_by_field() {
        let r = Record::synthesize(0, 1);
        let s = sanitize_record(&r, &RedactionPolicy::default(), None).unwrap();
        assert_eq!(s.ssn, "[SSN]");
        assert_eq!(s.name, "[PERSON_NAME]");
        assert!([24, 35, 45, 58, 78, 90].contains(&s.age));
        assert_eq!(s.condition, r.condition);
        assert_eq!(bucket_representative(5.0, &[10.0, 20.0]), 10.0);
        assert_eq!(bucket_representative(15.0, &[10.0, 20.0]), 15.0);
    }
}
