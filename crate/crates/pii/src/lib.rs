//! PII detection, redaction and generalization, plus an AES-256-GCM vault
//! holding the originals behind deterministic pseudonyms.

mod detect;
mod policy;
mod rbac;
mod redact;
mod vault;

pub use detect::{
    detect, detect_bytes, is_card_number, is_email, is_person_name, is_phone, is_ssn, validate_span, PiiKind, PiiSpan,
};
pub use policy::{generalize_numeric, Action, PseudonymMode, RedactionPolicy, DEFAULT_AGE_BUCKETS, DEFAULT_INCOME_BUCKETS};
pub use rbac::{Permission, Principal, Role};
pub use redact::{
    bucket_representative, redact, sanitize, sanitize_record, AppliedAction, Redaction, RedactionSummary,
};
pub use vault::{ResolutionEvent, Vault, VaultKey, PSEUDONYM_PATTERN};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PiiError {
    #[error("input is not valid UTF-8 (first bad byte at {0})")]
    Encoding(usize),
    #[error("span {start}..{end} is not valid for text of {len} bytes")]
    InvalidSpan { start: usize, end: usize, len: usize },
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("policy requires pseudonymization but no vault is available")]
    VaultUnavailable,
    #[error("vault authentication failed")]
    Authentication,
    #[error("pseudonym {0} not found")]
    NotFound(String),
    #[error("role {role} lacks permission {permission}")]
    PermissionDenied { role: Role, permission: Permission },
    #[error("pseudonym collision for {0}")]
    Collision(String),
    #[error("malformed vault file: {0}")]
    Format(String),
    #[error("invalid vault key: {0}")]
    Key(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
