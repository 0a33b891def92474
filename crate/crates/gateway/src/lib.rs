//! Privacy gateway between clients and a language-model backend:
//! authentication, RBAC, rate limiting, redaction, retrieval over an
//! in-memory vector index, DP aggregate statistics and an audit trail.

pub mod audit;
pub mod auth;
pub mod backend;
pub mod bench;
pub mod config;
pub mod embed;
pub mod pipeline;
pub mod preprocess;
pub mod ratelimit;
pub mod server;
pub mod store;

pub use audit::{AuditEntry, AuditLog, Decision};
pub use auth::{authorize, KeyStore, Route};
pub use backend::{Backend, BackendError, HttpBackend, MockBackend};
pub use config::GatewayConfig;
pub use embed::{cosine, embed, EMBED_DIM};
pub use pipeline::{ChatResponse, Gateway, StatsResponse};
pub use preprocess::{preprocess, preprocess_bytes, Preprocessed};
pub use ratelimit::{BucketState, Clock, ManualClock, RateLimiter, SystemClock};
pub use store::{DocEntry, KnnResult, VectorStore};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("missing or unknown API key")]
    Unauthorized,
    #[error("role {role} may not access {route}")]
    Forbidden { role: privlab_pii::Role, route: String },
    #[error("rate limited; retry after {retry_after:.3}s")]
    RateLimited { retry_after: f64 },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("text contains an unredacted {0} span")]
    Unredacted(privlab_pii::PiiKind),
    #[error("privacy stage failed: {0}")]
    Privacy(String),
    #[error("backend failure: {0}")]
    Backend(#[from] BackendError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GatewayError {
    /// HTTP status class for this error.
    pub fn status(&self) -> u16 {
        match self {
            GatewayError::Unauthorized => 401,
            GatewayError::Forbidden { .. } => 403,
            GatewayError::RateLimited { .. } => 429,
            GatewayError::BadRequest(_) => 400,
            GatewayError::NotFound(_) => 404,
            GatewayError::Unredacted(_) => 422,
            GatewayError::Backend(_) => 502,
            GatewayError::Privacy(_) | GatewayError::Config(_) | GatewayError::Io(_) => 500,
        }
    }

    pub fn decision(&self) -> Decision {
        match self {
            GatewayError::Unauthorized => Decision::Unauthorized,
            GatewayError::Forbidden { .. } => Decision::Forbidden,
            GatewayError::RateLimited { .. } => Decision::RateLimited,
            _ => Decision::Error,
        }
    }
}

impl From<privlab_pii::PiiError> for GatewayError {
    fn from(e: privlab_pii::PiiError) -> Self {
        use privlab_pii::PiiError as P;
        match e {
            P::NotFound(t) => GatewayError::NotFound(t),
            P::Encoding(_) => GatewayError::BadRequest(e.to_string()),
            P::PermissionDenied { role, permission } => GatewayError::Forbidden {
                role,
                route: permission.to_string(),
            },
            other => GatewayError::Privacy(other.to_string()),
        }
    }
}
