//! JSON service configuration.

use std::path::{Path, PathBuf};

use privlab_pii::{RedactionPolicy, Role};
use serde::{Deserialize, Serialize};

use crate::ratelimit::RateLimitConfig;
use crate::GatewayError;

/// Overrides `vault_key_file` when set.
pub const VAULT_KEY_ENV: &str = "PRIVLAB_VAULT_KEY_FILE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyConfig {
    pub key_id: String,
    pub role: Role,
    #[serde(default)]
    pub display_name: String,
    /// Hex HMAC-SHA256 of the API key under `key_pepper`.
    #[serde(default)]
    pub key_hash: Option<String>,
    /// Plaintext key, hashed at load. For development configs.
    #[serde(default)]
    pub api_key: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BackendConfig {
    Mock,
    Http {
        url: String,
        /// Environment variable holding the bearer credential.
        #[serde(default)]
        credential_env: Option<String>,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Mock
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlsConfig {
    pub cert_path: PathBuf,
    pub key_path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RagConfig {
    pub enabled: bool,
    pub k: usize,
}

impl Default for RagConfig {
    fn default() -> Self {
        Self { enabled: true, k: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DpConfig {
    /// ε for each `/v1/metrics/aggregate` count.
    pub aggregate_epsilon: f64,
    /// Noise stream seed; random per process when absent.
    pub seed: Option<u64>,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            aggregate_epsilon: 1.0,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub listen: String,
    pub key_pepper: String,
    pub keys: Vec<KeyConfig>,
    pub policy_path: Option<PathBuf>,
    pub policy: Option<RedactionPolicy>,
    pub rate_limit: RateLimitConfig,
    pub dp: DpConfig,
    pub backend: BackendConfig,
    pub tls: Option<TlsConfig>,
    pub audit_path: Option<PathBuf>,
    pub vault_path: Option<PathBuf>,
    pub vault_key_file: Option<PathBuf>,
    pub rag: RagConfig,
    pub lowercase: bool,
    /// Permit analyst+ responses to have pseudonyms restored.
    pub rehydrate: bool,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8443".into(),
            key_pepper: String::new(),
            keys: Vec::new(),
            policy_path: None,
            policy: None,
            rate_limit: RateLimitConfig::default(),
            dp: DpConfig::default(),
            backend: BackendConfig::default(),
            tls: None,
            audit_path: None,
            vault_path: None,
            vault_key_file: None,
            rag: RagConfig::default(),
            lowercase: false,
            rehydrate: true,
        }
    }
}

impl GatewayConfig {
    pub fn from_json(s: &str) -> Result<Self, GatewayError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| GatewayError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.key_pepper.is_empty() {
            return Err(GatewayError::Config("key_pepper must be set".into()));
        }
        for k in &self.keys {
            if k.key_hash.is_some() == k.api_key.is_some() {
                return Err(GatewayError::Config(format!(
                    "key {} needs exactly one of key_hash / api_key",
                    k.key_id
                )));
            }
        }
        let rl = self.rate_limit;
        if !(rl.capacity >= 1.0 && rl.refill_per_sec > 0.0 && rl.capacity.is_finite() && rl.refill_per_sec.is_finite()) {
            return Err(GatewayError::Config("rate_limit needs capacity ≥ 1 and a positive refill".into()));
        }
        if !(self.dp.aggregate_epsilon > 0.0 && self.dp.aggregate_epsilon.is_finite()) {
            return Err(GatewayError::Config("dp.aggregate_epsilon must be positive".into()));
        }
        Ok(())
    }

    /// Inline policy, else the policy file, else mask everything.
    pub fn resolve_policy(&self) -> Result<RedactionPolicy, GatewayError> {
        let policy = match (&self.policy, &self.policy_path) {
            (Some(p), _) => p.clone(),
            (None, Some(path)) => RedactionPolicy::load(path)?,
            (None, None) => RedactionPolicy::default(),
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn vault_key_path(&self) -> Option<PathBuf> {
        std::env::var_os(VAULT_KEY_ENV)
            .map(PathBuf::from)
            .or_else(|| self.vault_key_file.clone())
    }
}
