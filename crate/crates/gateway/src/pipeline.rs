//! Request handlers. Every request passes authenticate → authorize →
//! rate limit before any payload is read, and leaves exactly one audit entry.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use chrono::Utc;
use privlab_core::dp::{dp_count, DpParams, NoisyCount};
use privlab_pii::{
    detect, redact, Action, Permission, PiiKind, Principal, Redaction, RedactionPolicy, RedactionSummary, Vault,
    VaultKey,
};
use serde::Serialize;

use crate::audit::{AuditEntry, AuditLog};
use crate::auth::{authorize, KeyStore, Route};
use crate::backend::{Backend, HttpBackend, MockBackend};
use crate::config::{BackendConfig, GatewayConfig};
use crate::preprocess::preprocess_bytes;
use crate::ratelimit::{Clock, RateLimiter, SystemClock};
use crate::store::{KnnResult, VectorStore};
use crate::GatewayError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChatResponse {
    pub text: String,
    pub redaction_summary: RedactionSummary,
    pub retrieved: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DocsResponse {
    pub doc_id: String,
    pub redaction_summary: RedactionSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsResponse {
    pub epsilon: f64,
    pub window_seconds: u64,
    /// Noise-stream index of the first count; later kinds follow in order.
    pub first_noise_index: u64,
    pub counts: BTreeMap<PiiKind, NoisyCount>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolveResponse {
    pub pseudonym: String,
    pub value: String,
}

pub struct Gateway {
    keys: KeyStore,
    policy: RedactionPolicy,
    vault: Option<Arc<Vault>>,
    backend: Arc<dyn Backend>,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
    store: RwLock<VectorStore>,
    audit: AuditLog,
    dp_index: AtomicU64,
    dp_seed: u64,
    persist_lock: Mutex<()>,
    cfg: GatewayConfig,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("keys", &self.keys)
            .field("vault", &self.vault)
            .field("audit", &self.audit)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    /// Assembles a gateway from parts; `cfg` supplies the tunables
    /// (rate limit, ε, RAG, lowercasing, rehydration).
    pub fn new(
        cfg: GatewayConfig,
        keys: KeyStore,
        policy: RedactionPolicy,
        vault: Option<Arc<Vault>>,
        backend: Arc<dyn Backend>,
        clock: Arc<dyn Clock>,
        audit: AuditLog,
    ) -> Result<Self, GatewayError> {
        policy.validate()?;
        if policy.needs_vault() && vault.is_none() {
            return Err(GatewayError::Config("policy pseudonymizes but no vault is configured".into()));
        }
        Ok(Self {
            limiter: RateLimiter::new(cfg.rate_limit, Arc::clone(&clock)),
            store: RwLock::new(VectorStore::new(cfg.lowercase)),
            dp_index: AtomicU64::new(0),
            dp_seed: cfg.dp.seed.unwrap_or_else(rand::random),
            persist_lock: Mutex::new(()),
            keys,
            policy,
            vault,
            backend,
            clock,
            audit,
            cfg,
        })
    }

    /// Builds everything the config describes, with the system clock.
    pub fn from_config(cfg: GatewayConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let mut keys = KeyStore::new(cfg.key_pepper.as_bytes().to_vec());
        for k in &cfg.keys {
            let p = Principal::new(&k.key_id, k.role, &k.display_name);
            match (&k.key_hash, &k.api_key) {
                (Some(h), _) => keys.add_hashed(p, h)?,
                (None, Some(raw)) => keys.add_key(p, raw),
                (None, None) => unreachable!("validated"),
            }
        }
        let policy = cfg.resolve_policy()?;
        let vault = match cfg.vault_key_path() {
            Some(kp) => {
                let key = VaultKey::load(&kp)?;
                Some(Arc::new(match &cfg.vault_path {
                    Some(p) => Vault::open(p, &key)?,
                    None => Vault::new(&key),
                }))
            }
            None => None,
        };
        let backend: Arc<dyn Backend> = match &cfg.backend {
            BackendConfig::Mock => Arc::new(MockBackend::new()),
            BackendConfig::Http {
                url,
                credential_env,
                timeout_ms,
            } => {
                let credential = credential_env.as_ref().and_then(|v| std::env::var(v).ok());
                Arc::new(HttpBackend::new(url, credential, Duration::from_millis(*timeout_ms)))
            }
        };
        let audit = match &cfg.audit_path {
            Some(p) => AuditLog::with_file(p)?,
            None => AuditLog::in_memory(),
        };
        Self::new(cfg, keys, policy, vault, backend, Arc::new(SystemClock::default()), audit)
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.cfg
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn policy(&self) -> &RedactionPolicy {
        &self.policy
    }

    pub fn vault(&self) -> Option<&Vault> {
        self.vault.as_deref()
    }

    pub fn rate_bucket(&self, key_id: &str) -> Option<crate::BucketState> {
        self.limiter.bucket(key_id)
    }

    pub fn store_len(&self) -> usize {
        self.store.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    /// Runs the shared middleware, then `body`, and records one audit entry.
    fn handle<T>(
        &self,
        api_key: Option<&str>,
        path: &str,
        body: impl FnOnce(&Principal, &mut BTreeMap<PiiKind, usize>) -> Result<T, GatewayError>,
    ) -> Result<T, GatewayError> {
        let t0 = self.clock.now();
        let mut key_id = None;
        let mut counts = BTreeMap::new();
        let result = (|| {
            let principal = self.keys.authenticate(api_key)?;
            key_id = Some(principal.key_id.clone());
            authorize(&principal, path)?;
            self.limiter
                .check(&principal.key_id)
                .map_err(|retry_after| GatewayError::RateLimited { retry_after })?;
            body(&principal, &mut counts)
        })();
        let (decision, status) = match &result {
            Ok(_) => (crate::Decision::Ok, 200),
            Err(e) => (e.decision(), e.status()),
        };
        self.audit.append(AuditEntry {
            timestamp: Utc::now(),
            key_id,
            route: Route::from_path(path).map_or("<unknown>", Route::path).to_string(),
            decision,
            status,
            pii_counts: counts,
            latency_ms: (self.clock.now() - t0) * 1000.0,
        })?;
        result
    }

    /// Detects, counts and redacts under the policy. Any failure aborts.
    fn sanitize(&self, text: &str, counts: &mut BTreeMap<PiiKind, usize>) -> Result<Redaction, GatewayError> {
        let spans = detect(text);
        for s in &spans {
            *counts.entry(s.kind).or_insert(0) += 1;
        }
        let red = redact(text, &spans, &self.policy, self.vault.as_deref())?;
        if red.applied.iter().any(|a| a.action == Action::Pseudonymize) {
            if let Some(v) = self.vault.as_deref().filter(|v| v.path().is_some()) {
                let _guard = self.persist_lock.lock().unwrap_or_else(|e| e.into_inner());
                v.persist()?;
            }
        }
        Ok(red)
    }

    fn assert_clean(&self, text: &str) -> Result<(), GatewayError> {
        match detect(text).into_iter().find(|s| self.policy.action(s.kind) != Action::Allow) {
            Some(s) => Err(GatewayError::Privacy(format!("{} span would reach the backend", s.kind))),
            None => Ok(()),
        }
    }

    /// POST /v1/chat.
    pub fn handle_chat(&self, api_key: Option<&str>, message: &[u8]) -> Result<ChatResponse, GatewayError> {
        self.handle(api_key, Route::Chat.path(), |principal, counts| {
            let pre = preprocess_bytes(message, self.cfg.lowercase)?;
            let red = self.sanitize(&pre.text, counts)?;
            let mut prompt = red.text.clone();
            let mut retrieved = Vec::new();
            if self.cfg.rag.enabled && self.cfg.rag.k > 0 {
                let hits = self
                    .store
                    .read()
                    .unwrap_or_else(|e| e.into_inner())
                    .knn(&red.text, self.cfg.rag.k)
                    .hits;
                if !hits.is_empty() {
                    prompt.push_str("\n\nContext:");
                    for h in hits {
                        prompt.push_str("\n- ");
                        prompt.push_str(&h.text);
                        retrieved.push(h.doc_id);
                    }
                }
            }
            self.assert_clean(&prompt)?;
            let mut text = self.backend.complete(&prompt)?;
            if self.cfg.rehydrate && principal.can(Permission::Rehydrate) {
                if let Some(v) = self.vault.as_deref() {
                    text = v.rehydrate(&text, principal)?;
                }
            }
            Ok(ChatResponse {
                text,
                redaction_summary: red.summary(),
                retrieved,
            })
        })
    }

    /// POST /v1/docs: redacts, then indexes.
    pub fn handle_docs(&self, api_key: Option<&str>, doc_id: &str, text: &[u8]) -> Result<DocsResponse, GatewayError> {
        self.handle(api_key, Route::Docs.path(), |_, counts| {
            let pre = preprocess_bytes(text, self.cfg.lowercase)?;
            let red = self.sanitize(&pre.text, counts)?;
            self.store
                .write()
                .unwrap_or_else(|e| e.into_inner())
                .index_put_with(doc_id, &red.text, &self.policy)?;
            Ok(DocsResponse {
                doc_id: doc_id.to_string(),
                redaction_summary: red.summary(),
            })
        })
    }

    /// GET /v1/retrieve. The query is redacted before it is embedded.
    pub fn handle_retrieve(&self, api_key: Option<&str>, query: &[u8], k: usize) -> Result<KnnResult, GatewayError> {
        self.handle(api_key, Route::Retrieve.path(), |_, counts| {
            let pre = preprocess_bytes(query, self.cfg.lowercase)?;
            let red = self.sanitize(&pre.text, counts)?;
            Ok(self.store.read().unwrap_or_else(|e| e.into_inner()).knn(&red.text, k))
        })
    }

    /// GET /v1/metrics/aggregate.
    pub fn handle_metrics(&self, api_key: Option<&str>, window_seconds: u64) -> Result<StatsResponse, GatewayError> {
        self.handle(api_key, Route::MetricsAggregate.path(), |p, _| {
            self.aggregate_stats(p, window_seconds)
        })
    }

    /// DP-noised detection counts per kind over the trailing window. Each
    /// count draws a fresh noise index.
    pub fn aggregate_stats(&self, p: &Principal, window_seconds: u64) -> Result<StatsResponse, GatewayError> {
        if !p.can(Permission::MetricsRead) {
            return Err(GatewayError::Forbidden {
                role: p.role,
                route: Route::MetricsAggregate.path().into(),
            });
        }
        let secs = i64::try_from(window_seconds).unwrap_or(i64::MAX);
        let since = Utc::now() - chrono::Duration::try_seconds(secs).unwrap_or(chrono::TimeDelta::MAX);
        let eps = self.cfg.dp.aggregate_epsilon;
        let params = DpParams::counting(eps, self.dp_seed).map_err(|e| GatewayError::Config(e.to_string()))?;
        let totals = self.audit.pii_totals_since(since);
        let first = self.dp_index.fetch_add(totals.len() as u64, Ordering::SeqCst);
        let mut counts = BTreeMap::new();
        for (idx, (kind, n)) in (first..).zip(totals) {
            let noisy = dp_count(n, &params, idx, true).map_err(|e| GatewayError::Privacy(e.to_string()))?;
            counts.insert(kind, noisy);
        }
        Ok(StatsResponse {
            epsilon: eps,
            window_seconds,
            first_noise_index: first,
            counts,
        })
    }

    /// POST /v1/vault/resolve.
    pub fn handle_vault_resolve(&self, api_key: Option<&str>, pseudonym: &str) -> Result<ResolveResponse, GatewayError> {
        self.handle(api_key, Route::VaultResolve.path(), |p, _| {
            let vault = self
                .vault
                .as_deref()
                .ok_or_else(|| GatewayError::NotFound("no vault configured".into()))?;
            Ok(ResolveResponse {
                pseudonym: pseudonym.to_string(),
                value: vault.resolve_string(pseudonym, p)?,
            })
        })
    }

    /// Runs the middleware for `path`, then fails with `err`. For requests
    /// whose body could not be parsed.
    pub fn reject<T>(&self, api_key: Option<&str>, path: &str, err: GatewayError) -> Result<T, GatewayError> {
        self.handle(api_key, path, |_, _| Err(err))
    }

    /// Any other path: authenticated, then denied.
    pub fn handle_unknown(&self, api_key: Option<&str>, path: &str) -> Result<(), GatewayError> {
        self.handle(api_key, path, |_, _| Ok(()))
    }
}
