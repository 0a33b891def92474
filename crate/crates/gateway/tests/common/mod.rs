#![allow(dead_code)]

use std::sync::Arc;

use privlab_gateway::{AuditLog, Gateway, GatewayConfig, KeyStore, ManualClock, MockBackend};
use privlab_pii::{Principal, RedactionPolicy, Role, Vault, VaultKey};

pub const ADMIN: &str = "sk-admin-7f3a";
pub const ANALYST: &str = "sk-analyst-19c2";
pub const GUEST: &str = "sk-guest-44d0";

pub struct Harness {
    pub gw: Gateway,
    pub backend: Arc<MockBackend>,
    pub clock: ManualClock,
}

pub fn harness(policy: RedactionPolicy, tweak: impl FnOnce(&mut GatewayConfig)) -> Harness {
    let mut cfg = GatewayConfig {
        key_pepper: "test-pepper".into(),
        ..GatewayConfig::default()
    };
    cfg.dp.seed = Some(11);
    tweak(&mut cfg);
    let mut keys = KeyStore::new(cfg.key_pepper.as_bytes().to_vec());
    keys.add_key(Principal::new("admin-1", Role::Admin, "Admin"), ADMIN);
    keys.add_key(Principal::new("analyst-1", Role::Analyst, "Analyst"), ANALYST);
    keys.add_key(Principal::new("guest-1", Role::Guest, "Guest"), GUEST);
    let backend = Arc::new(MockBackend::new());
    let clock = ManualClock::new(0.0);
    let vault = Arc::new(Vault::new(&VaultKey::from_bytes([7; 32])));
    let gw = Gateway::new(
        cfg,
        keys,
        policy,
        Some(vault),
        backend.clone(),
        Arc::new(clock.clone()),
        AuditLog::in_memory(),
    )
    .unwrap();
    Harness { gw, backend, clock }
}

/// No effective rate limit.
pub fn unlimited(cfg: &mut GatewayConfig) {
    cfg.rate_limit.capacity = 1e12;
}
