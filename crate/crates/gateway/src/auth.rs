//! API-key authentication against keyed hashes, and the route table.

use std::fmt;

use hmac::{Hmac, Mac};
use privlab_pii::{Permission, Principal, Role};
use sha2::Sha256;
use subtle::ConstantTimeEq;

use crate::GatewayError;

type HmacSha256 = Hmac<Sha256>;

struct StoredKey {
    hash: [u8; 32],
    principal: Principal,
}

/// Keyed hashes of API keys; raw keys are never stored.
pub struct KeyStore {
    pepper: Vec<u8>,
    keys: Vec<StoredKey>,
}

impl fmt::Debug for KeyStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyStore").field("keys", &self.keys.len()).finish()
    }
}

impl KeyStore {
    pub fn new(pepper: impl Into<Vec<u8>>) -> Self {
        Self {
            pepper: pepper.into(),
            keys: Vec::new(),
        }
    }

    pub fn hash_key(&self, api_key: &str) -> [u8; 32] {
        let mut mac = <HmacSha256 as Mac>::new_from_slice(&self.pepper).expect("any key length");
        mac.update(api_key.as_bytes());
        mac.finalize().into_bytes().into()
    }

    pub fn add_key(&mut self, principal: Principal, api_key: &str) {
        let hash = self.hash_key(api_key);
        self.keys.push(StoredKey { hash, principal });
    }

    pub fn add_hashed(&mut self, principal: Principal, hash_hex: &str) -> Result<(), GatewayError> {
        let bytes = hex::decode(hash_hex).map_err(|e| GatewayError::Config(format!("key hash: {e}")))?;
        let hash: [u8; 32] = bytes
            .try_into()
            .map_err(|_| GatewayError::Config("key hash must be 32 bytes".into()))?;
        self.keys.push(StoredKey { hash, principal });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Compares the presented key's hash with every stored hash in constant
    /// time, without stopping at the first match.
    pub fn authenticate(&self, api_key: Option<&str>) -> Result<Principal, GatewayError> {
        let presented = self.hash_key(api_key.ok_or(GatewayError::Unauthorized)?);
        let mut found: Option<&Principal> = None;
        for k in &self.keys {
            if bool::from(k.hash.ct_eq(&presented)) {
                found = Some(&k.principal);
            }
        }
        found.cloned().ok_or(GatewayError::Unauthorized)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Chat,
    Docs,
    Retrieve,
    MetricsAggregate,
    VaultResolve,
}

impl Route {
    pub const ALL: [Route; 5] = [
        Route::Chat,
        Route::Docs,
        Route::Retrieve,
        Route::MetricsAggregate,
        Route::VaultResolve,
    ];

    pub fn path(self) -> &'static str {
        match self {
            Route::Chat => "/v1/chat",
            Route::Docs => "/v1/docs",
            Route::Retrieve => "/v1/retrieve",
            Route::MetricsAggregate => "/v1/metrics/aggregate",
            Route::VaultResolve => "/v1/vault/resolve",
        }
    }

    pub fn from_path(path: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.path() == path)
    }

    pub fn permission(self) -> Permission {
        match self {
            Route::Chat => Permission::Chat,
            Route::Docs => Permission::DocsWrite,
            Route::Retrieve => Permission::Retrieve,
            Route::MetricsAggregate => Permission::MetricsRead,
            Route::VaultResolve => Permission::VaultResolve,
        }
    }
}

/// Route-table check; unknown paths are denied.
pub fn authorize(p: &Principal, path: &str) -> Result<Route, GatewayError> {
    let deny = || GatewayError::Forbidden {
        role: p.role,
        route: path.to_string(),
    };
    let route = Route::from_path(path).ok_or_else(deny)?;
    if p.role.grants(route.permission()) {
        Ok(route)
    } else {
        Err(deny())
    }
}

/// Which roles may use which routes, for documentation and tests.
pub fn route_table() -> Vec<(Role, Route, bool)> {
    let mut v = Vec::new();
    for role in [Role::Admin, Role::Analyst, Role::Guest] {
        for r in Route::ALL {
            v.push((role, r, role.grants(r.permission())));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> KeyStore {
        let mut s = KeyStore::new(b"pepper".to_vec());
        s.add_key(Principal::new("a", Role::Admin, "Admin"), "sk-admin-0001");
        s.add_key(Principal::new("g", Role::Guest, "Guest"), "sk-guest-0001");
        s
    }

    #[test]
    fn known_keys_map_to_principals() {
        let s = store();
        assert_eq!(s.authenticate(Some("sk-admin-0001")).unwrap().role, Role::Admin);
        assert!(matches!(s.authenticate(Some("sk-admin-0002")), Err(GatewayError::Unauthorized)));
        assert!(matches!(s.authenticate(None), Err(GatewayError::Unauthorized)));
        assert!(matches!(s.authenticate(Some("")), Err(GatewayError::Unauthorized)));
    }

    #[test]
    fn hashed_keys_match_their_plaintext() {
        let mut s = KeyStore::new(b"pepper".to_vec());
        let h = hex::encode(s.hash_key("sk-x"));
        s.add_hashed(Principal::new("x", Role::Analyst, "X"), &h).unwrap();
        assert_eq!(s.authenticate(Some("sk-x")).unwrap().key_id, "x");
        assert!(s.add_hashed(Principal::new("y", Role::Guest, "Y"), "zz").is_err());
    }

    #[test]
    fn route_table_examples() {
        let guest = Principal::new("g", Role::Guest, "G");
        let analyst = Principal::new("n", Role::Analyst, "N");
        let admin = Principal::new("a", Role::Admin, "A");
        assert!(matches!(authorize(&guest, "/v1/metrics/aggregate"), Err(GatewayError::Forbidden { .. })));
        assert_eq!(authorize(&analyst, "/v1/chat").unwrap(), Route::Chat);
        assert_eq!(authorize(&admin, "/v1/vault/resolve").unwrap(), Route::VaultResolve);
        assert!(authorize(&admin, "/v1/unknown").is_err());
        assert!(authorize(&analyst, "/v1/docs").is_err());
        assert_eq!(route_table().iter().filter(|t| t.2).count(), 5 + 3 + 1);
    }
}
