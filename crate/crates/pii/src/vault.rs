//! Encrypted pseudonym vault.
//!
//! Originals are sealed with AES-256-GCM under a key derived from a 256-bit
//! master key; pseudonyms are an HMAC-SHA256 of `(kind, value)` so the same
//! value always maps to the same token. On-disk layout (little endian):
//!
//! ```text
//! "PLVT" | version u16 | key-check tag [32] | count u32 |
//!   count × ( token_len u16 | token | kind u8 | created_ms i64 |
//!             nonce [12] | ct_len u32 | ciphertext+tag )
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock, RwLock};

use aes_gcm::aead::{Aead, AeadCore, KeyInit, OsRng, Payload};
use aes_gcm::{Aes256Gcm, Nonce};
use chrono::{DateTime, TimeZone, Utc};
use hmac::{Hmac, Mac};
use rand::RngCore;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::{Permission, PiiError, PiiKind, Principal, Role};

type HmacSha256 = Hmac<Sha256>;

const MAGIC: &[u8; 4] = b"PLVT";
const VERSION: u16 = 1;
const KEY_CHECK_LABEL: &[u8] = b"privlab-vault-key-check";

/// Matches every token the vault can issue.
pub const PSEUDONYM_PATTERN: &str = r"⟦(EMAIL|SSN|CREDIT_CARD|PHONE|PERSON_NAME)_[0-9a-f]{8}⟧";

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(PSEUDONYM_PATTERN).unwrap())
}

/// 256-bit master key.
#[derive(Clone, PartialEq, Eq)]
pub struct VaultKey([u8; 32]);

impl fmt::Debug for VaultKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VaultKey(..)")
    }
}

impl VaultKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn generate() -> Self {
        let mut k = [0u8; 32];
        OsRng.fill_bytes(&mut k);
        Self(k)
    }

    /// Accepts 32 raw bytes or 64 hex characters (surrounding whitespace ignored).
    pub fn parse(bytes: &[u8]) -> Result<Self, PiiError> {
        if let Ok(raw) = <[u8; 32]>::try_from(bytes) {
            return Ok(Self(raw));
        }
        let text = std::str::from_utf8(bytes).map_err(|_| PiiError::Key("neither 32 raw bytes nor hex".into()))?;
        let decoded = hex::decode(text.trim()).map_err(|e| PiiError::Key(e.to_string()))?;
        <[u8; 32]>::try_from(decoded.as_slice())
            .map(Self)
            .map_err(|_| PiiError::Key(format!("expected 32 bytes, got {}", decoded.len())))
    }

    pub fn load(path: &Path) -> Result<Self, PiiError> {
        Self::parse(&std::fs::read(path)?)
    }

    /// Writes the key as hex.
    pub fn save(&self, path: &Path) -> Result<(), PiiError> {
        std::fs::write(path, hex::encode(self.0))?;
        Ok(())
    }

    fn derive(&self, label: &[u8]) -> [u8; 32] {
        let mut mac = <HmacSha256 as Mac>::new_from_slice(&self.0).expect("any key length");
        mac.update(label);
        mac.finalize().into_bytes().into()
    }
}

#[derive(Clone, Debug)]
struct Entry {
    kind: PiiKind,
    nonce: [u8; 12],
    ciphertext: Vec<u8>,
    created_ms: i64,
}

/// One attempt to read a value back out of the vault.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionEvent {
    pub timestamp: DateTime<Utc>,
    pub key_id: String,
    pub role: Role,
    pub pseudonym: String,
    pub permission: Permission,
    pub outcome: String,
}

pub struct Vault {
    cipher: Aes256Gcm,
    mac_key: [u8; 32],
    key_check: [u8; 32],
    entries: RwLock<BTreeMap<String, Entry>>,
    events: Mutex<Vec<ResolutionEvent>>,
    path: Option<PathBuf>,
}

impl fmt::Debug for Vault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Vault")
            .field("entries", &self.len())
            .field("path", &self.path)
            .finish()
    }
}

fn kind_code(k: PiiKind) -> u8 {
    PiiKind::ALL.iter().position(|&x| x == k).expect("listed") as u8
}

fn aad(token: &str, kind: PiiKind, created_ms: i64) -> Vec<u8> {
    let mut v = Vec::with_capacity(token.len() + 9);
    v.extend_from_slice(token.as_bytes());
    v.push(kind_code(kind));
    v.extend_from_slice(&created_ms.to_le_bytes());
    v
}

impl Vault {
    /// Empty in-memory vault.
    pub fn new(key: &VaultKey) -> Self {
        let enc = key.derive(b"privlab-vault-enc");
        let mac_key = key.derive(b"privlab-vault-mac");
        let mut check = <HmacSha256 as Mac>::new_from_slice(&mac_key).expect("any key length");
        check.update(KEY_CHECK_LABEL);
        Self {
            cipher: Aes256Gcm::new_from_slice(&enc).expect("32-byte key"),
            mac_key,
            key_check: check.finalize().into_bytes().into(),
            entries: RwLock::new(BTreeMap::new()),
            events: Mutex::new(Vec::new()),
            path: None,
        }
    }

    /// Opens the vault file at `path`, or starts an empty vault bound to it.
    /// A wrong key fails here with [`PiiError::Authentication`].
    pub fn open(path: &Path, key: &VaultKey) -> Result<Self, PiiError> {
        let mut v = Self::new(key);
        v.path = Some(path.to_path_buf());
        if path.exists() {
            let bytes = std::fs::read(path)?;
            let entries = v.decode(&bytes)?;
            *v.entries.get_mut().expect("unpoisoned") = entries;
        }
        Ok(v)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("vault lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, pseudonym: &str) -> bool {
        self.entries.read().expect("vault lock").contains_key(pseudonym)
    }

    /// Deterministic token for `(kind, value)` under this vault's key.
    pub fn pseudonym(&self, kind: PiiKind, value: &[u8]) -> String {
        let mut mac = <HmacSha256 as Mac>::new_from_slice(&self.mac_key).expect("any key length");
        mac.update(kind.as_str().as_bytes());
        mac.update(&[0]);
        mac.update(value);
        let tag = mac.finalize().into_bytes();
        format!("⟦{}_{}⟧", kind.as_str(), hex::encode(&tag[..4]))
    }

    fn seal(&self, token: &str, kind: PiiKind, value: &[u8]) -> Result<Entry, PiiError> {
        let nonce = Aes256Gcm::generate_nonce(&mut OsRng);
        let created_ms = Utc::now().timestamp_millis();
        let ciphertext = self
            .cipher
            .encrypt(
                &nonce,
                Payload {
                    msg: value,
                    aad: &aad(token, kind, created_ms),
                },
            )
            .map_err(|_| PiiError::Authentication)?;
        Ok(Entry {
            kind,
            nonce: nonce.into(),
            ciphertext,
            created_ms,
        })
    }

    fn open_entry(&self, token: &str, e: &Entry) -> Result<Vec<u8>, PiiError> {
        self.cipher
            .decrypt(
                Nonce::from_slice(&e.nonce),
                Payload {
                    msg: &e.ciphertext,
                    aad: &aad(token, e.kind, e.created_ms),
                },
            )
            .map_err(|_| PiiError::Authentication)
    }

    /// Stores `value` and returns its deterministic pseudonym; storing the
    /// same value again returns the existing token.
    pub fn put(&self, kind: PiiKind, value: impl AsRef<[u8]>) -> Result<String, PiiError> {
        let value = value.as_ref();
        let token = self.pseudonym(kind, value);
        let mut entries = self.entries.write().expect("vault lock");
        if let Some(existing) = entries.get(&token) {
            return if existing.kind == kind && self.open_entry(&token, existing)? == value {
                Ok(token)
            } else {
                Err(PiiError::Collision(token))
            };
        }
        let entry = self.seal(&token, kind, value)?;
        entries.insert(token.clone(), entry);
        Ok(token)
    }

    /// Stores `value` under a fresh random token.
    pub fn put_random(&self, kind: PiiKind, value: impl AsRef<[u8]>) -> Result<String, PiiError> {
        let mut entries = self.entries.write().expect("vault lock");
        let token = loop {
            let mut b = [0u8; 4];
            OsRng.fill_bytes(&mut b);
            let t = format!("⟦{}_{}⟧", kind.as_str(), hex::encode(b));
            if !entries.contains_key(&t) {
                break t;
            }
        };
        let entry = self.seal(&token, kind, value.as_ref())?;
        entries.insert(token.clone(), entry);
        Ok(token)
    }

    fn record(&self, principal: &Principal, pseudonym: &str, permission: Permission, outcome: &str) {
        self.events.lock().expect("event lock").push(ResolutionEvent {
            timestamp: Utc::now(),
            key_id: principal.key_id.clone(),
            role: principal.role,
            pseudonym: pseudonym.to_string(),
            permission,
            outcome: outcome.to_string(),
        });
    }

    fn lookup(&self, pseudonym: &str) -> Result<Vec<u8>, PiiError> {
        let entries = self.entries.read().expect("vault lock");
        let e = entries.get(pseudonym).ok_or_else(|| PiiError::NotFound(pseudonym.to_string()))?;
        self.open_entry(pseudonym, e)
    }

    fn resolve_as(&self, pseudonym: &str, principal: &Principal, permission: Permission) -> Result<Vec<u8>, PiiError> {
        if !principal.can(permission) {
            self.record(principal, pseudonym, permission, "denied");
            return Err(PiiError::PermissionDenied {
                role: principal.role,
                permission,
            });
        }
        let result = self.lookup(pseudonym);
        let outcome = match &result {
            Ok(_) => "ok",
            Err(PiiError::NotFound(_)) => "not_found",
            Err(_) => "error",
        };
        self.record(principal, pseudonym, permission, outcome);
        result
    }

    /// Decrypts the original behind `pseudonym`; needs `vault:resolve`.
    pub fn resolve(&self, pseudonym: &str, principal: &Principal) -> Result<Vec<u8>, PiiError> {
        self.resolve_as(pseudonym, principal, Permission::VaultResolve)
    }

    pub fn resolve_string(&self, pseudonym: &str, principal: &Principal) -> Result<String, PiiError> {
        let bytes = self.resolve(pseudonym, principal)?;
        String::from_utf8(bytes).map_err(|e| PiiError::Encoding(e.utf8_error().valid_up_to()))
    }

    /// Replaces every known token in `text` by its original; needs
    /// `vault:rehydrate`. Unknown tokens are left in place.
    pub fn rehydrate(&self, text: &str, principal: &Principal) -> Result<String, PiiError> {
        if !principal.can(Permission::Rehydrate) {
            return Err(PiiError::PermissionDenied {
                role: principal.role,
                permission: Permission::Rehydrate,
            });
        }
        let mut out = String::with_capacity(text.len());
        let mut last = 0;
        for m in token_re().find_iter(text) {
            out.push_str(&text[last..m.start()]);
            match self.resolve_as(m.as_str(), principal, Permission::Rehydrate) {
                Ok(v) => out.push_str(&String::from_utf8_lossy(&v)),
                Err(PiiError::NotFound(_)) => out.push_str(m.as_str()),
                Err(e) => return Err(e),
            }
            last = m.end();
        }
        out.push_str(&text[last..]);
        Ok(out)
    }

    /// Audit trail of resolution attempts since the last drain.
    pub fn drain_events(&self) -> Vec<ResolutionEvent> {
        std::mem::take(&mut *self.events.lock().expect("event lock"))
    }

    pub fn encode(&self) -> Vec<u8> {
        let entries = self.entries.read().expect("vault lock");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.key_check);
        out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
        for (token, e) in entries.iter() {
            out.extend_from_slice(&(token.len() as u16).to_le_bytes());
            out.extend_from_slice(token.as_bytes());
            out.push(kind_code(e.kind));
            out.extend_from_slice(&e.created_ms.to_le_bytes());
            out.extend_from_slice(&e.nonce);
            out.extend_from_slice(&(e.ciphertext.len() as u32).to_le_bytes());
            out.extend_from_slice(&e.ciphertext);
        }
        out
    }

    fn decode(&self, bytes: &[u8]) -> Result<BTreeMap<String, Entry>, PiiError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(PiiError::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(PiiError::Format(format!("unsupported version {version}")));
        }
        let mut check = <HmacSha256 as Mac>::new_from_slice(&self.mac_key).expect("any key length");
        check.update(KEY_CHECK_LABEL);
        check.verify_slice(r.take(32)?).map_err(|_| PiiError::Authentication)?;

        let count = u32::from_le_bytes(r.array()?);
        let mut entries = BTreeMap::new();
        for _ in 0..count {
            let tlen = u16::from_le_bytes(r.array()?) as usize;
            let token = std::str::from_utf8(r.take(tlen)?)
                .map_err(|_| PiiError::Format("token is not UTF-8".into()))?
                .to_string();
            let kind = *PiiKind::ALL
                .get(r.take(1)?[0] as usize)
                .ok_or_else(|| PiiError::Format("unknown kind".into()))?;
            let created_ms = i64::from_le_bytes(r.array()?);
            let nonce: [u8; 12] = r.array()?;
            let clen = u32::from_le_bytes(r.array()?) as usize;
            let ciphertext = r.take(clen)?.to_vec();
            let e = Entry {
                kind,
                nonce,
                ciphertext,
                created_ms,
            };
            if entries.insert(token, e).is_some() {
                return Err(PiiError::Format("duplicate token".into()));
            }
        }
        if r.pos != bytes.len() {
            return Err(PiiError::Format("trailing bytes".into()));
        }
        Ok(entries)
    }

    /// Writes the vault to its bound path (temp file + rename).
    pub fn persist(&self) -> Result<(), PiiError> {
        let path = self
            .path
            .as_deref()
            .ok_or_else(|| PiiError::Format("vault has no backing file".into()))?;
        self.persist_to(path)
    }

    pub fn persist_to(&self, path: &Path) -> Result<(), PiiError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.encode())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Creation time of an entry.
    pub fn created_at(&self, pseudonym: &str) -> Option<DateTime<Utc>> {
        let entries = self.entries.read().expect("vault lock");
        entries
            .get(pseudonym)
            .and_then(|e| Utc.timestamp_millis_opt(e.created_ms).single())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PiiError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| PiiError::Format("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], PiiError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}
