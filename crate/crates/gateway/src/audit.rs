//! Append-only audit trail, mirrored to a JSON Lines file when configured.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use privlab_pii::PiiKind;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Ok,
    Unauthorized,
    Forbidden,
    RateLimited,
    Error,
}

/// One request. Holds counts and identifiers only, never values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp: DateTime<Utc>,
    pub key_id: Option<String>,
    pub route: String,
    pub decision: Decision,
    pub status: u16,
    pub pii_counts: BTreeMap<PiiKind, usize>,
    pub latency_ms: f64,
}

#[derive(Default)]
struct Inner {
    entries: Vec<AuditEntry>,
    file: Option<File>,
}

#[derive(Default)]
pub struct AuditLog {
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for AuditLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AuditLog").field("len", &self.len()).finish()
    }
}

impl AuditLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_file(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            inner: Mutex::new(Inner {
                entries: Vec::new(),
                file: Some(file),
            }),
        })
    }

    pub fn append(&self, entry: AuditEntry) -> std::io::Result<()> {
        let mut inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = inner.file.as_mut() {
            let mut line = serde_json::to_vec(&entry).map_err(std::io::Error::other)?;
            line.push(b'\n');
            f.write_all(&line)?;
            f.flush()?;
        }
        inner.entries.push(entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<AuditEntry> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).entries.clone()
    }

    /// Total detected spans per kind over entries at or after `since`.
    /// Every kind is present, zero if unseen.
    pub fn pii_totals_since(&self, since: DateTime<Utc>) -> BTreeMap<PiiKind, u64> {
        let mut totals: BTreeMap<PiiKind, u64> = PiiKind::ALL.iter().map(|&k| (k, 0)).collect();
        let inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        for e in inner.entries.iter().filter(|e| e.timestamp >= since) {
            for (k, n) in &e.pii_counts {
                *totals.entry(*k).or_insert(0) += *n as u64;
            }
        }
        totals
    }
}
