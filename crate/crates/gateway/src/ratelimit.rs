//! Per-key token buckets driven by an injectable monotonic clock.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Monotonic seconds since an arbitrary origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> f64;
}

#[derive(Debug)]
pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        Self(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Simulated clock for tests; clones share the same time.
#[derive(Clone, Debug, Default)]
pub struct ManualClock(Arc<AtomicU64>);

impl ManualClock {
    pub fn new(start: f64) -> Self {
        Self(Arc::new(AtomicU64::new(start.to_bits())))
    }

    pub fn set(&self, t: f64) {
        self.0.store(t.to_bits(), Ordering::SeqCst);
    }

    pub fn advance(&self, dt: f64) {
        let _ = self
            .0
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |b| Some((f64::from_bits(b) + dt).to_bits()));
    }
}

impl Clock for ManualClock {
    fn now(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::SeqCst))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateLimitConfig {
    pub capacity: f64,
    pub refill_per_sec: f64,
}

impl Default for RateLimitConfig {
    fn default() -> Self {
        Self {
            capacity: 10.0,
            refill_per_sec: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BucketState {
    pub capacity: f64,
    pub refill_rate: f64,
    pub tokens: f64,
    pub last_refill: f64,
}

impl BucketState {
    pub fn full(cfg: RateLimitConfig, now: f64) -> Self {
        Self {
            capacity: cfg.capacity,
            refill_rate: cfg.refill_per_sec,
            tokens: cfg.capacity,
            last_refill: now,
        }
    }

    /// Refills by elapsed time, then spends one token if available.
    /// `Err(retry_after)` when empty.
    pub fn try_acquire(&mut self, now: f64) -> Result<(), f64> {
        let elapsed = (now - self.last_refill).max(0.0);
        self.tokens = (self.tokens + elapsed * self.refill_rate).min(self.capacity);
        self.last_refill = self.last_refill.max(now);
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            Ok(())
        } else if self.refill_rate > 0.0 {
            Err((1.0 - self.tokens) / self.refill_rate)
        } else {
            Err(f64::INFINITY)
        }
    }
}

pub struct RateLimiter {
    cfg: RateLimitConfig,
    clock: Arc<dyn Clock>,
    buckets: Mutex<HashMap<String, BucketState>>,
}

impl std::fmt::Debug for RateLimiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateLimiter").field("cfg", &self.cfg).finish()
    }
}

impl RateLimiter {
    pub fn new(cfg: RateLimitConfig, clock: Arc<dyn Clock>) -> Self {
        Self {
            cfg,
            clock,
            buckets: Mutex::new(HashMap::new()),
        }
    }

    pub fn check(&self, key_id: &str) -> Result<(), f64> {
        self.check_at(key_id, self.clock.now())
    }

    pub fn check_at(&self, key_id: &str, now: f64) -> Result<(), f64> {
        let mut buckets = self.buckets.lock().unwrap_or_else(|e| e.into_inner());
        buckets
            .entry(key_id.to_string())
            .or_insert_with(|| BucketState::full(self.cfg, now))
            .try_acquire(now)
    }

    pub fn bucket(&self, key_id: &str) -> Option<BucketState> {
        self.buckets.lock().unwrap_or_else(|e| e.into_inner()).get(key_id).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_then_exact_refill() {
        let mut b = BucketState::full(RateLimitConfig::default(), 0.0);
        for _ in 0..10 {
            assert!(b.try_acquire(0.0).is_ok());
        }
        assert_eq!(b.try_acquire(0.0), Err(1.0));
        assert!(b.try_acquire(1.0).is_ok());
        assert!(b.try_acquire(1.0).is_err());
    }

    #[test]
    fn keys_have_separate_buckets() {
        let clock = ManualClock::new(0.0);
        let rl = RateLimiter::new(
            RateLimitConfig {
                capacity: 1.0,
                refill_per_sec: 1.0,
            },
            Arc::new(clock.clone()),
        );
        assert!(rl.check("a").is_ok());
        assert!(rl.check("a").is_err());
        assert!(rl.check("b").is_ok());
        clock.advance(0.5);
        assert!((rl.check("a").unwrap_err() - 0.5).abs() < 1e-12);
    }
}
