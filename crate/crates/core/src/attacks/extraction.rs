//! Training-data extraction from a character n-gram model: plant a canary,
//! prompt with its prefix and check whether greedy decoding emits the secret.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttackError, AttackKind, AttackReport};
use crate::synthdata::{render_text, Record, TEMPLATES};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 8;

/// Byte-level n-gram model: counts of the next byte after each
/// `(order - 1)`-byte context.
#[derive(Clone, Debug, PartialEq)]
pub struct CharLm {
    order: usize,
    counts: BTreeMap<Vec<u8>, BTreeMap<u8, u32>>,
    vocabulary: BTreeSet<u8>,
}

impl CharLm {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn context_count(&self) -> usize {
        self.counts.len()
    }

    /// Maximum-likelihood `P(next | context)`; `None` for an unseen context.
    pub fn probability(&self, context: &[u8], next: u8) -> Option<f64> {
        let followers = self.counts.get(context)?;
        let total: u32 = followers.values().sum();
        Some(f64::from(followers.get(&next).copied().unwrap_or(0)) / f64::from(total))
    }

    /// Add-one smoothed log-probability over the observed vocabulary plus
    /// one slot for unseen bytes.
    pub fn log_prob(&self, context: &[u8], next: u8) -> f64 {
        let v = self.vocabulary.len() as f64 + 1.0;
        let (count, total) = match self.counts.get(context) {
            Some(f) => (f64::from(f.get(&next).copied().unwrap_or(0)), f64::from(f.values().sum::<u32>())),
            None => (0.0, 0.0),
        };
        ((count + 1.0) / (total + v)).ln()
    }

    /// Log-likelihood of `continuation` following `prefix`.
    pub fn log_likelihood(&self, prefix: &str, continuation: &str) -> f64 {
        let k = self.order - 1;
        let mut buf: Vec<u8> = prefix.as_bytes().to_vec();
        let mut total = 0.0;
        for &b in continuation.as_bytes() {
            let ctx = &buf[buf.len().saturating_sub(k)..];
            total += self.log_prob(ctx, b);
            buf.push(b);
        }
        total
    }

    /// Most frequent follower of `context`, ties broken toward the lowest byte.
    fn argmax(&self, context: &[u8]) -> Option<u8> {
        let followers = self.counts.get(context)?;
        let mut best: Option<(u8, u32)> = None;
        for (&b, &c) in followers {
            if best.map_or(true, |(_, bc)| c > bc) {
                best = Some((b, c));
            }
        }
        best.map(|(b, _)| b)
    }
}

pub fn charlm_train(corpus: &str, order: usize) -> Result<CharLm, AttackError> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(AttackError::InvalidConfig(format!(
            "n-gram order {order} outside [{MIN_ORDER}, {MAX_ORDER}]"
        )));
    }
    let bytes = corpus.as_bytes();
    if bytes.len() <= order {
        return Err(AttackError::InvalidConfig(format!(
            "corpus of {} bytes is too short for order {order}",
            bytes.len()
        )));
    }
    let mut counts: BTreeMap<Vec<u8>, BTreeMap<u8, u32>> = BTreeMap::new();
    for w in bytes.windows(order) {
        let (ctx, next) = w.split_at(order - 1);
        *counts.entry(ctx.to_vec()).or_default().entry(next[0]).or_insert(0) += 1;
    }
    Ok(CharLm {
        order,
        counts,
        vocabulary: bytes.iter().copied().collect(),
    })
}

/// Greedy continuation of `prefix`, at most `max_len` bytes. Stops early at
/// an unseen context; a prefix shorter than the context gives an empty string.
pub fn charlm_complete(lm: &CharLm, prefix: &str, max_len: usize) -> String {
    let k = lm.order - 1;
    let mut buf: Vec<u8> = prefix.as_bytes().to_vec();
    if buf.len() < k {
        return String::new();
    }
    let start = buf.len();
    while buf.len() - start < max_len {
        match lm.argmax(&buf[buf.len() - k..]) {
            Some(b) => buf.push(b),
            None => break,
        }
    }
    String::from_utf8_lossy(&buf[start..]).into_owned()
}

/// A planted secret: the attacker knows `prefix` and tries to recover `secret`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canary {
    pub prefix: String,
    pub secret: String,
}

impl Canary {
    pub fn new(prefix: impl Into<String>, secret: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
            secret: secret.into(),
        }
    }

    /// Splits `text` after its first `prefix_len` bytes.
    pub fn split(text: &str, prefix_len: usize) -> Result<Self, AttackError> {
        if text.len() < prefix_len || !text.is_char_boundary(prefix_len) {
            return Err(AttackError::InvalidConfig(format!(
                "canary of {} bytes cannot be split at {prefix_len}",
                text.len()
            )));
        }
        Ok(Self::new(&text[..prefix_len], &text[prefix_len..]))
    }

    /// SSN sentence for a synthetic identity, split before the number.
    pub fn from_record(r: &Record) -> Self {
        let sentence = render_text(r, 0).expect("template 0 exists").text;
        let cut = sentence.len() - r.ssn.len() - 1;
        Self::new(&sentence[..cut], &sentence[cut..])
    }

    pub fn text(&self) -> String {
        format!("{}{}", self.prefix, self.secret)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub order: usize,
    pub repetitions: usize,
    pub prefix_len: usize,
    pub decoys: usize,
    pub seed: u64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            order: 5,
            repetitions: 20,
            prefix_len: 0,
            decoys: 100,
            seed: 0,
        }
    }
}

/// Newline-separated sentences rendered from synthetic records until the
/// corpus reaches `target_bytes`.
pub fn build_corpus(target_bytes: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(target_bytes + 128);
    let mut id = 0u64;
    while out.len() < target_bytes {
        let r = Record::synthesize(seed, id);
        let t = rng.gen_range(0..TEMPLATES.len());
        out.push_str(&render_text(&r, t).expect("template in range").text);
        out.push('\n');
        id += 1;
    }
    out
}

/// Inserts `repetitions` copies of the canary as separate lines at seeded
/// line boundaries.
pub fn plant_canary(corpus: &str, canary: &Canary, repetitions: usize, seed: u64) -> String {
    let mut lines: Vec<String> = corpus.lines().map(str::to_string).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = canary.text();
    for _ in 0..repetitions {
        let at = rng.gen_range(0..=lines.len());
        lines.insert(at, text.clone());
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Random strings with the secret's shape: digits stay digits, letters stay
/// letters of the same case, everything else is kept. Never equal to `secret`.
pub fn make_decoys(secret: &str, count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variable = secret.bytes().any(|b| b.is_ascii_alphanumeric());
    let mut out = Vec::with_capacity(count);
    while out.len() < count && variable {
        let d: String = secret
            .chars()
            .map(|c| match c {
                '0'..='9' => char::from(b'0' + rng.gen_range(0..10u8)),
                'a'..='z' => char::from(b'a' + rng.gen_range(0..26u8)),
                'A'..='Z' => char::from(b'A' + rng.gen_range(0..26u8)),
                other => other,
            })
            .collect();
        if d != secret {
            out.push(d);
        }
    }
    out
}

/// 1-based rank of the secret's likelihood among itself and the decoys;
/// ties share the mid rank.
pub fn canary_rank(lm: &CharLm, canary: &Canary, decoys: &[String]) -> f64 {
    let own = lm.log_likelihood(&canary.prefix, &canary.secret);
    let mut above = 0usize;
    let mut tied = 0usize;
    for d in decoys {
        let ll = lm.log_likelihood(&canary.prefix, d);
        if ll > own {
            above += 1;
        } else if ll == own {
            tied += 1;
        }
    }
    1.0 + above as f64 + tied as f64 / 2.0
}

/// Attacks a corpus that may already contain the canary.
pub fn extraction_attack(corpus: &str, canary: &Canary, cfg: &ExtractionConfig) -> Result<AttackReport, AttackError> {
    if canary.secret.is_empty() {
        return Err(AttackError::EmptyInput("canary secret"));
    }
    let lm = charlm_train(corpus, cfg.order)?;
    let completion = charlm_complete(&lm, &canary.prefix, canary.secret.len());
    let extracted = completion == canary.secret;
    let decoys = make_decoys(&canary.secret, cfg.decoys, cfg.seed ^ 0xdec0);
    let rank = canary_rank(&lm, canary, &decoys);

    let mut report = AttackReport::new(AttackKind::Extraction, cfg, cfg.seed);
    report.set_metric("extraction_rate", if extracted { 1.0 } else { 0.0 });
    report.set_metric("canary_rank", rank);
    report.set_metric("candidates", decoys.len() as f64 + 1.0);
    report.set_metric(
        "secret_log_likelihood",
        lm.log_likelihood(&canary.prefix, &canary.secret),
    );
    report.finish()
}

/// Plants `cfg.repetitions` copies of `canary` into `corpus`, trains on the
/// result and prompts with the first `cfg.prefix_len` bytes of the canary.
pub fn extraction_run(corpus: &str, canary: &str, cfg: &ExtractionConfig) -> Result<AttackReport, AttackError> {
    let canary = Canary::split(canary, cfg.prefix_len)?;
    let planted = plant_canary(corpus, &canary, cfg.repetitions, cfg.seed);
    extraction_attack(&planted, &canary, cfg)
}

/// Seeded choice of records for canaries, outside the corpus id range.
pub fn canary_for_seed(seed: u64) -> Canary {
    let mut order: Vec<u64> = (1_000_000..1_000_100).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Canary::from_record(&Record::synthesize(seed, order[0]))
}
