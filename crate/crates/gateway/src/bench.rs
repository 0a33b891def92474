//! Synthetic PII-free documents and perturbed queries for retrieval
//! benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::store::VectorStore;

const WORDS: &[&str] = &[
    "account", "active", "advice", "agenda", "annual", "answer", "appeal", "archive", "audit", "balance",
    "basket", "battery", "bicycle", "blanket", "border", "bottle", "bridge", "budget", "cabinet", "camera",
    "canal", "candle", "carbon", "cargo", "carpet", "castle", "cellar", "cement", "census", "channel",
    "chapter", "charter", "cheese", "circuit", "climate", "clinic", "coastal", "coffee", "column", "comfort",
    "copper", "cotton", "council", "country", "courier", "credit", "crystal", "culture", "current", "custom",
    "dairy", "debate", "decade", "default", "delivery", "density", "deposit", "desert", "design", "device",
    "diagram", "digital", "dinner", "district", "doctor", "domain", "drawer", "driver", "economy", "editor",
    "effort", "engine", "estate", "evening", "exhibit", "factory", "fashion", "feature", "festival", "figure",
    "filter", "finance", "flight", "forest", "formula", "fortune", "freight", "furnace", "gallery", "garden",
    "gateway", "genuine", "glacier", "gravel", "habitat", "harbor", "harvest", "heating", "highway", "holiday",
    "horizon", "hospital", "housing", "imagery", "income", "index", "insight", "island", "journal", "journey",
    "kitchen", "lantern", "laundry", "lecture", "ledger", "library", "license", "lighting", "liquid", "lobby",
    "machine", "magnet", "mandate", "marble", "market", "meadow", "measure", "medical", "member", "message",
    "method", "mineral", "mirror", "mission", "mixture", "module", "monitor", "morning", "motion", "museum",
    "narrative", "network", "notice", "number", "nursery", "object", "ocean", "office", "orchard", "outline",
    "output", "package", "palace", "panel", "parcel", "pattern", "payment", "pencil", "pension", "pepper",
    "permit", "picture", "pigment", "pipeline", "planet", "plastic", "platform", "pocket", "poetry", "portal",
    "poster", "pottery", "powder", "premium", "printer", "problem", "process", "profile", "program", "project",
    "protein", "quarter", "question", "railway", "rainfall", "reading", "receipt", "record", "region", "remote",
    "report", "research", "reserve", "resort", "result", "ribbon", "routine", "saddle", "salary", "sample",
    "satellite", "scanner", "schedule", "science", "season", "sector", "segment", "seminar", "service", "session",
    "shelter", "signal", "silver", "sketch", "socket", "soldier", "source", "spring", "stadium", "station",
    "storage", "strategy", "studio", "subject", "summary", "surface", "survey", "system", "tablet", "teacher",
    "theatre", "thunder", "timber", "tissue", "tourism", "traffic", "transit", "trolley", "tunnel", "uniform",
    "update", "utility", "vaccine", "valley", "vehicle", "venture", "version", "village", "vintage", "virtual",
    "volume", "voyage", "wallet", "warrant", "weather", "website", "welfare", "window", "winter", "workshop",
];

/// `n` documents of 12 to 20 lowercase words, no PII.
pub fn synthetic_docs(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(12..=20);
            (0..len)
                .map(|_| *WORDS.choose(&mut rng).expect("non-empty"))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Replaces `round(frac · chars)` distinct character positions with random
/// lowercase letters different from the original.
pub fn perturb(text: &str, frac: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chars: Vec<char> = text.chars().collect();
    let k = (frac * chars.len() as f64).round() as usize;
    let mut positions: Vec<usize> = (0..chars.len()).collect();
    positions.shuffle(&mut rng);
    for &i in positions.iter().take(k) {
        let orig = chars[i];
        chars[i] = loop {
            let c = char::from(b'a' + rng.gen_range(0..26u8));
            if c != orig {
                break c;
            }
        };
    }
    chars.into_iter().collect()
}

/// Fraction of perturbed queries whose top hit is their source document.
/// Documents are indexed as `doc-{i:06}`.
pub fn recall_at_1(docs: &[String], frac: f64, seed: u64) -> Result<f64, crate::GatewayError> {
    if docs.is_empty() {
        return Ok(0.0);
    }
    let mut store = VectorStore::new(false);
    for (i, d) in docs.iter().enumerate() {
        store.index_put(&format!("doc-{i:06}"), d)?;
    }
    let hits = docs
        .iter()
        .enumerate()
        .filter(|(i, d)| {
            let q = perturb(d, frac, seed.wrapping_add(*i as u64));
            store.knn(&q, 1).hits.first().is_some_and(|h| h.doc_id == format!("doc-{i:06}"))
        })
        .count();
    Ok(hits as f64 / docs.len() as f64)
}
