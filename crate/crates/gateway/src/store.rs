//! In-memory vector index with exact brute-force cosine search.

use std::collections::HashMap;

use privlab_pii::{detect, Action, RedactionPolicy};
use serde::Serialize;

use crate::embed::{cosine, embed};
use crate::preprocess::preprocess;
use crate::GatewayError;

#[derive(Clone, Debug, PartialEq)]
pub struct DocEntry {
    pub doc_id: String,
    pub text: String,
    pub embedding: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KnnResult {
    pub hits: Vec<Hit>,
    /// `k` exceeded the store size; every document was returned.
    pub truncated: bool,
}

#[derive(Clone, Debug, Default)]
pub struct VectorStore {
    docs: Vec<DocEntry>,
    by_id: HashMap<String, usize>,
    lowercase: bool,
}

impl VectorStore {
    pub fn new(lowercase: bool) -> Self {
        Self {
            lowercase,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&DocEntry> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn docs(&self) -> &[DocEntry] {
        &self.docs
    }

    /// Indexes already redacted text; any detectable span is refused.
    pub fn index_put(&mut self, doc_id: &str, text: &str) -> Result<(), GatewayError> {
        self.insert(doc_id, text, |_| false)
    }

    /// As [`index_put`](Self::index_put), tolerating kinds the policy allows.
    pub fn index_put_with(&mut self, doc_id: &str, text: &str, policy: &RedactionPolicy) -> Result<(), GatewayError> {
        self.insert(doc_id, text, |k| policy.action(k) == Action::Allow)
    }

    fn insert(
        &mut self,
        doc_id: &str,
        text: &str,
        allowed: impl Fn(privlab_pii::PiiKind) -> bool,
    ) -> Result<(), GatewayError> {
        if doc_id.is_empty() {
            return Err(GatewayError::BadRequest("empty doc_id".into()));
        }
        let text = preprocess(text, self.lowercase).text;
        if let Some(span) = detect(&text).into_iter().find(|s| !allowed(s.kind)) {
            return Err(GatewayError::Unredacted(span.kind));
        }
        let entry = DocEntry {
            doc_id: doc_id.to_string(),
            embedding: embed(&text),
            text,
        };
        match self.by_id.get(doc_id) {
            Some(&i) => self.docs[i] = entry,
            None => {
                self.by_id.insert(doc_id.to_string(), self.docs.len());
                self.docs.push(entry);
            }
        }
        Ok(())
    }

    /// Top `k` by cosine, descending, ties broken by lower `doc_id`.
    pub fn knn(&self, query: &str, k: usize) -> KnnResult {
        let q = embed(&preprocess(query, self.lowercase).text);
        self.knn_vec(&q, k)
    }

    pub fn knn_vec(&self, q: &[f64], k: usize) -> KnnResult {
        let mut scored: Vec<(f64, &DocEntry)> = self.docs.iter().map(|d| (cosine(q, &d.embedding), d)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.doc_id.cmp(&b.1.doc_id)));
        scored.truncate(k);
        KnnResult {
            truncated: k > self.docs.len(),
            hits: scored
                .into_iter()
                .map(|(score, d)| Hit {
                    doc_id: d.doc_id.clone(),
                    score,
                    text: d.text.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_query_ranks_first() {
        let mut s = VectorStore::new(false);
        s.index_put("a", "the river flooded the lower fields").unwrap();
        s.index_put("b", "a recipe for lemon cake").unwrap();
        let r = s.knn("a recipe for lemon cake", 1);
        assert_eq!(r.hits[0].doc_id, "b");
        assert!((r.hits[0].score - 1.0).abs() < 1e-12);
        assert!(!r.truncated);
        assert!(s.knn("x", 5).truncated);
    }

    #[test]
    fn empty_store_and_ties() {
        let mut s = VectorStore::new(false);
        assert!(s.knn("anything", 3).hits.is_empty());
        s.index_put("d2", "same text").unwrap();
        s.index_put("d1", "same text").unwrap();
        let ids: Vec<_> = s.knn("same text", 2).hits.into_iter().map(|h| h.doc_id).collect();
        assert_eq!(ids, ["d1", "d2"]);
    }

    #[test]
    fn unredacted_text_is_refused() {
        let mut s = VectorStore::new(false);
        let e = s.index_put("x", "call 555-123-4567 now").unwrap_err();
        assert!(matches!(e, GatewayError::Unredacted(privlab_pii::PiiKind::Phone)));
        assert!(s.is_empty());
        s.index_put("x", "call [PHONE] now").unwrap();
        s.index_put("x", "replaced").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("x").unwrap().text, "replaced");
    }
}
