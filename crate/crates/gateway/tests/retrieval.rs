use privlab_gateway::bench::{perturb, recall_at_1, synthetic_docs};
use privlab_gateway::{embed, preprocess, VectorStore, EMBED_DIM};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn naive_knn(docs: &[(String, String)], query: &str, k: usize) -> Vec<(String, f64)> {
    let q = embed(query);
    let mut latest: Vec<(String, String)> = Vec::new();
    for (id, text) in docs {
        match latest.iter_mut().find(|(i, _)| i == id) {
            Some(slot) => slot.1 = text.clone(),
            None => latest.push((id.clone(), text.clone())),
        }
    }
    let mut scored: Vec<(String, f64)> = latest
        .into_iter()
        .map(|(id, text)| {
            let e = embed(&text);
            let mut dot = 0.0;
            for i in 0..EMBED_DIM {
                dot += q[i] * e[i];
            }
            (id, dot)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

#[test]
fn knn_equals_naive_recomputation_on_random_stores() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..100 {
        let n = rng.gen_range(0..60);
        let pool = synthetic_docs(n.max(1) / 2 + 1, case);
        let mut docs = Vec::new();
        let mut store = VectorStore::new(false);
        for _ in 0..n {
            let id = format!("d{}", rng.gen_range(0..n.max(1) * 2));
            let text = pool.choose(&mut rng).unwrap().clone();
            store.index_put(&id, &text).unwrap();
            docs.push((id, text));
        }
        let query = if rng.gen_bool(0.5) {
            pool[0].clone()
        } else {
            synthetic_docs(1, 10_000 + case)[0].clone()
        };
        let k = rng.gen_range(0..store.len() + 5);
        let got = store.knn(&query, k);
        let want = naive_knn(&docs, &query, k);
        let got_pairs: Vec<(String, f64)> = got.hits.iter().map(|h| (h.doc_id.clone(), h.score)).collect();
        assert_eq!(got_pairs, want, "case {case}");
        assert_eq!(got.truncated, k > store.len());
    }
}

#[test]
fn perturbed_query_recall_at_1() {
    let docs = synthetic_docs(1000, 5);
    let r = recall_at_1(&docs, 0.10, 6).unwrap();
    println!("recall@1 = {r:.3}");
    assert!(r >= 0.9, "recall@1 {r}");
}

#[test]
fn one_word_edit_is_closer_than_unrelated_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let base = synthetic_docs(50, 1);
    let other = synthetic_docs(50, 2);
    let vocab: Vec<String> = synthetic_docs(200, 3)
        .iter()
        .flat_map(|d| d.split(' ').map(str::to_string).collect::<Vec<_>>())
        .collect();
    for (t, u) in base.iter().zip(&other) {
        let mut words: Vec<&str> = t.split(' ').collect();
        let i = rng.gen_range(0..words.len());
        let replacement = vocab.iter().find(|w| w.as_str() != words[i]).unwrap().clone();
        words[i] = &replacement;
        let edited = words.join(" ");
        let (et, ee, eu) = (embed(t), embed(&edited), embed(u));
        let cos = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!(cos(&et, &ee) > cos(&et, &eu), "{t:?}");
    }
}

#[test]
fn composed_and_decomposed_inputs_normalize_identically() {
    let pairs = [
        ("caf\u{e9}", "cafe\u{301}"),
        ("\u{c5}ngstr\u{f6}m", "A\u{30a}ngstro\u{308}m"),
        ("pi\u{f1}ata", "pin\u{303}ata"),
        ("\u{1e69}", "s\u{323}\u{307}"),
    ];
    for (composed, decomposed) in pairs {
        let a = preprocess(composed, false);
        let b = preprocess(decomposed, false);
        assert_eq!(a.text.as_bytes(), composed.as_bytes());
        assert_eq!(a.text.as_bytes(), b.text.as_bytes());
        assert_eq!(embed(&a.text), embed(&b.text));
    }
}

proptest! {
    #[test]
    fn preprocess_is_idempotent(s in "\\PC{0,80}", lower in any::<bool>()) {
        let once = preprocess(&s, lower);
        prop_assert_eq!(preprocess(&once.text, lower), once);
    }

    #[test]
    fn embeddings_are_unit_vectors(s in "\\PC{0,120}") {
        let v = embed(&s);
        prop_assert_eq!(v.len(), EMBED_DIM);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn perturbation_keeps_length(s in "[a-z ]{0,100}", frac in 0.0f64..1.0, seed in any::<u64>()) {
        prop_assert_eq!(perturb(&s, frac, seed).chars().count(), s.chars().count());
    }
}
