//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use privcli::eval::EvalConfig;
use privcli::risk::{risk_score, Level};
use privcli::run_eval;
use privlab_core::attacks::*;
use privlab_core::dp::{laplace_density, laplace_sample, randomized_response};
use privlab_core::nn::{mse_loss, Activation, LayerSpec, Matrix, Network};
use privlab_core::synthdata::{generate, generate_range, render_text, Field, TEMPLATES};
use privlab_gateway::bench::{recall_at_1, synthetic_docs};
use privlab_gateway::ratelimit::RateLimitConfig;
use privlab_gateway::{
    embed, AuditLog, Gateway, GatewayConfig, KeyStore, ManualClock, MockBackend, RateLimiter,
    VectorStore,
};
use privlab_pii::{detect, sanitize, PiiKind, Principal, RedactionPolicy, Role, Vault, VaultKey};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

// 1 ---------------------------------------------------------------------------

fn gradient_oracle() -> Outcome {
    const H: f64 = 1e-5;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let acts = [Activation::Identity, Activation::Relu, Activation::Sigmoid];
    let mut worst: f64 = 0.0;
    let mut redrawn = 0;
    for case in 0..50u64 {
        let depth = rng.gen_range(1..=3);
        let dims: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=8)).collect();
        let specs: Vec<LayerSpec> = (0..depth)
            .map(|i| LayerSpec::new(dims[i], dims[i + 1], acts[rng.gen_range(0..3)]))
            .collect();
        let net = ok(Network::new(&specs, case))?;
        let batch = rng.gen_range(1..=4);
        let (din, dout) = (net.in_dim(), net.out_dim());
        // A ReLU sitting exactly on its kink has no derivative to compare
        // against; such draws are replaced, judged from loss values alone.
        let mut attempt = 0;
        loop {
            let x = ok(Matrix::from_vec(
                batch,
                din,
                (0..batch * din).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            ))?;
            let y = ok(Matrix::from_vec(
                batch,
                dout,
                (0..batch * dout).map(|_| rng.gen_range(0.0..1.0)).collect(),
            ))?;
            match compare_gradients(&net, &x, &y, H)? {
                Some(rel) => {
                    check(rel < 1e-4, || format!("case {case}: rel error {rel:e}"))?;
                    worst = worst.max(rel);
                    break;
                }
                None => {
                    redrawn += 1;
                    attempt += 1;
                    check(attempt < 20, || {
                        format!("case {case}: no differentiable batch")
                    })?;
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "worst rel error {worst:.1e}, {redrawn} kink batches redrawn, {secs:.2} s"
    ))
}

/// Worst relative error between backprop and central differences, or `None`
/// when some parameter sits on a kink (one-sided differences disagree).
fn compare_gradients(net: &Network, x: &Matrix, y: &Matrix, h: f64) -> Result<Option<f64>, String> {
    let mut net = net.clone();
    let out = ok(net.forward(x))?;
    let (l0, g) = ok(mse_loss(&out, y))?;
    ok(net.backward(&g))?;
    let analytic = net.gradients();
    let params = net.parameters();
    let mut probe = net.clone();
    let mut loss = |p: &[f64]| -> Result<f64, String> {
        ok(probe.set_parameters(p))?;
        Ok(ok(mse_loss(&ok(probe.predict(x))?, y))?.0)
    };
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut p = params.clone();
        p[i] += h;
        let up = loss(&p)?;
        p[i] -= 2.0 * h;
        let down = loss(&p)?;
        let (fwd, bwd) = ((up - l0) / h, (l0 - down) / h);
        if (fwd - bwd).abs() > 1e-3 * fwd.abs().max(bwd.abs()).max(1.0) {
            return Ok(None);
        }
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    Ok(Some(worst))
}

// 2 ---------------------------------------------------------------------------

fn mia_auc(epochs: usize) -> Result<f64, String> {
    let mut aucs = Vec::new();
    for seed in SEEDS {
        let train = ok(generate_range(0, 64, seed))?;
        let hold = ok(generate_range(64, 64, seed))?;
        let cfg = MiaConfig {
            epochs,
            latent_dim: 2,
            hidden_dim: 8,
            seed,
            ..MiaConfig::default()
        };
        aucs.push(
            ok(mia_run(&train, &hold, &cfg))?
                .metric("auc")
                .ok_or("no auc")?,
        );
    }
    Ok(median(&aucs))
}

fn mia_effect() -> Outcome {
    let started = Instant::now();
    let overfit = mia_auc(2000)?;
    let early = mia_auc(50)?;
    let secs = started.elapsed().as_secs_f64();
    check(overfit >= 0.70, || {
        format!("overfit median AUC {overfit:.3} < 0.70")
    })?;
    check(early <= 0.60, || {
        format!("early-stopped median AUC {early:.3} > 0.60")
    })?;
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "AUC 2000 epochs {overfit:.3}, 50 epochs {early:.3}, {secs:.1} s"
    ))
}

// 3 ---------------------------------------------------------------------------

fn inversion() -> Outcome {
    let net = ok(train_inversion_target(
        1000,
        &ClassifierConfig::default(),
        0,
    ))?;
    let before: Vec<u64> = net.parameters().iter().map(|v| v.to_bits()).collect();
    let cfg = InversionConfig {
        steps: 1000,
        ..InversionConfig::default()
    };
    let mut worst_gap: f64 = 0.0;
    for y in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let r = ok(inversion_run(&net, y, None, &cfg))?;
        let x = r
            .artifacts
            .recovered_input
            .clone()
            .ok_or("no recovered input")?;
        let fx = ok(net.predict(&ok(Matrix::from_vec(1, x.len(), x))?))?.get(0, 0);
        let gap = (fx - y).abs();
        worst_gap = worst_gap.max(gap);
        check(gap <= 1e-3, || format!("y*={y}: |f(x̂)-y*| = {gap:e}"))?;
    }
    let after: Vec<u64> = net.parameters().iter().map(|v| v.to_bits()).collect();
    check(before == after, || "model weights changed".into())?;

    let mut worst_input: f64 = 0.0;
    for (w, b) in [(5.0, -2.0), (-3.0, 1.0), (8.0, -4.0)] {
        let m = monotone_model(w, b);
        for y in [0.2, 0.4, 0.6, 0.8] {
            let a = (logit(y) - b) / w;
            if !(0.0..=1.0).contains(&a) {
                continue;
            }
            let r = ok(inversion_run(&m, y, None, &cfg))?;
            let got = r
                .artifacts
                .recovered_input
                .as_ref()
                .ok_or("no recovered input")?[0];
            worst_input = worst_input.max((got - a).abs());
            check((got - a).abs() <= 0.05, || {
                format!("w={w} b={b} y={y}: x̂={got} closed form {a}")
            })?;
        }
    }
    Ok(format!(
        "worst output gap {worst_gap:.1e}, worst monotone input error {worst_input:.1e}"
    ))
}

fn logit(y: f64) -> f64 {
    (y / (1.0 - y)).ln()
}

// 4 ---------------------------------------------------------------------------

fn poisoning() -> Outcome {
    let mut drops = Vec::new();
    for seed in SEEDS {
        let ds = ok(generate(1000, seed))?;
        let attacked = PoisoningConfig {
            rate: 0.5,
            noise_std: 0.2,
            seed,
            ..PoisoningConfig::default()
        };
        let control = PoisoningConfig {
            rate: 0.0,
            ..attacked.clone()
        };
        let c = ok(poisoning_run(&ds, &control))?;
        check(c.metric("models_identical") == Some(1.0), || {
            format!("seed {seed}: rate-0 model differs from clean")
        })?;
        let p = ok(poisoning_run(&ds, &attacked))?;
        let drop = c.metric("accuracy_poisoned").ok_or("missing accuracy")?
            - p.metric("accuracy_poisoned").ok_or("missing accuracy")?;
        drops.push(drop);
    }
    let m = median(&drops);
    check(m >= 0.15, || {
        format!("median drop {m:.3} < 0.15 ({drops:?})")
    })?;
    Ok(format!("median accuracy drop {m:.3}"))
}

// 5 ---------------------------------------------------------------------------

fn mask_gateway() -> (Gateway, Arc<MockBackend>) {
    let mut cfg = GatewayConfig {
        key_pepper: "acceptance".into(),
        ..GatewayConfig::default()
    };
    cfg.rag.enabled = false;
    cfg.rate_limit.capacity = 1e12;
    cfg.dp.seed = Some(1);
    let mut keys = KeyStore::new(cfg.key_pepper.as_bytes().to_vec());
    keys.add_key(Principal::new("admin-1", Role::Admin, "Admin"), "sk-admin");
    keys.add_key(Principal::new("guest-1", Role::Guest, "Guest"), "sk-guest");
    let backend = Arc::new(MockBackend::new());
    let gw = Gateway::new(
        cfg,
        keys,
        RedactionPolicy::default(),
        None,
        backend.clone(),
        Arc::new(ManualClock::new(0.0)),
        AuditLog::in_memory(),
    )
    .expect("gateway");
    (gw, backend)
}

fn extraction() -> Outcome {
    let mut redacted_hits = 0;
    for seed in SEEDS {
        let corpus = build_corpus(5000, seed);
        let canary = canary_for_seed(seed);
        let cfg = ExtractionConfig {
            order: 5,
            repetitions: 20,
            decoys: 100,
            prefix_len: canary.prefix.len(),
            seed,
        };
        let hit = ok(extraction_run(&corpus, &canary.text(), &cfg))?;
        check(hit.metric("extraction_rate") == Some(1.0), || {
            format!("seed {seed}: planted canary not extracted")
        })?;
        check(hit.metric("canary_rank") == Some(1.0), || {
            format!("seed {seed}: rank {:?}", hit.metric("canary_rank"))
        })?;
        let zero = ExtractionConfig {
            repetitions: 0,
            ..cfg.clone()
        };
        let miss = ok(extraction_run(&corpus, &canary.text(), &zero))?;
        check(miss.metric("extraction_rate") == Some(0.0), || {
            format!("seed {seed}: extracted with 0 repetitions")
        })?;

        let planted = plant_canary(&corpus, &canary, 20, seed);
        let (gw, backend) = mask_gateway();
        for line in planted.lines() {
            ok(gw.handle_chat(Some("sk-guest"), line.as_bytes()))?;
        }
        let redacted = backend.calls().join("\n");
        let r = ok(extraction_attack(&redacted, &canary, &cfg))?;
        if r.metric("extraction_rate") == Some(0.0) {
            redacted_hits += 1;
        }
    }
    check(redacted_hits == SEEDS.len(), || {
        format!(
            "gateway-redacted corpus leaked in {} seeds",
            5 - redacted_hits
        )
    })?;
    Ok("rate 1 / rank 1 planted, rate 0 unplanted, rate 0 redacted in 5/5 seeds".into())
}

// 6 ---------------------------------------------------------------------------

fn property() -> Outcome {
    let started = Instant::now();
    let prevalences = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let mut per_p: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for seed in SEEDS {
        let cfg = PropertyConfig {
            shadow_count: 16,
            seed,
            ..PropertyConfig::default()
        };
        let est = ok(PropertyEstimator::fit(&cfg))?;
        for (i, &p) in prevalences.iter().enumerate() {
            let target = ok(train_property_target(p, &cfg, seed))?;
            let r = ok(property_attack(&est, &target, p, &cfg))?;
            per_p
                .entry(i)
                .or_default()
                .push(r.metric("property_mae").ok_or("no mae")?);
        }
    }
    let mut worst: f64 = 0.0;
    for (i, maes) in &per_p {
        let m = median(maes);
        worst = worst.max(m);
        check(m <= 0.15, || {
            format!("p={}: median MAE {m:.3}", prevalences[*i])
        })?;
    }
    let secs = started.elapsed().as_secs_f64();
    check(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("worst median MAE {worst:.3}, {secs:.1} s"))
}

// 7 ---------------------------------------------------------------------------

fn field_kind(f: Field) -> Option<PiiKind> {
    match f {
        Field::Email => Some(PiiKind::Email),
        Field::Ssn => Some(PiiKind::Ssn),
        Field::CreditCard => Some(PiiKind::CreditCard),
        Field::Phone => Some(PiiKind::Phone),
        _ => None,
    }
}

fn pii_engine() -> Outcome {
    let ds = ok(generate(1000, 1234))?;
    let mut tally: BTreeMap<PiiKind, (usize, usize, usize)> = BTreeMap::new();
    let masking = RedactionPolicy::default();
    for r in &ds.records {
        for t in 0..TEMPLATES.len() {
            let rt = ok(render_text(r, t))?;
            let truth: Vec<(PiiKind, usize, usize)> = rt
                .spans
                .iter()
                .filter_map(|s| field_kind(s.field).map(|k| (k, s.range.start, s.range.end)))
                .collect();
            for &(k, _, _) in &truth {
                tally.entry(k).or_default().1 += 1;
            }
            for s in detect(&rt.text)
                .into_iter()
                .filter(|s| s.kind != PiiKind::PersonName)
            {
                let e = tally.entry(s.kind).or_default();
                e.2 += 1;
                if truth.contains(&(s.kind, s.start, s.end)) {
                    e.0 += 1;
                }
            }
            let once = ok(sanitize(&rt.text, &masking, None))?.text;
            let twice = ok(sanitize(&once, &masking, None))?.text;
            check(once == twice, || {
                format!("redaction not idempotent on {:?}", rt.text)
            })?;
        }
    }
    let mut summary = Vec::new();
    for kind in [
        PiiKind::Email,
        PiiKind::Ssn,
        PiiKind::CreditCard,
        PiiKind::Phone,
    ] {
        let (tp, gt, det) = tally.get(&kind).copied().unwrap_or_default();
        let recall = tp as f64 / gt.max(1) as f64;
        let precision = tp as f64 / det.max(1) as f64;
        check(gt > 0 && recall >= 0.99, || {
            format!("{kind} recall {recall:.4}")
        })?;
        check(precision >= 0.95, || {
            format!("{kind} precision {precision:.4}")
        })?;
        summary.push(format!("{kind} R={recall:.3} P={precision:.3}"));
    }

    let admin = Principal::new("admin-1", Role::Admin, "Admin");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("vault.bin");
    let key = VaultKey::from_bytes([0x42; 32]);
    let vault = ok(Vault::open(&path, &key))?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut stored = Vec::new();
    for i in 0..1000 {
        let mut v = vec![0u8; rng.gen_range(0..=256)];
        rng.fill_bytes(&mut v);
        v.extend_from_slice(format!("value-{i:04}").as_bytes());
        stored.push((ok(vault.put(PiiKind::ALL[i % PiiKind::ALL.len()], &v))?, v));
    }
    for (t, v) in &stored {
        check(&ok(vault.resolve(t, &admin))? == v, || {
            format!("round trip failed for {t}")
        })?;
    }
    ok(vault.persist())?;
    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    for (_, v) in &stored {
        let needle = &v[v.len() - 10..];
        check(!bytes.windows(needle.len()).any(|w| w == needle), || {
            "plaintext found in vault file".into()
        })?;
    }

    let small_path = dir.path().join("small.bin");
    let small = ok(Vault::open(&small_path, &key))?;
    let tokens: Vec<String> = ["123-45-6789", "4111111111111111", "a.b@example.com"]
        .iter()
        .map(|v| ok(small.put(PiiKind::Ssn, v)))
        .collect::<Result<_, _>>()?;
    ok(small.persist())?;
    let clean = std::fs::read(&small_path).map_err(|e| e.to_string())?;
    for i in 0..clean.len() {
        let mut t = clean.clone();
        t[i] ^= 0x80;
        std::fs::write(&small_path, &t).map_err(|e| e.to_string())?;
        if let Ok(v) = Vault::open(&small_path, &key) {
            let all_ok = tokens.iter().all(|tok| v.resolve(tok, &admin).is_ok());
            check(!all_ok, || format!("tampered byte {i} went unnoticed"))?;
        }
    }
    Ok(summary.join(", "))
}

// 8 ---------------------------------------------------------------------------

fn dp() -> Outcome {
    const N: u64 = 100_000;
    for b in [0.5, 1.0, 4.0] {
        let xs: Vec<f64> = (0..N)
            .map(|i| laplace_sample(b, 314, i))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mean = xs.iter().sum::<f64>() / N as f64;
        let mean_abs = xs.iter().map(|x| x.abs()).sum::<f64>() / N as f64;
        check(mean.abs() <= 0.05 * b, || format!("b={b}: mean {mean}"))?;
        check((mean_abs - b).abs() <= 0.02 * b, || {
            format!("b={b}: E|X| {mean_abs}")
        })?;
    }
    for eps in [0.1, 1.0, 3.0] {
        let b = 1.0 / eps;
        for out in [-10.0, 2.0, 7.5, 8.0, 30.0] {
            let r = laplace_density(out, 7.0, b) / laplace_density(out, 8.0, b);
            let bound = eps.exp() * (1.0 + 1e-12);
            check(r <= bound && 1.0 / r <= bound, || {
                format!("ε={eps} x={out}: ratio {r}")
            })?;
        }
    }
    let truthful = (0..N)
        .map(|i| randomized_response(false, 1.0, 2718, i))
        .collect::<Result<Vec<bool>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|&b| !b)
        .count();
    let frac = truthful as f64 / N as f64;
    check((frac - 0.731).abs() <= 0.01, || {
        format!("truthful fraction {frac}")
    })?;
    Ok(format!("randomized response truthful fraction {frac:.4}"))
}

// 9 ---------------------------------------------------------------------------

fn bucket_sim(capacity: f64, rate: f64, times: &[f64]) -> Vec<Option<f64>> {
    let mut level = capacity;
    let mut last = times[0];
    times
        .iter()
        .map(|&t| {
            level = (level + (t - last) * rate).min(capacity);
            last = t;
            if level >= 1.0 {
                level -= 1.0;
                None
            } else {
                Some((1.0 - level) / rate)
            }
        })
        .collect()
}

fn gateway() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for case in 0..100 {
        let capacity = rng.gen_range(1..=12) as f64;
        let rate = rng.gen_range(0.25..4.0);
        let mut t = 0.0;
        let times: Vec<f64> = (0..80)
            .map(|_| {
                t += if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..2.0)
                };
                t
            })
            .collect();
        let clock = ManualClock::new(times[0]);
        let rl = RateLimiter::new(
            RateLimitConfig {
                capacity,
                refill_per_sec: rate,
            },
            Arc::new(clock.clone()),
        );
        let got: Vec<Option<f64>> = times
            .iter()
            .map(|&t| {
                clock.set(t);
                rl.check("key").err()
            })
            .collect();
        check(got == bucket_sim(capacity, rate, &times), || {
            format!("bucket schedule {case} diverged")
        })?;
    }

    let (gw, backend) = mask_gateway();
    let ds = ok(generate(200, 8))?;
    let mut sent = 0;
    for r in &ds.records {
        for t in 0..TEMPLATES.len() {
            ok(gw.handle_chat(Some("sk-guest"), ok(render_text(r, t))?.text.as_bytes()))?;
            sent += 1;
        }
    }
    let calls = backend.calls();
    check(calls.len() == sent, || {
        format!("{} backend calls for {sent} requests", calls.len())
    })?;
    let leaks: usize = calls.iter().map(|c| detect(c).len()).sum();
    check(leaks == 0, || {
        format!("{leaks} PII spans reached the backend")
    })?;

    let before = backend.call_count();
    let unauth = gw.handle_chat(Some("sk-nope"), b"SSN 123-45-6789");
    let forbidden = gw.handle_metrics(Some("sk-guest"), 60);
    check(unauth.is_err() && forbidden.is_err(), || {
        "rejections succeeded".into()
    })?;
    let mut cfg = GatewayConfig::default();
    cfg.rate_limit.capacity = 1.0;
    let mut keys = KeyStore::new(b"p".to_vec());
    keys.add_key(Principal::new("g", Role::Guest, "G"), "k");
    let limited_backend = Arc::new(MockBackend::new());
    let limited = ok(Gateway::new(
        cfg,
        keys,
        RedactionPolicy::default(),
        None,
        limited_backend.clone(),
        Arc::new(ManualClock::new(0.0)),
        AuditLog::in_memory(),
    ))?;
    ok(limited.handle_chat(Some("k"), b"one"))?;
    check(limited.handle_chat(Some("k"), b"two").is_err(), || {
        "second request not limited".into()
    })?;
    check(
        backend.call_count() == before && limited_backend.call_count() == 1,
        || "rejected request reached backend".into(),
    )?;

    for case in 0..100u64 {
        let n = rng.gen_range(1..50);
        let docs = synthetic_docs(n, case);
        let mut store = VectorStore::new(false);
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        for &i in &ids {
            ok(store.index_put(&format!("doc-{i:03}"), &docs[i]))?;
        }
        let query = &synthetic_docs(1, 5000 + case)[0];
        let k = rng.gen_range(1..=n + 3);
        let q = embed(query);
        let mut naive: Vec<(String, f64)> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                (
                    format!("doc-{i:03}"),
                    embed(d).iter().zip(&q).map(|(a, b)| a * b).sum(),
                )
            })
            .collect();
        naive.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        naive.truncate(k);
        let got: Vec<(String, f64)> = store
            .knn(query, k)
            .hits
            .into_iter()
            .map(|h| (h.doc_id, h.score))
            .collect();
        check(got.len() == naive.len(), || {
            format!("store {case}: {} hits vs {}", got.len(), naive.len())
        })?;
        for ((gi, gs), (ni, ns)) in got.iter().zip(&naive) {
            check(gi == ni && (gs - ns).abs() <= 1e-12, || {
                format!("store {case}: {gi}/{gs} vs {ni}/{ns}")
            })?;
        }
    }

    let docs = synthetic_docs(1000, 77);
    let recall = ok(recall_at_1(&docs, 0.10, 78))?;
    check(recall >= 0.9, || format!("recall@1 {recall:.3}"))?;

    let mut cfg = GatewayConfig::default();
    cfg.rate_limit.capacity = 1e12;
    let mut keys = KeyStore::new(b"p".to_vec());
    keys.add_key(Principal::new("a", Role::Admin, "A"), "admin");
    let rag = ok(Gateway::new(
        cfg,
        keys,
        RedactionPolicy::default(),
        None,
        Arc::new(MockBackend::new()),
        Arc::new(ManualClock::new(0.0)),
        AuditLog::in_memory(),
    ))?;
    for (i, d) in docs.iter().enumerate() {
        ok(rag.handle_docs(Some("admin"), &format!("doc-{i:04}"), d.as_bytes()))?;
    }
    let mut ms: Vec<f64> = synthetic_docs(200, 79)
        .iter()
        .map(|q| {
            let t = Instant::now();
            rag.handle_chat(Some("admin"), q.as_bytes())
                .map(|_| t.elapsed().as_secs_f64() * 1e3)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ms.sort_by(f64::total_cmp);
    let p95 = ms[(0.95 * (ms.len() - 1) as f64).round() as usize];
    check(p95 < 50.0, || format!("p95 {p95:.2} ms"))?;
    Ok(format!(
        "{sent} requests clean, recall@1 {recall:.3}, p95 {p95:.3} ms"
    ))
}

// 10 --------------------------------------------------------------------------

fn determinism() -> Outcome {
    let mut cfg = EvalConfig::default();
    cfg.retrieval.measure_timing = false;
    let a = ok(run_eval(&cfg))?.deterministic_json();
    let b = ok(run_eval(&cfg))?.deterministic_json();
    check(a == b, || "eval reports differ".into())?;

    use Level::*;
    let table = [
        [Low, Low, Medium],
        [Low, Medium, High],
        [Medium, High, High],
    ];
    for (i, s) in Level::ALL.iter().enumerate() {
        for (j, e) in Level::ALL.iter().enumerate() {
            let got = risk_score(*s, *e).risk;
            check(got == table[i][j], || format!("risk({s}, {e}) = {got}"))?;
        }
    }
    Ok(format!(
        "{} byte report reproduced, 9/9 risk cells",
        a.len()
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gradient oracle", gradient_oracle),
        ("membership inference", mia_effect),
        ("model inversion", inversion),
        ("poisoning", poisoning),
        ("extraction", extraction),
        ("property inference", property),
        ("pii engine", pii_engine),
        ("differential privacy", dp),
        ("gateway", gateway),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let line = match &result {
            Ok(detail) => format!("criterion {:>2} {name}: PASS ({detail})\n", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("criterion {:>2} {name}: FAIL ({why})\n", i + 1)
            }
        };
        out.write_all(line.as_bytes()).unwrap();
        out.flush().unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
