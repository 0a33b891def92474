mod common;

use std::time::Instant;

use common::{harness, unlimited, ADMIN, ANALYST, GUEST};
use privlab_core::synthdata::{generate, render_text, TEMPLATES};
use privlab_gateway::bench::synthetic_docs;
use privlab_gateway::{Decision, GatewayError, MockBackend};
use privlab_pii::{detect, Action, PiiKind, RedactionPolicy};

fn pseudonymize_all() -> RedactionPolicy {
    RedactionPolicy::uniform(Action::Pseudonymize)
}

#[test]
fn guest_ssn_is_masked_before_the_backend() {
    let h = harness(RedactionPolicy::default(), |_| {});
    let r = h.gw.handle_chat(Some(GUEST), b"My SSN is 123-45-6789").unwrap();
    assert_eq!(h.backend.calls(), ["My SSN is [SSN]"]);
    assert_eq!(r.text, MockBackend::echo("My SSN is [SSN]"));
    assert_eq!(r.redaction_summary, [(PiiKind::Ssn, 1)].into());
}

#[test]
fn analyst_gets_pseudonyms_rehydrated_and_guest_does_not() {
    let h = harness(pseudonymize_all(), |_| {});
    let msg = "Write to jane.doe@example.com today";
    let r = h.gw.handle_chat(Some(ANALYST), msg.as_bytes()).unwrap();
    let sent = &h.backend.calls()[0];
    assert!(!sent.contains("jane.doe@example.com"));
    let token = sent.split(' ').find(|w| w.starts_with("⟦EMAIL_")).unwrap();
    assert_eq!(r.text, MockBackend::echo(sent).replace(token, "jane.doe@example.com"));

    let g = h.gw.handle_chat(Some(GUEST), msg.as_bytes()).unwrap();
    assert!(g.text.contains("⟦EMAIL_"));
    assert!(!g.text.contains("jane.doe@example.com"));
}

#[test]
fn rehydration_can_be_disabled_by_policy() {
    let h = harness(pseudonymize_all(), |c| c.rehydrate = false);
    let r = h.gw.handle_chat(Some(ADMIN), b"mail jane.doe@example.com").unwrap();
    assert!(r.text.contains("⟦EMAIL_"));
}

#[test]
fn failed_authentication_short_circuits_everything() {
    let h = harness(RedactionPolicy::default(), |_| {});
    for key in [None, Some("sk-wrong"), Some(&GUEST[..GUEST.len() - 1])] {
        let e = h.gw.handle_chat(key, b"SSN 123-45-6789").unwrap_err();
        assert_eq!(e.status(), 401);
    }
    assert_eq!(h.backend.call_count(), 0);
    assert!(h.gw.rate_bucket("guest-1").is_none());
    let audit = h.gw.audit().entries();
    assert_eq!(audit.len(), 3);
    assert!(audit.iter().all(|a| a.decision == Decision::Unauthorized && a.pii_counts.is_empty()));
}

#[test]
fn forbidden_routes_do_not_consume_rate_budget() {
    let h = harness(RedactionPolicy::default(), |_| {});
    let e = h.gw.handle_metrics(Some(GUEST), 60).unwrap_err();
    assert!(matches!(e, GatewayError::Forbidden { .. }));
    assert_eq!(e.status(), 403);
    assert!(h.gw.handle_docs(Some(ANALYST), "d", b"text").is_err());
    assert!(h.gw.handle_vault_resolve(Some(ANALYST), "⟦SSN_00000000⟧").is_err());
    assert_eq!(h.gw.handle_unknown(Some(ADMIN), "/v1/secret").unwrap_err().status(), 403);
    assert!(h.gw.rate_bucket("guest-1").is_none());
    assert!(h.gw.rate_bucket("admin-1").is_none());
    assert_eq!(h.gw.audit().entries()[3].route, "<unknown>");
}

#[test]
fn rate_limited_requests_never_reach_detection_or_backend() {
    let h = harness(RedactionPolicy::default(), |c| c.rate_limit.capacity = 2.0);
    h.gw.handle_chat(Some(GUEST), b"hi").unwrap();
    h.gw.handle_chat(Some(GUEST), b"hi").unwrap();
    let e = h.gw.handle_chat(Some(GUEST), b"SSN 123-45-6789").unwrap_err();
    match e {
        GatewayError::RateLimited { retry_after } => assert!((retry_after - 1.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert_eq!(h.backend.call_count(), 2);
    let last = h.gw.audit().entries().pop().unwrap();
    assert_eq!(last.decision, Decision::RateLimited);
    assert_eq!(last.status, 429);
    assert!(last.pii_counts.is_empty());
    h.clock.advance(1.0);
    assert!(h.gw.handle_chat(Some(GUEST), b"hi").is_ok());
}

#[test]
fn backend_failure_is_502_and_audited() {
    let h = harness(RedactionPolicy::default(), |_| {});
    h.backend.set_failing(true);
    let e = h.gw.handle_chat(Some(ANALYST), b"call 555-123-4567").unwrap_err();
    assert_eq!(e.status(), 502);
    let a = h.gw.audit().entries();
    assert_eq!(a.len(), 1);
    assert_eq!((a[0].decision, a[0].status), (Decision::Error, 502));
    assert_eq!(a[0].pii_counts, [(PiiKind::Phone, 1)].into());
}

#[test]
fn invalid_utf8_is_a_bad_request() {
    let h = harness(RedactionPolicy::default(), |_| {});
    assert_eq!(h.gw.handle_chat(Some(GUEST), &[0x66, 0xff]).unwrap_err().status(), 400);
    assert_eq!(h.backend.call_count(), 0);
}

/// Every rendered record under every template, through the chat route with
/// retrieval over redacted documents, for masking and pseudonymizing policies.
#[test]
fn no_pii_crosses_the_backend_boundary_and_audit_is_clean() {
    let ds = generate(150, 3).unwrap();
    for policy in [RedactionPolicy::default(), pseudonymize_all()] {
        let h = harness(policy.clone(), unlimited);
        let mut sent = 0;
        let mut originals = Vec::new();
        for (i, r) in ds.records.iter().enumerate() {
            originals.extend([r.name.clone(), r.email.clone(), r.ssn.clone(), r.credit_card.clone(), r.phone.clone()]);
            if i % 10 == 0 {
                let doc = render_text(r, i % TEMPLATES.len()).unwrap().text;
                h.gw.handle_docs(Some(ADMIN), &format!("doc-{i}"), doc.as_bytes()).unwrap();
            }
            for t in 0..TEMPLATES.len() {
                let text = render_text(r, t).unwrap().text;
                h.gw.handle_chat(Some(GUEST), text.as_bytes()).unwrap();
                sent += 1;
            }
        }
        let calls = h.backend.calls();
        assert_eq!(calls.len(), sent);
        for c in &calls {
            let leaks: Vec<_> = detect(c).into_iter().filter(|s| policy.action(s.kind) != Action::Allow).collect();
            assert!(leaks.is_empty(), "{c:?} -> {leaks:?}");
        }
        let audit = h.gw.audit().entries();
        assert_eq!(audit.len(), sent + 15);
        let dump = serde_json::to_string(&audit).unwrap();
        for v in &originals {
            assert!(!dump.contains(v.as_str()), "audit contains {v:?}");
        }
    }
}

#[test]
fn allowed_kinds_pass_through() {
    let policy = RedactionPolicy::default().with_action(PiiKind::Email, Action::Allow);
    let h = harness(policy, |_| {});
    let r = h.gw.handle_chat(Some(GUEST), b"mail a.b@example.org about 123-45-6789").unwrap();
    assert_eq!(h.backend.calls(), ["mail a.b@example.org about [SSN]"]);
    assert_eq!(r.redaction_summary, [(PiiKind::Ssn, 1)].into());
}

#[test]
fn rag_appends_redacted_context() {
    let h = harness(RedactionPolicy::default(), |_| {});
    h.gw
        .handle_docs(Some(ADMIN), "policy", b"Refunds go to card 4111 1111 1111 1111 within ten days")
        .unwrap();
    h.gw.handle_docs(Some(ADMIN), "other", b"the cafeteria opens at noon").unwrap();
    let r = h.gw.handle_chat(Some(ANALYST), b"when are refunds paid").unwrap();
    assert_eq!(r.retrieved[0], "policy");
    let sent = &h.backend.calls()[0];
    assert!(sent.contains("Context:\n- Refunds go to card [CREDIT_CARD] within ten days"), "{sent}");
    let hits = h.gw.handle_retrieve(Some(ANALYST), b"refunds card", 10).unwrap();
    assert!(hits.truncated);
    assert_eq!(hits.hits.len(), 2);
}

#[test]
fn admin_resolves_pseudonyms_through_the_vault() {
    let h = harness(pseudonymize_all(), |_| {});
    h.gw.handle_chat(Some(GUEST), b"SSN 123-45-6789").unwrap();
    let sent = h.backend.calls().remove(0);
    let token = sent.trim_start_matches("SSN ").to_string();
    assert_eq!(h.gw.handle_vault_resolve(Some(ADMIN), &token).unwrap().value, "123-45-6789");
    assert_eq!(h.gw.handle_vault_resolve(Some(ADMIN), "⟦SSN_ffffffff⟧").unwrap_err().status(), 404);
    let dump = serde_json::to_string(&h.gw.audit().entries()).unwrap();
    assert!(!dump.contains("123-45-6789"));
}

#[test]
fn aggregate_stats_contract() {
    let h = harness(RedactionPolicy::default(), |c| c.dp.aggregate_epsilon = 1e9);
    let s = h.gw.handle_metrics(Some(ANALYST), 60).unwrap();
    assert_eq!(s.epsilon, 1e9);
    assert_eq!(s.counts.len(), PiiKind::ALL.len());
    assert!(s.counts.values().all(|c| c.value.abs() < 1e-6));

    h.gw.handle_chat(Some(GUEST), b"SSN 123-45-6789 and 234-56-7890").unwrap();
    let s = h.gw.handle_metrics(Some(ADMIN), 60).unwrap();
    assert!((s.counts[&PiiKind::Ssn].value - 2.0).abs() < 1e-6);

    let h = harness(RedactionPolicy::default(), |c| c.dp.aggregate_epsilon = 1.0);
    for _ in 0..5 {
        h.gw.handle_chat(Some(GUEST), b"SSN 123-45-6789").unwrap();
    }
    let a = h.gw.handle_metrics(Some(ANALYST), 60).unwrap();
    let b = h.gw.handle_metrics(Some(ANALYST), 60).unwrap();
    assert_ne!(a.first_noise_index, b.first_noise_index);
    assert_ne!(a.counts[&PiiKind::Ssn].value, b.counts[&PiiKind::Ssn].value);
    assert!(a.counts.values().all(|c| c.value >= 0.0 || !c.clamped));
}

#[test]
fn chat_p95_latency_with_1000_docs() {
    let h = harness(RedactionPolicy::default(), unlimited);
    for (i, d) in synthetic_docs(1000, 8).iter().enumerate() {
        h.gw.handle_docs(Some(ADMIN), &format!("doc-{i:04}"), d.as_bytes()).unwrap();
    }
    let queries = synthetic_docs(200, 9);
    let mut ms: Vec<f64> = queries
        .iter()
        .map(|q| {
            let t = Instant::now();
            h.gw.handle_chat(Some(ANALYST), q.as_bytes()).unwrap();
            t.elapsed().as_secs_f64() * 1000.0
        })
        .collect();
    ms.sort_by(f64::total_cmp);
    let p95 = ms[(0.95 * (ms.len() - 1) as f64).round() as usize];
    println!("chat p95 = {p95:.3} ms");
    assert!(p95 < 50.0, "p95 {p95} ms");
}
