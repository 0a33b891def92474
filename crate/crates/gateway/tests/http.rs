mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::routing::post;
use axum::{Json, Router};
use common::{harness, ADMIN, ANALYST, GUEST};
use privlab_gateway::server::router;
use privlab_gateway::{Backend, Gateway, GatewayConfig, HttpBackend};
use privlab_pii::RedactionPolicy;
use serde_json::{json, Value};

fn spawn(rt: &tokio::runtime::Runtime, app: Router) -> String {
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}")
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(5)))
        .build()
        .into()
}

fn post_json(a: &ureq::Agent, url: &str, key: Option<&str>, body: Value) -> (u16, Value) {
    let mut req = a.post(url);
    if let Some(k) = key {
        req = req.header("Authorization", &format!("Bearer {k}"));
    }
    let mut resp = req.send_json(body).unwrap();
    (resp.status().as_u16(), resp.body_mut().read_json().unwrap_or(Value::Null))
}

fn get(a: &ureq::Agent, url: &str, key: Option<&str>) -> (u16, Value, Option<String>) {
    let mut req = a.get(url);
    if let Some(k) = key {
        req = req.header("Authorization", &format!("Bearer {k}"));
    }
    let mut resp = req.call().unwrap();
    let retry = resp.headers().get("retry-after").map(|v| v.to_str().unwrap().to_string());
    (resp.status().as_u16(), resp.body_mut().read_json().unwrap_or(Value::Null), retry)
}

#[test]
fn http_routes_map_errors_to_status_classes() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let h = harness(RedactionPolicy::default(), |c| c.rate_limit.capacity = 3.0);
    let gw = Arc::new(h.gw);
    let base = spawn(&rt, router(Arc::clone(&gw)));
    let a = agent();

    let (s, body) = post_json(&a, &format!("{base}/v1/chat"), Some(GUEST), json!({"message": "My SSN is 123-45-6789"}));
    assert_eq!(s, 200);
    assert_eq!(body["redaction_summary"], json!({"SSN": 1}));
    assert_eq!(h.backend.calls(), ["My SSN is [SSN]"]);

    assert_eq!(post_json(&a, &format!("{base}/v1/chat"), None, json!({"message": "x"})).0, 401);
    assert_eq!(post_json(&a, &format!("{base}/v1/chat"), Some(GUEST), json!({"nope": 1})).0, 400);
    assert_eq!(get(&a, &format!("{base}/v1/metrics/aggregate"), Some(GUEST)).0, 403);
    assert_eq!(get(&a, &format!("{base}/v1/nothing"), Some(ADMIN)).0, 403);

    for _ in 0..3 {
        assert_eq!(get(&a, &format!("{base}/v1/retrieve?q=hello&k=2"), Some(ANALYST)).0, 200);
    }
    let (s, _, retry) = get(&a, &format!("{base}/v1/retrieve?q=hello"), Some(ANALYST));
    assert_eq!((s, retry.as_deref()), (429, Some("1")));

    let (s, body, _) = get(&a, &format!("{base}/v1/metrics/aggregate?window=60"), Some(ADMIN));
    assert_eq!(s, 200);
    assert_eq!(body["epsilon"], json!(1.0));
    assert!(body["counts"]["SSN"]["clamped"].is_boolean());

    let (s, body, _) = get(&a, &format!("{base}/healthz"), None);
    assert_eq!((s, body), (200, Value::Null));
    assert_eq!(gw.audit().len(), 10);
}

#[test]
fn http_backend_retries_once() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&hits);
    let app = Router::new().route(
        "/complete",
        post(move |Json(v): Json<Value>| {
            let counter = Arc::clone(&counter);
            async move {
                if counter.fetch_add(1, Ordering::SeqCst) % 2 == 0 {
                    Err(axum::http::StatusCode::SERVICE_UNAVAILABLE)
                } else {
                    Ok(Json(json!({"text": format!("ok: {}", v["prompt"].as_str().unwrap())})))
                }
            }
        }),
    );
    let base = spawn(&rt, app);
    let b = HttpBackend::new(format!("{base}/complete"), Some("secret".into()), Duration::from_secs(5));
    assert_eq!(b.complete("hello").unwrap(), "ok: hello");
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn config_file_gateway_writes_jsonl_audit() {
    let dir = tempfile::tempdir().unwrap();
    let audit = dir.path().join("audit.jsonl");
    let mut cfg: GatewayConfig = serde_json::from_value(json!({
        "key_pepper": "pepper",
        "keys": [{"key_id": "g", "role": "guest", "api_key": "sk-g"}],
    }))
    .unwrap();
    cfg.audit_path = Some(audit.clone());
    let gw = Gateway::from_config(cfg).unwrap();
    gw.handle_chat(Some("sk-g"), b"card 4111 1111 1111 1111").unwrap();
    gw.handle_chat(Some("bad"), b"x").unwrap_err();
    let text = std::fs::read_to_string(&audit).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(!text.contains("4111"));
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["pii_counts"], json!({"CREDIT_CARD": 1}));
    assert_eq!(first["decision"], "ok");
}

#[test]
fn pseudonymizing_config_without_vault_key_is_refused() {
    let cfg: GatewayConfig = serde_json::from_value(json!({
        "key_pepper": "pepper",
        "policy": serde_json::to_value(RedactionPolicy::uniform(privlab_pii::Action::Pseudonymize)).unwrap(),
    }))
    .unwrap();
    if std::env::var_os(privlab_gateway::config::VAULT_KEY_ENV).is_none() {
        assert!(Gateway::from_config(cfg).is_err());
    }
}
