//! HTTP/JSON front end.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::auth::Route;
use crate::config::TlsConfig;
use crate::pipeline::Gateway;
use crate::GatewayError;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_WINDOW_SECONDS: u64 = 3600;

#[derive(Serialize)]
struct ErrorBody {
    error: String,
    status: u16,
}

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let retry = match &self {
            GatewayError::RateLimited { retry_after } => Some(retry_after.ceil().max(1.0) as u64),
            _ => None,
        };
        let body = Json(ErrorBody {
            error: self.to_string(),
            status: status.as_u16(),
        });
        match retry {
            Some(s) => (status, [(header::RETRY_AFTER, s.to_string())], body).into_response(),
            None => (status, body).into_response(),
        }
    }
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let v = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    v.strip_prefix("Bearer ").map(|s| s.trim().to_string())
}

async fn blocking<T, F>(f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> Result<T, GatewayError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(Ok(v)) => Json(v).into_response(),
        Ok(Err(e)) => e.into_response(),
        Err(_) => StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    }
}

#[derive(Deserialize)]
struct ChatBody {
    message: String,
}

#[derive(Deserialize)]
struct DocsBody {
    doc_id: String,
    text: String,
}

#[derive(Deserialize)]
struct ResolveBody {
    pseudonym: String,
}

fn parse<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, GatewayError> {
    serde_json::from_slice(body).map_err(|e| GatewayError::BadRequest(format!("invalid JSON body: {e}")))
}

async fn chat(State(gw): State<Arc<Gateway>>, headers: HeaderMap, body: Bytes) -> Response {
    let key = bearer(&headers);
    blocking(move || match parse::<ChatBody>(&body) {
        Ok(b) => gw.handle_chat(key.as_deref(), b.message.as_bytes()),
        Err(e) => gw.reject(key.as_deref(), Route::Chat.path(), e),
    })
    .await
}

async fn docs(State(gw): State<Arc<Gateway>>, headers: HeaderMap, body: Bytes) -> Response {
    let key = bearer(&headers);
    blocking(move || match parse::<DocsBody>(&body) {
        Ok(b) => gw.handle_docs(key.as_deref(), &b.doc_id, b.text.as_bytes()),
        Err(e) => gw.reject(key.as_deref(), Route::Docs.path(), e),
    })
    .await
}

async fn retrieve(
    State(gw): State<Arc<Gateway>>,
    headers: HeaderMap,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let key = bearer(&headers);
    blocking(move || {
        let k = match params.get("k").map(|k| k.parse::<usize>()) {
            None => DEFAULT_K,
            Some(Ok(k)) => k,
            Some(Err(_)) => {
                return gw.reject(key.as_deref(), Route::Retrieve.path(), GatewayError::BadRequest("k".into()))
            }
        };
        let q = params.get("q").cloned().unwrap_or_default();
        gw.handle_retrieve(key.as_deref(), q.as_bytes(), k)
    })
    .await
}

async fn metrics(
    State(gw): State<Arc<Gateway>>,
    headers: HeaderMap,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let key = bearer(&headers);
    blocking(move || {
        let window = match params.get("window").map(|w| w.parse::<u64>()) {
            None => DEFAULT_WINDOW_SECONDS,
            Some(Ok(w)) => w,
            Some(Err(_)) => {
                return gw.reject(
                    key.as_deref(),
                    Route::MetricsAggregate.path(),
                    GatewayError::BadRequest("window".into()),
                )
            }
        };
        gw.handle_metrics(key.as_deref(), window)
    })
    .await
}

async fn resolve(State(gw): State<Arc<Gateway>>, headers: HeaderMap, body: Bytes) -> Response {
    let key = bearer(&headers);
    blocking(move || match parse::<ResolveBody>(&body) {
        Ok(b) => gw.handle_vault_resolve(key.as_deref(), &b.pseudonym),
        Err(e) => gw.reject(key.as_deref(), Route::VaultResolve.path(), e),
    })
    .await
}

async fn unknown(State(gw): State<Arc<Gateway>>, headers: HeaderMap, uri: Uri) -> Response {
    let key = bearer(&headers);
    let path = uri.path().to_string();
    blocking(move || gw.handle_unknown(key.as_deref(), &path)).await
}

pub fn router(gw: Arc<Gateway>) -> Router {
    Router::new()
        .route(Route::Chat.path(), post(chat))
        .route(Route::Docs.path(), post(docs))
        .route(Route::Retrieve.path(), get(retrieve))
        .route(Route::MetricsAggregate.path(), get(metrics))
        .route(Route::VaultResolve.path(), post(resolve))
        .route("/healthz", get(|| async { "ok" }))
        .fallback(unknown)
        .with_state(gw)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transport {
    Tls(TlsConfig),
    Plaintext,
}

/// TLS when configured; plaintext only with the explicit dev override.
pub fn choose_transport(tls: Option<&TlsConfig>, insecure_dev: bool) -> Result<Transport, GatewayError> {
    match (tls, insecure_dev) {
        (Some(t), _) => Ok(Transport::Tls(t.clone())),
        (None, true) => Ok(Transport::Plaintext),
        (None, false) => Err(GatewayError::Config(
            "refusing to start without TLS; configure tls.cert_path/key_path or pass --insecure-dev".into(),
        )),
    }
}

pub async fn serve(gw: Arc<Gateway>, insecure_dev: bool) -> Result<(), GatewayError> {
    let cfg = gw.config();
    let transport = choose_transport(cfg.tls.as_ref(), insecure_dev)?;
    let addr: SocketAddr = cfg
        .listen
        .parse()
        .map_err(|e| GatewayError::Config(format!("listen address {:?}: {e}", cfg.listen)))?;
    let app = router(Arc::clone(&gw)).into_make_service();
    match transport {
        Transport::Tls(t) => {
            let rustls = axum_server::tls_rustls::RustlsConfig::from_pem_file(&t.cert_path, &t.key_path).await?;
            tracing::info!(%addr, "gateway listening (TLS)");
            axum_server::bind_rustls(addr, rustls).serve(app).await?;
        }
        Transport::Plaintext => {
            tracing::warn!(%addr, "gateway listening WITHOUT TLS (--insecure-dev)");
            axum_server::bind(addr).serve(app).await?;
        }
    }
    Ok(())
}
