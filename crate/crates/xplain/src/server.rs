//! HTTP front end: every request goes through [`Service::handle_request`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;

use crate::cache::ResponseCache;
use crate::config::SessionConfig;
use crate::engine::Engine;
use crate::error::AppError;
use crate::service::Service;

/// Builds the service a config describes: engine, then cache.
pub fn build_service(cfg: &SessionConfig) -> Result<Service, AppError> {
    let engine = Engine::from_session(cfg)?;
    let cache = match &cfg.cache.dir {
        Some(dir) => ResponseCache::open(dir, cfg.cache.capacity)?,
        None => ResponseCache::in_memory(cfg.cache.capacity),
    };
    Ok(Service::new(engine, cache, cfg.seeds.explain))
}

async fn dispatch(State(service): State<Arc<Service>>, method: Method, uri: Uri, body: Bytes) -> Response {
    let path = uri.path().to_string();
    let query = uri.query().map(str::to_string);
    let res = tokio::task::spawn_blocking(move || {
        service.handle_request(method.as_str(), &path, query.as_deref(), &body)
    })
    .await;
    match res {
        Ok(r) => {
            let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (status, [(header::CONTENT_TYPE, "application/json")], r.to_bytes()).into_response()
        }
        Err(_) => StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    }
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new().fallback(dispatch).with_state(service)
}

/// Binds `host:port` and serves until ctrl-c.
pub async fn serve(service: Service, host: &str, port: u16) -> Result<(), AppError> {
    let addr = format!("{host}:{port}");
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|e| AppError::Io {
            path: addr.clone(),
            message: e.to_string(),
        })?;
    if let Ok(local) = listener.local_addr() {
        eprintln!("listening on http://{local}");
    }
    serve_on(listener, service, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    service: Service,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), AppError> {
    axum::serve(listener, router(Arc::new(service)))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| AppError::Io {
            path: "<server>".into(),
            message: e.to_string(),
        })
}
