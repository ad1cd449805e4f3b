//! HTTP facade over [`eqdose_core::Engine`].
//!
//! Every response is an [`ApiEnvelope`] tagged with the engine version and
//! the checksum of the loaded tissue library. Validation failures are 400
//! with a field path, solver failures 422, anything unexpected a bare 500.
//! The server keeps no state besides the immutable library, so requests
//! may be served in any order and in parallel.

use std::any::Any;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use eqdose_core::engine::{DvhRequest, PlanRequest};
use eqdose_core::{ApiEnvelope, ApiError, Engine, ErrorKind, Payload, TissueParams};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::catch_panic::CatchPanicLayer;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const DEFAULT_BIND: &str = "127.0.0.1:8787";

/// Origins allowed to call the service from a browser. Empty means any.
pub fn cors_layer(origins: &[String]) -> Result<CorsLayer, String> {
    let allow = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        let values = origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| format!("invalid CORS origin `{o}`")))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(values)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]))
}

pub fn router(engine: Arc<Engine>, cors: CorsLayer) -> Router {
    Router::new()
        .route("/tissues", get(tissues))
        .route("/bed", post(bed))
        .route("/equivalent", post(equivalent))
        .route("/ntcp", post(ntcp))
        .route("/risk", post(risk))
        .route("/dvh/summarize", post(dvh_summarize))
        .with_state(engine)
        .layer(CatchPanicLayer::custom(internal_error))
        .layer(cors)
}

struct Reply<T>(StatusCode, ApiEnvelope<T>);

impl<T: Serialize> IntoResponse for Reply<T> {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn respond<T>(engine: &Engine, outcome: eqdose_core::Result<T>) -> Reply<T> {
    let status = match &outcome {
        Ok(_) => StatusCode::OK,
        Err(e) => match e.kind() {
            ErrorKind::Validation => StatusCode::BAD_REQUEST,
            ErrorKind::Solver => StatusCode::UNPROCESSABLE_ENTITY,
        },
    };
    Reply(status, engine.envelope(outcome))
}

/// Decodes a JSON body, reporting where in the document it went wrong.
fn decode<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        ApiError {
            code: "malformed_request".into(),
            message: e.inner().to_string(),
            field_path: (path != ".").then_some(path),
        }
    })
}

/// Decodes the body, runs `op` and wraps whatever comes out.
fn handle<Req, T>(
    engine: &Engine,
    body: &[u8],
    op: impl FnOnce(&Engine, &Req) -> eqdose_core::Result<T>,
) -> Response
where
    Req: DeserializeOwned,
    T: Serialize,
{
    match decode::<Req>(body) {
        Ok(req) => respond(engine, op(engine, &req)).into_response(),
        Err(error) => {
            Reply::<()>(StatusCode::BAD_REQUEST, engine.wrap(Payload::Error(error))).into_response()
        }
    }
}

async fn tissues(State(engine): State<Arc<Engine>>) -> Reply<Vec<TissueParams>> {
    respond(&engine, Ok(engine.tissues().to_vec()))
}

async fn bed(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    handle::<PlanRequest, _>(&engine, &body, Engine::bed)
}

async fn equivalent(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    handle::<PlanRequest, _>(&engine, &body, Engine::equivalent)
}

async fn ntcp(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    handle::<PlanRequest, _>(&engine, &body, Engine::ntcp)
}

async fn risk(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    handle::<PlanRequest, _>(&engine, &body, Engine::risk)
}

async fn dvh_summarize(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    handle::<DvhRequest, _>(&engine, &body, Engine::dvh_summarize)
}

fn internal_error(_: Box<dyn Any + Send + 'static>) -> Response {
    // panics carry engine internals; keep them off the wire
    let body = serde_json::json!({
        "engine_version": eqdose_core::ENGINE_VERSION,
        "error": { "code": "internal", "message": "internal error" },
    });
    (StatusCode::INTERNAL_SERVER_ERROR, Json(body)).into_response()
}
