//! JSON-over-HTTP API over one loaded matrix.
//!
//! Routes:
//! - `GET /api/health`: status and matrix dimensions
//! - `GET /api/matrix`: the matrix, byte-stable, with an `ETag`
//! - `GET /api/pareto`: front members with raw and scaled criteria
//! - `POST /api/select`: selection for a weight vector
//!
//! The matrix and its front are computed once when [`AppState`] is built and
//! are read-only afterwards. There is no authentication; bind to localhost or
//! a trusted network.

use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::matrix::EvaluationMatrix;
use crate::report::{FrontReport, SelectResponse};
use crate::select::{pareto_front, resolve_weights, select_on_front, ParetoFront, SelectError};

pub struct AppState {
    matrix: EvaluationMatrix,
    front: ParetoFront,
    matrix_json: String,
    matrix_etag: String,
    front_json: String,
}

impl AppState {
    pub fn new(matrix: EvaluationMatrix) -> Result<Self, SelectError> {
        let front = pareto_front(&matrix)?;
        let matrix_json = matrix.to_json();
        let matrix_etag = format!(
            "\"{}\"",
            hex::encode(Sha256::digest(matrix_json.as_bytes()))
        );
        let front_json = serde_json::to_string(&FrontReport::new(&matrix, &front))
            .expect("front serialization is infallible");
        Ok(Self {
            matrix,
            front,
            matrix_json,
            matrix_etag,
            front_json,
        })
    }

    pub fn matrix(&self) -> &EvaluationMatrix {
        &self.matrix
    }

    pub fn front(&self) -> &ParetoFront {
        &self.front
    }

    /// Selection exactly as `POST /api/select` computes it.
    pub fn select(&self, phi: &[f64]) -> Result<SelectResponse, SelectError> {
        let weights = resolve_weights(phi, self.matrix.n_criteria())?;
        let result = select_on_front(&self.matrix, &self.front, weights)?;
        Ok(SelectResponse::new(&self.matrix, &self.front, &result))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectRequest {
    pub phi: Vec<f64>,
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/matrix", get(matrix))
        .route("/api/pareto", get(pareto))
        .route("/api/select", post(select))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

/// Serves `app` on an already bound listener until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({
        "status": "ok",
        "combinations": state.matrix.len(),
        "criteria": state.matrix.n_criteria(),
    }))
    .into_response()
}

fn json_body(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn matrix(State(state): State<Arc<AppState>>) -> Response {
    let mut resp = json_body(state.matrix_json.clone());
    resp.headers_mut().insert(
        header::ETAG,
        state
            .matrix_etag
            .parse()
            .expect("hex etag is a valid header value"),
    );
    resp
}

async fn pareto(State(state): State<Arc<AppState>>) -> Response {
    json_body(state.front_json.clone())
}

fn bad_request(body: serde_json::Value) -> Response {
    (StatusCode::BAD_REQUEST, Json(body)).into_response()
}

async fn select(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let request: SelectRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(json!({ "error": format!("malformed request: {e}") })),
    };
    match state.select(&request.phi) {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => {
            let mut body = json!({ "error": e.to_string() });
            match &e {
                SelectError::Range { component, .. } => body["component"] = json!(component),
                SelectError::Dimension { expected, actual } => {
                    body["expected"] = json!(expected);
                    body["actual"] = json!(actual);
                }
                _ => {}
            }
            bad_request(body)
        }
    }
}
