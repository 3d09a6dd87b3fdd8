//! JSON API served over HTTP on 127.0.0.1.

use axum::extract::rejection::JsonRejection;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::api::{self, ApiError, ApiResult, GameRequest, MoveRequest, PositionRequest, DEFAULT_BUDGET};

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let mut res = (status, api::to_json(body)).into_response();
    res.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    res
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let mut res = json_response(status, &self.body());
        if let Some(secs) = self.body().retry_after_seconds {
            res.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(secs));
        }
        res
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

/// Runs engine work off the async executor.
async fn blocking<T, F>(f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(Ok(v)) => json_response(StatusCode::OK, &v),
        Ok(Err(e)) => e.into_response(),
        Err(e) => ApiError::Core(setnim_core::Error::Internal(e.to_string())).into_response(),
    }
}

async fn games() -> Response {
    json_response(StatusCode::OK, &api::games())
}

async fn classify(payload: Result<Json<PositionRequest>, JsonRejection>) -> Response {
    blocking(move || {
        let req = body(payload)?;
        let spec = api::resolve_game(&req.game, false)?;
        api::classify(&spec, req.position, req.budget.unwrap_or(DEFAULT_BUDGET).min(DEFAULT_BUDGET))
    })
    .await
}

async fn solve(payload: Result<Json<PositionRequest>, JsonRejection>) -> Response {
    blocking(move || {
        let req = body(payload)?;
        let spec = api::resolve_game(&req.game, false)?;
        api::solve(&spec, req.position, req.budget.unwrap_or(DEFAULT_BUDGET).min(DEFAULT_BUDGET), req.explain)
    })
    .await
}

async fn legal(payload: Result<Json<MoveRequest>, JsonRejection>) -> Response {
    blocking(move || {
        let req = body(payload)?;
        let spec = api::resolve_game(&req.game, false)?;
        api::legal(&spec, req.position, req.mv)
    })
    .await
}

async fn apply(payload: Result<Json<MoveRequest>, JsonRejection>) -> Response {
    blocking(move || {
        let req = body(payload)?;
        let spec = api::resolve_game(&req.game, false)?;
        api::apply(&spec, req.position, req.mv)
    })
    .await
}

async fn legal_sets(payload: Result<Json<GameRequest>, JsonRejection>) -> Response {
    blocking(move || {
        let req = body(payload)?;
        Ok(api::legal_sets(&api::resolve_game(&req.game, false)?))
    })
    .await
}

pub fn router() -> Router {
    Router::new()
        .route("/api/games", get(games))
        .route("/api/classify", post(classify))
        .route("/api/solve", post(solve))
        .route("/api/legal", post(legal))
        .route("/api/apply", post(apply))
        .route("/api/legal-sets", post(legal_sets))
}

/// Blocks serving the API on `127.0.0.1:port`.
pub fn serve(port: u16) -> std::io::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router()).await
    })
}
