//! JSON over HTTP. Every error body is `{code, message}`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{ErrorCode, ServiceError};
use crate::model::{Id, User};
use crate::service::{Login, NewAssignment, NewNotice, NewProject, NewUser, ProjectUpdate, Service, SimulateRequest};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ServiceError>;
type AppState = State<Arc<Service>>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ServiceError::bad_request(format!("request body: {e}")))
}

/// A numeric `{id}` path segment; anything else is a JSON 400.
struct IdPath(Id);

impl<S: Send + Sync> FromRequestParts<S> for IdPath {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        let Path(raw) = Path::<String>::from_request_parts(parts, state)
            .await
            .map_err(|e| ServiceError::bad_request(e.body_text()))?;
        raw.parse().map(IdPath).map_err(|_| ServiceError::bad_request(format!("{raw:?} is not an id")))
    }
}

fn caller(svc: &Service, headers: &HeaderMap) -> ApiResult<User> {
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(|| ServiceError::new(ErrorCode::Unauthorized, "missing bearer token"))?;
    svc.authenticate(token.trim())
}

/// Runs `f` off the async workers; grading and simulation are CPU-bound.
async fn blocking<T: Send + 'static>(
    svc: Arc<Service>,
    f: impl FnOnce(&Service) -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ServiceError::new(ErrorCode::Storage, format!("worker failed: {e}")))?
}

async fn login(State(svc): AppState, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: Login = parse(&body)?;
    Ok(Json(svc.login(&req)?))
}

async fn create_user(State(svc): AppState, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: NewUser = parse(&body)?;
    let u = svc.create_user(Some(&me), req)?;
    Ok((StatusCode::CREATED, Json(crate::model::UserView::from(&u))))
}

async fn list_users(State(svc): AppState, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.list_users(&me)?))
}

async fn home(State(svc): AppState, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.home(&me)))
}

async fn create_project(State(svc): AppState, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: NewProject = parse(&body)?;
    Ok((StatusCode::CREATED, Json(svc.create_project(&me, req)?)))
}

async fn get_project(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.get_project(&me, id)?))
}

async fn put_project(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: ProjectUpdate = parse(&body)?;
    Ok(Json(svc.update_project(&me, id, req)?))
}

async fn submit(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    // Anything that is JSON is recorded; the service decides whether it is
    // a usable design.
    let value: serde_json::Value = parse(&body)?;
    let s = blocking(svc, move |svc| svc.submit(&me, id, value)).await?;
    Ok((StatusCode::CREATED, Json(s)))
}

async fn history(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.submission_history(&me, id)?))
}

async fn get_submission(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.get_submission(&me, id)?))
}

async fn trace_vcd(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<Response> {
    let me = caller(&svc, &headers)?;
    match svc.submission_trace(&me, id)? {
        Some(bytes) => Ok(([(header::CONTENT_TYPE, "text/x-vcd")], bytes).into_response()),
        None => Err(ServiceError::new(ErrorCode::NotFound, format!("submission {id} did not simulate; see its log"))),
    }
}

async fn log(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<Response> {
    let me = caller(&svc, &headers)?;
    let text = svc.submission_log(&me, id)?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

async fn post_assignment(State(svc): AppState, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: NewAssignment = parse(&body)?;
    let a = blocking(svc, move |svc| svc.post_assignment(&me, req)).await?;
    Ok((StatusCode::CREATED, Json(a)))
}

async fn get_assignment(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.get_assignment(&me, id)?))
}

async fn stats(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    Ok(Json(svc.assignment_stats(&me, id)?))
}

async fn post_notice(State(svc): AppState, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: NewNotice = parse(&body)?;
    Ok((StatusCode::CREATED, Json(svc.post_notice(&me, req)?)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Visibility {
    visible: bool,
}

async fn visibility(State(svc): AppState, headers: HeaderMap, IdPath(id): IdPath, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: Visibility = parse(&body)?;
    Ok(Json(svc.set_example_visibility(&me, id, req.visible)?))
}

async fn simulate(State(svc): AppState, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let me = caller(&svc, &headers)?;
    let req: SimulateRequest = parse(&body)?;
    Ok(Json(blocking(svc, move |svc| svc.simulate(&me, req)).await?))
}

async fn not_found() -> ServiceError {
    ServiceError::new(ErrorCode::NotFound, "no such endpoint")
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/api/login", post(login))
        .route("/api/users", post(create_user).get(list_users))
        .route("/api/home", get(home))
        .route("/api/projects", post(create_project))
        .route("/api/projects/{id}", get(get_project).put(put_project))
        .route("/api/projects/{id}/submissions", post(submit).get(history))
        .route("/api/submissions/{id}", get(get_submission))
        .route("/api/submissions/{id}/trace.vcd", get(trace_vcd))
        .route("/api/submissions/{id}/log", get(log))
        .route("/api/assignments", post(post_assignment))
        .route("/api/assignments/{id}", get(get_assignment))
        .route("/api/assignments/{id}/stats", get(stats))
        .route("/api/notices", post(post_notice))
        .route("/api/examples/{id}/visibility", post(visibility))
        .route("/api/simulate", post(simulate))
        .fallback(not_found)
        .with_state(svc)
}

/// Serves until ctrl-c.
pub async fn serve(svc: Arc<Service>, listen: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
