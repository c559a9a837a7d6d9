//! Annotation service: hands out verification tasks and records annotations.
//!
//! | method | path                        | result                                   |
//! |--------|-----------------------------|------------------------------------------|
//! | GET    | `/tasks`                    | task ids with status                     |
//! | GET    | `/tasks/next?annotator=ID`  | 200 next open task, 204 when none left   |
//! | GET    | `/tasks/{id}`               | 200 task view, 404 unknown               |
//! | POST   | `/tasks/{id}/annotations`   | 201 accepted, 409 duplicate/complete, 422 invalid |
//! | GET    | `/export`                   | finalized questions as NDJSON            |
//!
//! Task views never carry the generated-correct choice.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use mqag_core::annotate::store::{AnnotationStore, StoreError, TaskSummary, TaskView};
use mqag_core::annotate::Annotation;

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError(StoreError);

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            StoreError::UnknownTask(_) => StatusCode::NOT_FOUND,
            StoreError::AlreadySubmitted { .. } | StoreError::TaskComplete(_) => StatusCode::CONFLICT,
            StoreError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::Load { .. } | StoreError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "annotation store failure");
        }
        (status, Json(ErrorBody { error: self.0.to_string() })).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct NextQuery {
    annotator: String,
}

async fn list_tasks(State(store): State<Arc<AnnotationStore>>) -> Json<Vec<TaskSummary>> {
    Json(store.summaries())
}

async fn next_task(State(store): State<Arc<AnnotationStore>>, Query(q): Query<NextQuery>) -> Response {
    match store.next_for(&q.annotator) {
        Some(view) => Json(view).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    }
}

async fn get_task(State(store): State<Arc<AnnotationStore>>, Path(id): Path<String>) -> Result<Json<TaskView>, ApiError> {
    Ok(Json(store.view(&id)?))
}

async fn submit(
    State(store): State<Arc<AnnotationStore>>,
    Path(id): Path<String>,
    Json(annotation): Json<Annotation>,
) -> Result<(StatusCode, Json<TaskView>), ApiError> {
    // journal writes fsync; keep them off the async workers
    let view = tokio::task::spawn_blocking(move || store.submit(&id, annotation))
        .await
        .map_err(|e| StoreError::Invalid(format!("submission aborted: {e}")))??;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn export(State(store): State<Arc<AnnotationStore>>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/x-ndjson")], store.export_jsonl())
}

pub fn router(store: Arc<AnnotationStore>) -> Router {
    Router::new()
        .route("/tasks", get(list_tasks))
        .route("/tasks/next", get(next_task))
        .route("/tasks/{id}", get(get_task))
        .route("/tasks/{id}/annotations", post(submit))
        .route("/export", get(export))
        .with_state(store)
}

/// Serves until ctrl-c.
pub async fn serve(store: Arc<AnnotationStore>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "annotation service listening");
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
