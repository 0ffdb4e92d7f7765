//! HTTP service: scenario upload, asynchronous jobs, presets.
//!
//! Jobs go through one FIFO queue drained by a fixed number of workers;
//! each solve runs on a blocking thread against its own scenario copy.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::mpsc;
use tower_http::services::ServeDir;

use nfvplan_core::analysis::SweepSpec;
use nfvplan_core::gen::{preset_file, preset_names};
use nfvplan_core::model::{validate, Scenario};
use nfvplan_core::Error as CoreError;

use crate::jobs::{execute, CompareRequest, JobRecord, JobRequest, JobStatus, SolveRequest};
use crate::store::{Store, StoreError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub store: PathBuf,
    /// Solves allowed to run at once.
    pub workers: usize,
    /// Default node budget for requests that do not set one.
    pub node_budget: usize,
    /// Directory served for paths no endpoint claims.
    pub static_dir: Option<PathBuf>,
}

#[derive(Default)]
struct JobTable {
    records: BTreeMap<String, JobRecord>,
    requests: HashMap<String, JobRequest>,
    /// Request key to the job that answers it.
    by_key: HashMap<String, String>,
    next: u64,
}

struct Service {
    store: Store,
    jobs: Mutex<JobTable>,
    queue: mpsc::UnboundedSender<String>,
    node_budget: usize,
}

type Shared = Arc<Service>;

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn store_error(e: StoreError) -> Response {
    match e {
        StoreError::BadId(_) => error(StatusCode::NOT_FOUND, e.to_string()),
        other => error(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

/// Builds the router and starts its workers. Needs a running Tokio runtime.
pub fn router(config: &ServiceConfig) -> Result<Router, StoreError> {
    let store = Store::open(&config.store)?;
    let (tx, rx) = mpsc::unbounded_channel::<String>();
    let service = Arc::new(Service {
        store,
        jobs: Mutex::new(JobTable::default()),
        queue: tx,
        node_budget: config.node_budget,
    });
    let rx = Arc::new(tokio::sync::Mutex::new(rx));
    for _ in 0..config.workers.max(1) {
        let (service, rx) = (service.clone(), rx.clone());
        tokio::spawn(async move {
            loop {
                let next = rx.lock().await.recv().await;
                match next {
                    Some(id) => run_job(&service, id).await,
                    None => break,
                }
            }
        });
    }

    let app = Router::new()
        .route("/scenarios", post(post_scenario))
        .route("/scenarios/{id}", get(get_scenario))
        .route("/solve/{id}", post(post_solve))
        .route("/compare/{id}", post(post_compare))
        .route("/sweep/{id}", post(post_sweep))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/result", get(get_job_result))
        .route("/presets", get(get_presets))
        .with_state(service);
    Ok(match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(|| async { error(StatusCode::NOT_FOUND, "no such endpoint") }),
    })
}

pub async fn serve(config: &ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let app = router(config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}

async fn run_job(service: &Shared, id: String) {
    let (scenario, request) = {
        let mut table = service.jobs.lock().expect("job table lock");
        let request = table.requests[&id].clone();
        let record = table.records.get_mut(&id).expect("queued job has a record");
        record.advance(JobStatus::Running);
        (record.scenario.clone(), request)
    };
    let (worker, job) = (service.clone(), id.clone());
    let outcome = tokio::task::spawn_blocking(move || -> Result<String, String> {
        let s = worker
            .store
            .get(&scenario)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("scenario {scenario} left the store"))?;
        let artifact = execute(&s, &request, worker.node_budget).map_err(|e| e.to_string())?;
        worker.store.write_result(&job, &artifact.to_json()).map_err(|e| e.to_string())
    })
    .await
    .unwrap_or_else(|e| Err(format!("worker stopped: {e}")));
    let mut table = service.jobs.lock().expect("job table lock");
    let record = table.records.get_mut(&id).expect("running job has a record");
    match outcome {
        Ok(location) => {
            record.result = Some(location);
            record.advance(JobStatus::Done);
        }
        Err(e) => {
            record.error = Some(e);
            record.advance(JobStatus::Failed);
        }
    }
}

async fn post_scenario(State(service): State<Shared>, body: Bytes) -> Response {
    let Ok(text) = std::str::from_utf8(&body) else {
        return error(StatusCode::BAD_REQUEST, "body is not UTF-8");
    };
    let s = match Scenario::from_json(text) {
        Ok(s) => s,
        Err(CoreError::Parse { line, column, msg }) => {
            return (
                StatusCode::BAD_REQUEST,
                Json(json!({ "error": msg, "line": line, "column": column })),
            )
                .into_response()
        }
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let violations = validate(&s);
    if !violations.is_empty() {
        return (
            StatusCode::BAD_REQUEST,
            Json(json!({ "id": s.content_hash(), "violations": violations })),
        )
            .into_response();
    }
    match service.store.put(&s) {
        Ok(id) => (StatusCode::CREATED, Json(json!({ "id": id, "violations": [] }))).into_response(),
        Err(e) => store_error(e),
    }
}

async fn get_scenario(State(service): State<Shared>, Path(id): Path<String>) -> Response {
    match service.store.get_text(&id) {
        Ok(Some(text)) => ([(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Ok(None) => error(StatusCode::NOT_FOUND, format!("unknown scenario {id}")),
        Err(e) => store_error(e),
    }
}

#[derive(Debug, Default, Deserialize)]
struct Force {
    #[serde(default)]
    force: bool,
}

/// Parses an optional JSON body; an empty body gives the default.
fn body_or_default<T: serde::de::DeserializeOwned + Default>(body: &Bytes) -> Result<T, Response> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("request body: {e}")))
}

fn submit(service: &Shared, scenario: &str, request: JobRequest, force: bool) -> Response {
    match service.store.get_text(scenario) {
        Ok(Some(_)) => {}
        Ok(None) => return error(StatusCode::NOT_FOUND, format!("unknown scenario {scenario}")),
        Err(e) => return store_error(e),
    }
    let key = format!("{scenario} {}", serde_json::to_string(&request).expect("request serializes"));
    let mut table = service.jobs.lock().expect("job table lock");
    if !force {
        if let Some(existing) = table.by_key.get(&key) {
            let record = &table.records[existing];
            if record.status != JobStatus::Failed {
                return (
                    StatusCode::CONFLICT,
                    Json(json!({ "error": "an identical job exists; pass force=true to rerun", "job": record })),
                )
                    .into_response();
            }
        }
    }
    table.next += 1;
    let id = format!("job-{:06}", table.next);
    let record = JobRecord::new(id.clone(), request.kind(), scenario.to_string());
    table.records.insert(id.clone(), record.clone());
    table.requests.insert(id.clone(), request);
    table.by_key.insert(key, id.clone());
    drop(table);
    if service.queue.send(id).is_err() {
        return error(StatusCode::SERVICE_UNAVAILABLE, "job queue is closed");
    }
    (StatusCode::ACCEPTED, Json(record)).into_response()
}

async fn post_solve(
    State(service): State<Shared>,
    Path(id): Path<String>,
    Query(force): Query<Force>,
    body: Bytes,
) -> Response {
    match body_or_default::<SolveRequest>(&body) {
        Ok(r) => submit(&service, &id, JobRequest::Solve(r), force.force),
        Err(resp) => resp,
    }
}

async fn post_compare(
    State(service): State<Shared>,
    Path(id): Path<String>,
    Query(force): Query<Force>,
    body: Bytes,
) -> Response {
    match body_or_default::<CompareRequest>(&body) {
        Ok(r) => submit(&service, &id, JobRequest::Compare(r), force.force),
        Err(resp) => resp,
    }
}

async fn post_sweep(
    State(service): State<Shared>,
    Path(id): Path<String>,
    Query(force): Query<Force>,
    body: Bytes,
) -> Response {
    let spec: SweepSpec = match serde_json::from_slice(&body) {
        Ok(spec) => spec,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("sweep spec: {e}")),
    };
    if let Err(e) = spec.check() {
        return error(StatusCode::BAD_REQUEST, e.to_string());
    }
    if spec.scenario.as_ref().is_some_and(|s| *s != id) {
        return error(StatusCode::BAD_REQUEST, "sweep spec names a different scenario");
    }
    submit(&service, &id, JobRequest::Sweep(spec), force.force)
}

fn job_record(service: &Shared, id: &str) -> Option<JobRecord> {
    service.jobs.lock().expect("job table lock").records.get(id).cloned()
}

async fn get_job(State(service): State<Shared>, Path(id): Path<String>) -> Response {
    let Some(record) = job_record(&service, &id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown job {id}"));
    };
    let mut doc = serde_json::to_value(&record).expect("record serializes");
    if let Some(location) = &record.result {
        match service.store.read_result(location).map(|t| serde_json::from_str::<Value>(&t)) {
            Ok(Ok(value)) => doc["output"] = value,
            Ok(Err(e)) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
            Err(e) => return store_error(e),
        }
    }
    Json(doc).into_response()
}

/// The stored result document, byte for byte.
async fn get_job_result(State(service): State<Shared>, Path(id): Path<String>) -> Response {
    let Some(record) = job_record(&service, &id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown job {id}"));
    };
    let Some(location) = record.result else {
        return error(StatusCode::NOT_FOUND, format!("job {id} has no result ({:?})", record.status));
    };
    match service.store.read_result(&location) {
        Ok(text) => ([(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => store_error(e),
    }
}

async fn get_presets() -> Response {
    let mut presets = Vec::new();
    for name in preset_names() {
        match preset_file(name) {
            Ok(file) => presets.push(json!({ "name": name, "file": file, "costs": file.costs() })),
            Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
    Json(json!({ "format": "nfv-presets/1", "presets": presets })).into_response()
}
