use std::path::PathBuf;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use nfvplan::server::{router, ServiceConfig};

fn fixture_text(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"));
    std::fs::read_to_string(path).unwrap()
}

fn app(store: &std::path::Path, workers: usize) -> Router {
    router(&ServiceConfig {
        store: store.to_path_buf(),
        workers,
        node_budget: 100_000,
        static_dir: None,
    })
    .unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: impl Into<String>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.into())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: impl Into<String>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn upload(app: &Router, name: &str) -> String {
    let (status, v) = call_json(app, "POST", "/scenarios", fixture_text(name)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

/// Polls until the job finishes, checking that its status never moves back.
async fn wait(app: &Router, job: &str) -> Value {
    let rank = |s: &str| match s {
        "queued" => 0,
        "running" => 1,
        _ => 2,
    };
    let mut last = 0;
    for _ in 0..2400 {
        let (status, v) = call_json(app, "GET", &format!("/jobs/{job}"), "").await;
        assert_eq!(status, StatusCode::OK);
        let s = v["status"].as_str().unwrap();
        assert!(rank(s) >= last, "status went back to {s}");
        last = rank(s);
        if last == 2 {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    panic!("job {job} did not finish");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn solve_video_through_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 1);
    let id = upload(&app, "sec2-video").await;
    let (status, job) = call_json(&app, "POST", &format!("/solve/{id}"), "").await;
    assert_eq!(status, StatusCode::ACCEPTED, "{job}");
    assert_eq!(job["status"], "queued");
    let done = wait(&app, job["id"].as_str().unwrap()).await;
    assert_eq!(done["status"], "done", "{done}");
    assert!(done["result"].is_string());
    assert!((done["output"]["cost_total"].as_f64().unwrap() - 130.0).abs() < 1e-6);

    let (status, text) = call(&app, "GET", &format!("/scenarios/{id}"), "").await;
    assert_eq!(status, StatusCode::OK);
    let back = nfvplan_core::model::Scenario::from_json(std::str::from_utf8(&text).unwrap()).unwrap();
    assert_eq!(back.content_hash(), id);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn plan_bytes_match_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/sec2-combined.json");
    let cli = std::process::Command::new(env!("CARGO_BIN_EXE_nfvplan"))
        .args(["solve", fixture.to_str().unwrap(), "--out-dir", out.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(cli.status.code(), Some(0));
    let from_cli = std::fs::read(out.path().join("plan.json")).unwrap();

    let app = app(dir.path(), 1);
    let id = upload(&app, "sec2-combined").await;
    let (_, job) = call_json(&app, "POST", &format!("/solve/{id}"), "").await;
    let job = job["id"].as_str().unwrap().to_string();
    wait(&app, &job).await;
    let (status, from_http) = call(&app, "GET", &format!("/jobs/{job}/result"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(from_http, from_cli);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn validation_and_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 1);
    let mut s: Value = serde_json::from_str(&fixture_text("sec2-video")).unwrap();
    s["classes"][0]["volumes"] = json!([1.0, 1.0, 10.0]);
    let (status, v) = call_json(&app, "POST", "/scenarios", s.to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["violations"][0]["rule"], "epoch_mismatch", "{v}");

    let (status, v) = call_json(&app, "POST", "/scenarios", "{\n  \"epochs\": ,\n}").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["line"], 2, "{v}");

    let missing = "0".repeat(64);
    for (method, uri) in [
        ("GET", format!("/scenarios/{missing}")),
        ("POST", format!("/solve/{missing}")),
        ("GET", "/jobs/job-999999".to_string()),
        ("GET", "/scenarios/..%2Fsecret".to_string()),
        ("GET", "/nowhere".to_string()),
    ] {
        let (status, _) = call(&app, method, &uri, "").await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{method} {uri}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn duplicate_jobs_conflict_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 1);
    let id = upload(&app, "sec2-video").await;
    let (first, a) = call_json(&app, "POST", &format!("/compare/{id}"), "").await;
    assert_eq!(first, StatusCode::ACCEPTED);
    let (again, b) = call_json(&app, "POST", &format!("/compare/{id}"), "").await;
    assert_eq!(again, StatusCode::CONFLICT);
    assert_eq!(b["job"]["id"], a["id"]);
    let (forced, c) = call_json(&app, "POST", &format!("/compare/{id}?force=true"), "").await;
    assert_eq!(forced, StatusCode::ACCEPTED);
    assert_ne!(c["id"], a["id"]);
    // a different request on the same scenario is not a duplicate
    let (other, _) = call_json(&app, "POST", &format!("/compare/{id}"), r#"{"variability":"flat"}"#).await;
    assert_eq!(other, StatusCode::ACCEPTED);
    let done = wait(&app, c["id"].as_str().unwrap()).await;
    assert_eq!(done["output"]["format"], "nfv-comparison/1");
    assert_eq!(done["output"]["rows"].as_array().unwrap().len(), 4);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn sweep_jobs_and_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 2);
    let id = upload(&app, "sec2-combined-nosla").await;
    let spec = json!({ "parameter": "cloud_elas_multiplier", "values": [1.0, 0.1, 0.01] });
    let (status, job) = call_json(&app, "POST", &format!("/sweep/{id}"), spec.to_string()).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{job}");
    let done = wait(&app, job["id"].as_str().unwrap()).await;
    let rows = done["output"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let last = rows.last().unwrap();
    assert!((last["mix"]["cloud"].as_f64().unwrap() - 1.0).abs() < 1e-9, "{last}");

    for bad in [
        json!({ "parameter": "cloud_elas_multiplier", "values": [] }),
        json!({ "parameter": "price", "values": [1.0] }),
        json!({ "parameter": "cloud_elas_multiplier", "values": [1.0, 1.0] }),
    ] {
        let (status, _) = call(&app, "POST", &format!("/sweep/{id}"), bad.to_string()).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn infeasible_solve_is_done_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 1);
    let id = upload(&app, "infeasible-latency").await;
    let (_, job) = call_json(&app, "POST", &format!("/solve/{id}"), "").await;
    let done = wait(&app, job["id"].as_str().unwrap()).await;
    assert_eq!(done["status"], "done");
    assert_eq!(done["output"]["status"], "infeasible");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn presets_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 1);
    let (status, v) = call_json(&app, "GET", "/presets", "").await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = v["presets"].as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["paper-2014", "toy-sec2"]);
    let toy = &v["presets"][1]["costs"];
    assert_eq!(toy["flexhw"]["var"], 20.0);
    assert_eq!(toy["cloud"]["elas"], 10.0);
}
