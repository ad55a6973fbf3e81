//! Drives the HTTP API in process: seeds the demo course, logs in as the
//! instructor and fetches the homework statistics.

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use chrono::Utc;
use dclab_service::http::router;
use dclab_service::seed::{seed_demo, DEMO_PASSWORD, INSTRUCTOR};
use dclab_service::service::{ManualClock, Service};
use dclab_service::store::{BlobStore, Store};
use dclab_service::Config;
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn call(app: &axum::Router, req: Request<Body>) -> serde_json::Value {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    println!("{status}");
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::main]
async fn main() {
    let clock = Arc::new(ManualClock::new(Utc::now()));
    let svc = Service::new(Store::in_memory(), BlobStore::in_memory(), clock.clone(), &Config::default());
    let summary = seed_demo(&svc, &clock).unwrap();
    let app = router(Arc::new(svc));

    let login = serde_json::json!({ "name": INSTRUCTOR, "password": DEMO_PASSWORD });
    let req = Request::post("/api/login").header("content-type", "application/json").body(Body::from(login.to_string())).unwrap();
    let token = call(&app, req).await["token"].as_str().unwrap().to_string();

    let req = Request::get(format!("/api/assignments/{}/stats", summary.assignment))
        .header("authorization", format!("Bearer {token}"))
        .body(Body::empty())
        .unwrap();
    let stats = call(&app, req).await;
    println!("submitted_ratio {}", stats["submitted_ratio"]);
    println!("solved_count {}", stats["solved_count"]);
    println!("tries_histogram {}", stats["tries_histogram"]);
    println!("hourly_histogram {}", stats["hourly_histogram"]);

    let req = Request::get("/api/home").body(Body::empty()).unwrap();
    println!("without a token: {}", call(&app, req).await);
}
