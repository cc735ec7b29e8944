use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use mmtp_core::synth::minimetro_graph;
use mmtp_core::BOUNDARY_MESSAGE;
use mmtp_service::{app, AppState, QueryLog, Settings};
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

struct Harness {
    dir: TempDir,
    state: Arc<AppState>,
    router: Router,
}

impl Harness {
    fn new(loaded: bool) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let log = QueryLog::open(&dir.path().join("log.jsonl")).unwrap();
        let state = Arc::new(if loaded {
            AppState::with_graph(minimetro_graph(), Settings::default(), log)
        } else {
            AppState::new(Settings::default(), log)
        });
        let router = app(state.clone(), None);
        Self { dir, state, router }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map_or(Body::empty(), |b| Body::from(b.to_owned())))
            .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    fn log_lines(&self) -> Vec<Value> {
        std::fs::read_to_string(self.dir.path().join("log.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }
}

const PLAN: &str = "/plan?fromPlace=14.6000,121.0000&toPlace=14.6200,121.0000&date=2013-11-12&time=07:55:00";

#[tokio::test]
async fn plan_returns_itineraries() {
    let h = Harness::new(true);
    let (status, body) = h.get(PLAN).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let its = body["itineraries"].as_array().unwrap();
    assert!(!its.is_empty());
    assert_eq!(its[0]["legs"][1]["kind"], "TRANSIT");
    let log = h.log_lines();
    assert_eq!(log.len(), 1);
    assert_eq!(log[0]["itinerary_count"], its.len());
    assert!(log[0]["query"].as_str().unwrap().contains("fromPlace"));
}

#[tokio::test]
async fn boundary_error_is_422_with_message() {
    let h = Harness::new(true);
    let (status, body) = h
        .get("/plan?fromPlace=15.0,122.0&toPlace=15.1,122.1&date=2013-11-12&time=08:00:00")
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], BOUNDARY_MESSAGE);
    assert_eq!(h.log_lines()[0]["error"], "boundary");
}

#[tokio::test]
async fn bad_parameters_are_400() {
    let h = Harness::new(true);
    for uri in [
        format!("{PLAN}&numItineraries=0"),
        format!("{PLAN}&maxWalk=-3"),
        format!("{PLAN}&mode=TELEPORT"),
        "/plan?fromPlace=14.6,121.0&toPlace=14.62,121.0&time=08:00:00".to_owned(),
        "/plan?fromPlace=14.6,121.0&toPlace=14.62,121.0&date=2013-11-12".to_owned(),
        "/plan?fromPlace=nowhere%20at%20all&toPlace=14.62,121.0&date=2013-11-12&time=08:00:00".to_owned(),
    ] {
        let (status, body) = h.get(&uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}: {body}");
        assert!(body["error"].is_string());
    }
    assert_eq!(h.log_lines().len(), 6);
}

#[tokio::test]
async fn place_names_are_geocoded() {
    let h = Harness::new(true);
    let (status, body) = h
        .get("/plan?fromPlace=Toy%20Hall&toPlace=14.6200,121.0000&date=2013-11-12&time=07:55:00")
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let snap = body["diagnostics"]["origin_snap_m"].as_f64().unwrap();
    let expected = mmtp_core::haversine_m(mmtp_core::GeoPoint::new(14.6003, 121.0006), mmtp_core::GeoPoint::new(14.6, 121.0));
    assert!((snap - expected).abs() < 1e-6, "{snap} vs {expected}");
}

#[tokio::test]
async fn geocode_endpoint() {
    let h = Harness::new(true);
    let (status, body) = h.get("/geocode?q=toy&limit=2").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body.as_array().unwrap().len(), 2);
    assert!(body[0]["name"].as_str().unwrap().starts_with("Toy"));
    assert!(body[0]["lat"].is_number() && body[0]["lon"].is_number());
    let (status, _) = h.get("/geocode").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn scenario_lifecycle() {
    let h = Harness::new(true);
    let body = r#"{"id":"s1","name":"close C","disabled_stop_ids":["C"]}"#;
    let (status, created) = h.call(Method::POST, "/scenarios", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["id"], "s1");
    let (status, _) = h.call(Method::POST, "/scenarios", Some(body)).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, list) = h.get("/scenarios").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(list.as_array().unwrap().len(), 1);
    let (status, one) = h.get("/scenarios/s1").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(one["disabled_stop_ids"][0], "C");

    let (status, with) = h.get(&format!("{PLAN}&scenario=s1&maxWalk=5000")).await;
    assert_eq!(status, StatusCode::OK, "{with}");
    for it in with["itineraries"].as_array().unwrap() {
        for leg in it["legs"].as_array().unwrap() {
            assert_ne!(leg["alight_stop"], "C");
        }
    }

    let (status, _) = h.call(Method::DELETE, "/scenarios/s1", None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = h.call(Method::DELETE, "/scenarios/s1", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = h.get("/scenarios/s1").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = h.get(&format!("{PLAN}&scenario=s1")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn invalid_scenarios_are_rejected() {
    let h = Harness::new(true);
    for body in [
        r#"{"id":"p","closed_areas":[{"ring":[{"lat":14.6,"lon":121.0},{"lat":14.61,"lon":121.0}]}]}"#,
        r#"{"id":"","name":"x"}"#,
        "not json",
    ] {
        let (status, _) = h.call(Method::POST, "/scenarios", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
}

#[tokio::test]
async fn loading_state_answers_503() {
    let h = Harness::new(false);
    let (status, body) = h.get("/health").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["status"], "loading");
    assert_eq!(h.get(PLAN).await.0, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(h.get("/graph/meta").await.0, StatusCode::SERVICE_UNAVAILABLE);

    h.state.set_graph(minimetro_graph());
    let (status, body) = h.get("/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    let (status, meta) = h.get("/graph/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(meta["counts"]["stops"], 3);
    assert!(meta["bbox"].is_object());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_each_log_one_line() {
    let h = Arc::new(Harness::new(true));
    let mut tasks = Vec::new();
    for i in 0..100 {
        let h = h.clone();
        tasks.push(tokio::spawn(async move {
            let uri = if i % 3 == 0 {
                "/plan?fromPlace=15.0,122.0&toPlace=15.1,122.1&date=2013-11-12&time=08:00:00".to_owned()
            } else {
                format!(
                    "/plan?fromPlace=14.6000,121.0000&toPlace=14.6200,121.0000&date=2013-11-12&time=07:{:02}:00",
                    i % 60
                )
            };
            h.get(&uri).await.0
        }));
    }
    for t in tasks {
        let s = t.await.unwrap();
        assert!(s == StatusCode::OK || s == StatusCode::UNPROCESSABLE_ENTITY);
    }
    assert_eq!(h.log_lines().len(), 100);
}
