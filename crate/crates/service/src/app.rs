use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, RawQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::{SecondsFormat, Utc};
use log::{error, info};
use mmtp_core::geocoder::{GeocodeIndex, DEFAULT_LIMIT};
use mmtp_core::router::{plan, PlanError, PlanRequest, PlanResponse};
use mmtp_core::scenario::apply_scenario;
use mmtp_core::{GeoPoint, GtfsTime, Mode, MultimodalGraph, Scenario, ServiceDate};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::config::Settings;
use crate::querylog::{QueryLog, QueryLogRecord};

/// A loaded graph with its place index.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: MultimodalGraph,
    pub places: GeocodeIndex,
}

impl LoadedGraph {
    pub fn new(graph: MultimodalGraph) -> Self {
        let places = GeocodeIndex::new(graph.places.clone());
        Self { graph, places }
    }
}

#[derive(Debug)]
pub struct AppState {
    loaded: OnceLock<Arc<LoadedGraph>>,
    scenarios: RwLock<BTreeMap<String, Scenario>>,
    log: QueryLog,
    settings: Settings,
}

impl AppState {
    /// State with no graph yet; data endpoints answer 503 until
    /// [`AppState::set_graph`] is called.
    pub fn new(settings: Settings, log: QueryLog) -> Self {
        Self {
            loaded: OnceLock::new(),
            scenarios: RwLock::new(BTreeMap::new()),
            log,
            settings,
        }
    }

    pub fn with_graph(graph: MultimodalGraph, settings: Settings, log: QueryLog) -> Self {
        let state = Self::new(settings, log);
        state.set_graph(graph);
        state
    }

    pub fn set_graph(&self, graph: MultimodalGraph) {
        if self.loaded.set(Arc::new(LoadedGraph::new(graph))).is_err() {
            error!("graph already loaded, ignoring second load");
        }
    }

    pub fn is_ready(&self) -> bool {
        self.loaded.get().is_some()
    }

    fn graph(&self) -> Result<Arc<LoadedGraph>, ApiError> {
        self.loaded.get().cloned().ok_or(ApiError::Loading)
    }
}

#[derive(Debug)]
enum ApiError {
    Loading,
    BadRequest(String),
    NotFound(String),
    Conflict(String),
    Plan(PlanError),
}

impl ApiError {
    fn code(&self) -> &'static str {
        match self {
            Self::Loading => "unavailable",
            Self::BadRequest(_) => "bad_request",
            Self::NotFound(_) => "not_found",
            Self::Conflict(_) => "conflict",
            Self::Plan(e) => e.code(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            Self::Loading => (StatusCode::SERVICE_UNAVAILABLE, "graph is loading".to_owned()),
            Self::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            Self::NotFound(m) => (StatusCode::NOT_FOUND, m),
            Self::Conflict(m) => (StatusCode::CONFLICT, m),
            Self::Plan(PlanError::InvalidRequest(m)) => (StatusCode::BAD_REQUEST, m),
            Self::Plan(e) => (StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

pub fn app(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let router = Router::new()
        .route("/plan", get(handle_plan))
        .route("/geocode", get(handle_geocode))
        .route("/scenarios", get(list_scenarios).post(create_scenario))
        .route("/scenarios/{id}", get(get_scenario).delete(delete_scenario))
        .route("/health", get(health))
        .route("/graph/meta", get(graph_meta))
        .with_state(state);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}

fn required<'a>(params: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    params
        .get(key)
        .map(String::as_str)
        .filter(|v| !v.trim().is_empty())
        .ok_or_else(|| ApiError::BadRequest(format!("missing parameter {key}")))
}

fn parsed<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, ApiError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.trim().parse().map_err(|_| ApiError::BadRequest(format!("invalid {key}: {v:?}"))),
    }
}

/// `lat,lon` when the text is two decimals, otherwise the top geocoder hit.
fn resolve_place(loaded: &LoadedGraph, key: &str, text: &str) -> Result<GeoPoint, ApiError> {
    if let Some(p) = GeoPoint::parse_lat_lon(text) {
        return Ok(p);
    }
    loaded
        .places
        .search(text, 1)
        .first()
        .map(|e| e.point)
        .ok_or_else(|| ApiError::BadRequest(format!("{key}: no place matches {text:?}")))
}

fn build_request(state: &AppState, loaded: &LoadedGraph, params: &BTreeMap<String, String>) -> Result<PlanRequest, ApiError> {
    let origin = resolve_place(loaded, "fromPlace", required(params, "fromPlace")?)?;
    let destination = resolve_place(loaded, "toPlace", required(params, "toPlace")?)?;
    let date = ServiceDate::parse_iso(required(params, "date")?).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let depart_at = GtfsTime::parse_clock(required(params, "time")?).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let mode = match params.get("mode") {
        None => Mode::TransitWalk,
        Some(m) => Mode::parse(m).ok_or_else(|| ApiError::BadRequest(format!("invalid mode: {m:?}")))?,
    };
    let num_itineraries: usize = parsed(params, "numItineraries", state.settings.num_itineraries)?;
    let max_walk_m: f64 = parsed(params, "maxWalk", state.settings.max_walk_m)?;
    if num_itineraries == 0 {
        return Err(ApiError::BadRequest("numItineraries must be at least 1".into()));
    }
    if !(max_walk_m.is_finite() && max_walk_m > 0.0) {
        return Err(ApiError::BadRequest("maxWalk must be positive".into()));
    }
    Ok(PlanRequest {
        origin,
        destination,
        date,
        depart_at,
        mode,
        max_walk_m,
        num_itineraries,
        scenario_id: params.get("scenario").cloned().filter(|s| !s.is_empty()),
    })
}

async fn plan_inner(state: &Arc<AppState>, params: &BTreeMap<String, String>) -> Result<PlanResponse, ApiError> {
    let loaded = state.graph()?;
    let request = build_request(state, &loaded, params)?;
    let scenario = match &request.scenario_id {
        None => None,
        Some(id) => Some(
            state
                .scenarios
                .read()
                .unwrap_or_else(|e| e.into_inner())
                .get(id)
                .cloned()
                .ok_or_else(|| ApiError::NotFound(format!("unknown scenario {id:?}")))?,
        ),
    };
    let profile = state.settings.profile.clone();
    let result = tokio::task::spawn_blocking(move || {
        let graph = &loaded.graph;
        let view = scenario.as_ref().map(|s| apply_scenario(graph, s));
        plan(graph, &request, &profile, view.as_ref())
    })
    .await
    .map_err(|e| ApiError::BadRequest(format!("planner failed: {e}")))?;
    result.map_err(ApiError::Plan)
}

async fn handle_plan(
    State(state): State<Arc<AppState>>,
    RawQuery(raw): RawQuery,
    params: Result<Query<BTreeMap<String, String>>, QueryRejection>,
) -> Response {
    let started = Instant::now();
    let outcome = match params {
        Ok(Query(params)) => plan_inner(&state, &params).await,
        Err(_) => Err(ApiError::BadRequest("malformed query string".into())),
    };
    let record = QueryLogRecord {
        timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        query: raw.unwrap_or_default(),
        itinerary_count: outcome.as_ref().map_or(0, |r| r.itineraries.len()),
        compute_ms: started.elapsed().as_secs_f64() * 1000.0,
        error: outcome.as_ref().err().map(|e| e.code().to_owned()),
    };
    if let Err(e) = state.log.append(&record) {
        error!("query log write failed: {e}");
    }
    match outcome {
        Ok(response) => Json(response).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn handle_geocode(
    State(state): State<Arc<AppState>>,
    params: Result<Query<BTreeMap<String, String>>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let loaded = state.graph()?;
    let Ok(Query(params)) = params else {
        return Err(ApiError::BadRequest("malformed query string".into()));
    };
    let q = params.get("q").ok_or_else(|| ApiError::BadRequest("missing parameter q".into()))?;
    let limit: usize = parsed(&params, "limit", DEFAULT_LIMIT)?;
    let hits: Vec<Value> = loaded
        .places
        .search(q, limit)
        .into_iter()
        .map(|e| json!({ "name": e.name, "lat": e.point.lat, "lon": e.point.lon }))
        .collect();
    Ok(Json(Value::Array(hits)))
}

async fn list_scenarios(State(state): State<Arc<AppState>>) -> Json<Vec<Scenario>> {
    Json(
        state
            .scenarios
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect(),
    )
}

async fn create_scenario(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let scenario: Scenario = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("invalid scenario: {e}")))?;
    scenario.validate().map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let mut store = state.scenarios.write().unwrap_or_else(|e| e.into_inner());
    if store.contains_key(&scenario.id) {
        return Err(ApiError::Conflict(format!("scenario {:?} already exists", scenario.id)));
    }
    let id = scenario.id.clone();
    info!("scenario {id} stored");
    store.insert(id.clone(), scenario);
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn get_scenario(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Scenario>, ApiError> {
    state
        .scenarios
        .read()
        .unwrap_or_else(|e| e.into_inner())
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("unknown scenario {id:?}")))
}

async fn delete_scenario(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<StatusCode, ApiError> {
    match state.scenarios.write().unwrap_or_else(|e| e.into_inner()).remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound(format!("unknown scenario {id:?}"))),
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    if state.is_ready() {
        Json(json!({ "status": "ok" })).into_response()
    } else {
        (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "status": "loading" }))).into_response()
    }
}

async fn graph_meta(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let loaded = state.graph()?;
    let g = &loaded.graph;
    let c = g.counts();
    Ok(Json(json!({
        "bbox": g.meta.bbox,
        "counts": {
            "vertices": c.vertices,
            "edges": c.edges,
            "stops": c.stops,
            "linked_stops": c.linked_stops,
            "trips": c.trips,
        },
        "built_at": g.meta.built_at,
        "link_radius_m": g.meta.link_radius_m,
    })))
}
