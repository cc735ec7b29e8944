//! Earliest-arrival search and itinerary planning.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::graph::Mode;
use crate::time::{GtfsTime, ServiceDate};

mod assemble;
mod fare;
mod plan;
mod search;

pub use assemble::assemble_itinerary;
pub use fare::{estimate_fare, FareConfig, FareRule};
pub use plan::plan;
pub use search::{earliest_arrival, next_departure, PathStep, SearchPath, SearchRequest, Step};

/// Exact text returned when both endpoints lie outside the map.
pub const BOUNDARY_MESSAGE: &str = "Trip is not possible. You might be trying to plan a trip outside the map boundary.";
pub const NO_PATH_MESSAGE: &str = "No trip found.";

pub const DEFAULT_MAX_WALK_M: f64 = 800.0;
pub const DEFAULT_NUM_ITINERARIES: usize = 3;
pub const DEFAULT_WALK_SPEED_MPS: f64 = 1.33;
pub const DEFAULT_BOARD_PENALTY_S: u32 = 60;
pub const DEFAULT_HORIZON_S: u32 = 24 * 3600;

/// Default driving speeds in km/h per `highway=*` class.
pub fn default_drive_speeds() -> BTreeMap<String, f64> {
    [
        ("residential", 30.0),
        ("service", 30.0),
        ("living_street", 30.0),
        ("unclassified", 40.0),
        ("tertiary", 40.0),
        ("secondary", 50.0),
        ("primary", 60.0),
        ("trunk", 80.0),
        ("motorway", 100.0),
        ("motorway_link", 100.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v))
    .collect()
}

/// Tunables shared by every query against one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoutingProfile {
    pub walk_speed_mps: f64,
    /// Minimum slack between reaching a stop and the departure boarded there.
    pub board_penalty_s: u32,
    /// Departures later than `depart_at + horizon_s` are not considered.
    pub horizon_s: u32,
    pub drive_speeds_kmh: BTreeMap<String, f64>,
    pub fare: FareConfig,
}

impl Default for RoutingProfile {
    fn default() -> Self {
        Self {
            walk_speed_mps: DEFAULT_WALK_SPEED_MPS,
            board_penalty_s: DEFAULT_BOARD_PENALTY_S,
            horizon_s: DEFAULT_HORIZON_S,
            drive_speeds_kmh: default_drive_speeds(),
            fare: FareConfig::default(),
        }
    }
}

impl RoutingProfile {
    pub fn walk_seconds(&self, meters: f64) -> u32 {
        (meters / self.walk_speed_mps).round() as u32
    }

    pub fn drive_seconds(&self, meters: f64, class: &str) -> u32 {
        let kmh = self.drive_speeds_kmh.get(class).copied().unwrap_or(30.0);
        (meters / (kmh / 3.6)).round() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub origin: GeoPoint,
    pub destination: GeoPoint,
    pub date: ServiceDate,
    pub depart_at: GtfsTime,
    pub mode: Mode,
    pub max_walk_m: f64,
    pub num_itineraries: usize,
    pub scenario_id: Option<String>,
}

impl PlanRequest {
    pub fn new(origin: GeoPoint, destination: GeoPoint, date: ServiceDate, depart_at: GtfsTime) -> Self {
        Self {
            origin,
            destination,
            date,
            depart_at,
            mode: Mode::TransitWalk,
            max_walk_m: DEFAULT_MAX_WALK_M,
            num_itineraries: DEFAULT_NUM_ITINERARIES,
            scenario_id: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LegKind {
    Walk,
    Transit,
    Drive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub kind: LegKind,
    pub start_time: GtfsTime,
    pub end_time: GtfsTime,
    pub distance_m: f64,
    pub geometry: Vec<GeoPoint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub route_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trip_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub board_stop: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alight_stop: Option<String>,
    /// OSM ways traversed, in order, for street legs.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub way_ids: Vec<i64>,
    /// Straight-line walk bridging an out-of-map endpoint to the network.
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub legs: Vec<Leg>,
    pub start_time: GtfsTime,
    pub end_time: GtfsTime,
    pub duration_s: u32,
    pub total_distance_m: f64,
    pub walk_distance_m: f64,
    pub estimated_fare: f64,
    pub boardings: u32,
}

impl Itinerary {
    pub fn from_legs(legs: Vec<Leg>, fare: &FareConfig, graph: &crate::graph::MultimodalGraph) -> Self {
        let start_time = legs.first().map_or(GtfsTime(0), |l| l.start_time);
        let end_time = legs.last().map_or(GtfsTime(0), |l| l.end_time);
        let mut it = Self {
            start_time,
            end_time,
            duration_s: end_time.seconds() - start_time.seconds(),
            total_distance_m: legs.iter().map(|l| l.distance_m).sum(),
            walk_distance_m: legs.iter().filter(|l| l.kind == LegKind::Walk).map(|l| l.distance_m).sum(),
            estimated_fare: 0.0,
            boardings: legs.iter().filter(|l| l.kind == LegKind::Transit).count() as u32,
            legs,
        };
        it.estimated_fare = estimate_fare(&it, fare, graph);
        it
    }

    pub fn trip_ids(&self) -> impl Iterator<Item = &str> {
        self.legs.iter().filter_map(|l| l.trip_id.as_deref())
    }

    /// Walk distance excluding approximate boundary legs.
    pub fn network_walk_m(&self) -> f64 {
        self.legs
            .iter()
            .filter(|l| l.kind == LegKind::Walk && !l.approximate)
            .map(|l| l.distance_m)
            .sum()
    }

    /// `(kind, trip id or way sequence)` per leg; equal signatures mean the
    /// same route through the network.
    pub fn signature(&self) -> Vec<(LegKind, String)> {
        self.legs
            .iter()
            .map(|l| {
                let key = match &l.trip_id {
                    Some(t) => t.clone(),
                    None => l.way_ids.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
                };
                (l.kind, key)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDiagnostics {
    pub origin_snap_m: f64,
    pub destination_snap_m: f64,
    /// Searches run, including the one that ended the alternatives loop.
    pub searches: u32,
    pub banned_trips: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub itineraries: Vec<Itinerary>,
    pub diagnostics: PlanDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("{}", BOUNDARY_MESSAGE)]
    OutsideBoundary,
    #[error("{}", NO_PATH_MESSAGE)]
    NoPath,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl PlanError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::OutsideBoundary => "boundary",
            Self::NoPath => "no_path",
            Self::InvalidRequest(_) => "invalid_request",
        }
    }
}
