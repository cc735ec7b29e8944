use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GraphIndex, GraphMeta, MultimodalGraph, StopVertex, Timetable};
use crate::geo::GeoPoint;
use crate::geocoder::PlaceEntry;
use crate::gtfs::{ServiceCalendar, TransitRoute, Trip};
use crate::osm::StreetNetwork;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("graph file has format_version {found}, expected {FORMAT_VERSION}")]
    VersionMismatch { found: u64 },
    #[error("corrupt graph file: {0}")]
    CorruptGraph(String),
}

#[derive(Serialize)]
struct GraphFileRef<'a> {
    format_version: u32,
    meta: &'a GraphMeta,
    street: &'a StreetNetwork,
    stops: &'a [StopVertex],
    timetable: &'a Timetable,
    trips: &'a [Trip],
    routes: &'a [TransitRoute],
    calendars: &'a [ServiceCalendar],
    shapes: &'a BTreeMap<String, Vec<GeoPoint>>,
    places: &'a [PlaceEntry],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    #[allow(dead_code)]
    format_version: u32,
    meta: GraphMeta,
    street: StreetNetwork,
    stops: Vec<StopVertex>,
    timetable: Timetable,
    trips: Vec<Trip>,
    routes: Vec<TransitRoute>,
    calendars: Vec<ServiceCalendar>,
    shapes: BTreeMap<String, Vec<GeoPoint>>,
    places: Vec<PlaceEntry>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u64,
}

/// Single-document JSON. Every map is ordered, so equal graphs produce
/// identical bytes.
pub fn serialize_graph(graph: &MultimodalGraph) -> Vec<u8> {
    let file = GraphFileRef {
        format_version: FORMAT_VERSION,
        meta: &graph.meta,
        street: &graph.street,
        stops: &graph.stops,
        timetable: &graph.timetable,
        trips: &graph.trips,
        routes: &graph.routes,
        calendars: &graph.calendars,
        shapes: &graph.shapes,
        places: &graph.places,
    };
    serde_json::to_vec(&file).expect("graph serializes to JSON")
}

pub fn deserialize_graph(bytes: &[u8]) -> Result<MultimodalGraph, GraphIoError> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| GraphIoError::CorruptGraph(e.to_string()))?;
    if probe.format_version != u64::from(FORMAT_VERSION) {
        return Err(GraphIoError::VersionMismatch {
            found: probe.format_version,
        });
    }
    let file: GraphFile = serde_json::from_slice(bytes).map_err(|e| GraphIoError::CorruptGraph(e.to_string()))?;
    check_references(&file)?;
    let mut graph = MultimodalGraph {
        meta: file.meta,
        street: file.street,
        stops: file.stops,
        timetable: file.timetable,
        trips: file.trips,
        routes: file.routes,
        calendars: file.calendars,
        shapes: file.shapes,
        places: file.places,
        index: GraphIndex::default(),
    };
    graph.rebuild_index();
    Ok(graph)
}

/// Indexes in the file must be in range before the router trusts them.
fn check_references(file: &GraphFile) -> Result<(), GraphIoError> {
    let corrupt = |m: String| Err(GraphIoError::CorruptGraph(m));
    let n = file.street.vertices.len();
    if let Some(e) = file
        .street
        .edges
        .iter()
        .find(|e| e.from_vertex.index() >= n || e.to_vertex.index() >= n)
    {
        return corrupt(format!("edge of way {} references a missing vertex", e.way_id));
    }
    if let Some(s) = file.stops.iter().find(|s| s.linked_street_vertex.is_some_and(|v| v.index() >= n)) {
        return corrupt(format!("stop {} linked to a missing vertex", s.stop_id));
    }
    let stop_ids: std::collections::HashSet<&str> = file.stops.iter().map(|s| s.stop_id.as_str()).collect();
    for (trip_id, events) in &file.timetable.trip_events {
        if let Some(e) = events.iter().find(|e| !stop_ids.contains(e.stop_id.as_str())) {
            return corrupt(format!("trip {trip_id} visits unknown stop {}", e.stop_id));
        }
    }
    if file.timetable.frequencies.values().flatten().any(|f| f.headway_secs == 0) {
        return corrupt("frequency with zero headway".into());
    }
    Ok(())
}
