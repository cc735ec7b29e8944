//! The routable substrate: street network plus linked stops and an indexed
//! timetable.

use std::collections::BTreeMap;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_m, BoundingBox, GeoPoint};
use crate::geocoder::{build_place_index, PlaceEntry};
use crate::gtfs::{GtfsFeed, ServiceCalendar, TransitRoute, Trip};
use crate::osm::{extract_street_network, ExtractError, OsmDocument, StreetNetwork, VertexId};
use crate::time::GtfsTime;

mod index;
mod io;

pub(crate) use index::GraphIndex;
pub use io::{deserialize_graph, serialize_graph, GraphIoError, FORMAT_VERSION};

pub const DEFAULT_LINK_RADIUS_M: f64 = 500.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("no stop lies within the link radius of a walkable street vertex")]
    NoStopsLinked,
    #[error("no street vertex permits {0}")]
    NoVertexForMode(Mode),
}

/// Travel mode of a request. The two transit-free modes each use one street
/// permission; `TransitWalk` walks on walk-permitted streets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Walk,
    TransitWalk,
    Drive,
}

impl Mode {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "WALK" => Some(Self::Walk),
            "TRANSIT_WALK" => Some(Self::TransitWalk),
            "DRIVE" => Some(Self::Drive),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Walk => "WALK",
            Self::TransitWalk => "TRANSIT_WALK",
            Self::Drive => "DRIVE",
        }
    }

    pub fn drives(self) -> bool {
        self == Self::Drive
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopVertex {
    pub stop_id: String,
    pub name: String,
    pub point: GeoPoint,
    pub linked_street_vertex: Option<VertexId>,
    pub link_length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Departure {
    pub departure: GtfsTime,
    pub trip_id: String,
    pub stop_sequence: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopEvent {
    pub stop_id: String,
    pub stop_sequence: u32,
    pub arrival: GtfsTime,
    pub departure: GtfsTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyWindow {
    pub start_time: GtfsTime,
    pub end_time: GtfsTime,
    pub headway_secs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Timetable {
    /// Per stop, ascending by (departure, trip_id, stop_sequence).
    pub stop_departures: BTreeMap<String, Vec<Departure>>,
    /// Per trip, ordered by stop_sequence.
    pub trip_events: BTreeMap<String, Vec<StopEvent>>,
    /// Frequency windows keyed by the trip they instantiate.
    pub frequencies: BTreeMap<String, Vec<FrequencyWindow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub bbox: BoundingBox,
    /// RFC 3339; supplied by the caller so identical inputs serialize
    /// identically.
    pub built_at: Option<String>,
    pub link_radius_m: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub link_radius_m: f64,
    pub built_at: Option<String>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            link_radius_m: DEFAULT_LINK_RADIUS_M,
            built_at: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultimodalGraph {
    pub meta: GraphMeta,
    pub street: StreetNetwork,
    pub stops: Vec<StopVertex>,
    pub timetable: Timetable,
    pub trips: Vec<Trip>,
    pub routes: Vec<TransitRoute>,
    pub calendars: Vec<ServiceCalendar>,
    /// Ordered shape geometry keyed by shape_id.
    pub shapes: BTreeMap<String, Vec<GeoPoint>>,
    /// Named places for the geocoder.
    pub places: Vec<PlaceEntry>,
    pub(crate) index: GraphIndex,
}

impl PartialEq for MultimodalGraph {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.street == other.street
            && self.stops == other.stops
            && self.timetable == other.timetable
            && self.trips == other.trips
            && self.routes == other.routes
            && self.calendars == other.calendars
            && self.shapes == other.shapes
            && self.places == other.places
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphCounts {
    pub vertices: usize,
    pub edges: usize,
    pub stops: usize,
    pub linked_stops: usize,
    pub trips: usize,
}

pub fn build_graph(street: StreetNetwork, feed: &GtfsFeed) -> Result<MultimodalGraph, GraphError> {
    build_graph_with(street, feed, &BuildOptions::default())
}

/// Merges streets and timetable, links stops to their nearest walkable
/// vertex and indexes the timetable for search.
pub fn build_graph_with(street: StreetNetwork, feed: &GtfsFeed, options: &BuildOptions) -> Result<MultimodalGraph, GraphError> {
    if street.edges.is_empty() {
        return Err(ExtractError::EmptyNetwork.into());
    }

    let stops = feed
        .stops
        .iter()
        .map(|s| StopVertex {
            stop_id: s.stop_id.clone(),
            name: s.name.clone(),
            point: s.point(),
            linked_street_vertex: None,
            link_length_m: 0.0,
        })
        .collect();

    let mut timetable = Timetable::default();
    for (trip_id, times) in &feed.stop_times {
        timetable.trip_events.insert(
            trip_id.clone(),
            times
                .iter()
                .map(|st| StopEvent {
                    stop_id: st.stop_id.clone(),
                    stop_sequence: st.stop_sequence,
                    arrival: st.arrival,
                    departure: st.departure,
                })
                .collect(),
        );
        for st in times {
            timetable.stop_departures.entry(st.stop_id.clone()).or_default().push(Departure {
                departure: st.departure,
                trip_id: trip_id.clone(),
                stop_sequence: st.stop_sequence,
            });
        }
    }
    for deps in timetable.stop_departures.values_mut() {
        deps.sort_by(|a, b| (a.departure, &a.trip_id, a.stop_sequence).cmp(&(b.departure, &b.trip_id, b.stop_sequence)));
    }
    for f in &feed.frequencies {
        timetable.frequencies.entry(f.trip_id.clone()).or_default().push(FrequencyWindow {
            start_time: f.start_time,
            end_time: f.end_time,
            headway_secs: f.headway_secs,
        });
    }

    let mut bbox = street.bbox;
    for s in feed.stops.iter().map(|s| s.point()).filter(GeoPoint::is_valid) {
        bbox.extend(s);
    }

    let mut graph = MultimodalGraph {
        meta: GraphMeta {
            bbox,
            built_at: options.built_at.clone(),
            link_radius_m: options.link_radius_m,
        },
        street,
        stops,
        timetable,
        trips: feed.trips.clone(),
        routes: feed.routes.clone(),
        calendars: feed.calendars.clone(),
        shapes: feed
            .shapes
            .iter()
            .map(|(id, pts)| (id.clone(), pts.iter().map(|p| p.point()).collect()))
            .collect(),
        places: Vec::new(),
        index: GraphIndex::default(),
    };

    let linked = link_stops(&mut graph, options.link_radius_m);
    info!(
        "linked {linked} of {} stops within {} m (nearest walkable vertex)",
        graph.stops.len(),
        options.link_radius_m
    );
    if linked == 0 && !graph.stops.is_empty() {
        return Err(GraphError::NoStopsLinked);
    }
    graph.rebuild_index();
    Ok(graph)
}

/// Extracts the street network from `doc`, builds the graph and indexes the
/// document's named places.
pub fn build_graph_from_osm(doc: &OsmDocument, feed: &GtfsFeed, options: &BuildOptions) -> Result<MultimodalGraph, GraphError> {
    let street = extract_street_network(doc)?;
    let mut graph = build_graph_with(street, feed, options)?;
    graph.places = build_place_index(doc).into_entries();
    Ok(graph)
}

/// Links every stop to its nearest walk-permitted vertex within `radius_m`;
/// stops beyond the radius stay unlinked. Returns the number linked.
pub fn link_stops(graph: &mut MultimodalGraph, radius_m: f64) -> usize {
    let walkable = permitted_vertices(&graph.street, Mode::Walk);
    let mut linked = 0;
    for stop in &mut graph.stops {
        stop.linked_street_vertex = None;
        stop.link_length_m = 0.0;
        if !stop.point.is_valid() {
            warn!("stop {} has invalid coordinates, left unlinked", stop.stop_id);
            continue;
        }
        match nearest_among(&graph.street, &walkable, stop.point) {
            Some((v, d)) if d <= radius_m => {
                stop.linked_street_vertex = Some(v);
                stop.link_length_m = d;
                linked += 1;
            }
            Some((_, d)) => warn!("stop {} is {d:.0} m from the street network, left unlinked", stop.stop_id),
            None => warn!("stop {}: no walkable street vertex", stop.stop_id),
        }
    }
    graph.meta.link_radius_m = radius_m;
    graph.rebuild_index();
    linked
}

pub(crate) fn permitted_vertices(street: &StreetNetwork, mode: Mode) -> Vec<bool> {
    let mut ok = vec![false; street.vertices.len()];
    for e in &street.edges {
        let permitted = if mode.drives() { e.drive_permitted } else { e.walk_permitted };
        if permitted {
            ok[e.from_vertex.index()] = true;
            ok[e.to_vertex.index()] = true;
        }
    }
    ok
}

fn nearest_among(street: &StreetNetwork, allowed: &[bool], p: GeoPoint) -> Option<(VertexId, f64)> {
    let mut best: Option<(VertexId, f64)> = None;
    for (i, v) in street.vertices.iter().enumerate() {
        if !allowed[i] {
            continue;
        }
        let d = haversine_m(p, v.point);
        // strict comparison keeps the smallest id on ties
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((VertexId(i as u32), d));
        }
    }
    best
}

/// Closest vertex usable by `mode`, with its distance. Points outside the
/// bounding box still snap to the globally nearest vertex.
pub fn nearest_vertex(graph: &MultimodalGraph, p: GeoPoint, mode: Mode) -> Result<(VertexId, f64), GraphError> {
    let allowed = if mode.drives() {
        &graph.index.drive_ok
    } else {
        &graph.index.walk_ok
    };
    nearest_among(&graph.street, allowed, p).ok_or(GraphError::NoVertexForMode(mode))
}

impl MultimodalGraph {
    pub(crate) fn rebuild_index(&mut self) {
        self.index = GraphIndex::build(self);
    }

    pub fn counts(&self) -> GraphCounts {
        GraphCounts {
            vertices: self.street.vertices.len(),
            edges: self.street.edges.len(),
            stops: self.stops.len(),
            linked_stops: self.stops.iter().filter(|s| s.linked_street_vertex.is_some()).count(),
            trips: self.trips.len(),
        }
    }

    pub fn stop(&self, stop_id: &str) -> Option<&StopVertex> {
        self.index.stop_by_id.get(stop_id).map(|&i| &self.stops[i as usize])
    }

    pub fn route(&self, route_id: &str) -> Option<&TransitRoute> {
        self.routes.iter().find(|r| r.route_id == route_id)
    }

    pub fn trip(&self, trip_id: &str) -> Option<&Trip> {
        self.index.trip_by_id.get(trip_id).map(|&i| &self.trips[i as usize])
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        self.meta.bbox.contains(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osm::{StreetEdge, StreetVertex};

    fn two_vertex_street() -> StreetNetwork {
        let a = GeoPoint::new(14.6, 121.0);
        let b = GeoPoint::new(14.61, 121.0);
        StreetNetwork {
            vertices: vec![StreetVertex { osm_id: 1, point: a }, StreetVertex { osm_id: 2, point: b }],
            edges: vec![StreetEdge {
                from_vertex: VertexId(0),
                to_vertex: VertexId(1),
                length_m: haversine_m(a, b),
                way_id: 1,
                highway_class: "footway".into(),
                walk_permitted: true,
                drive_permitted: false,
                oneway_drive: false,
            }],
            bbox: BoundingBox::from_points([a, b]).unwrap(),
        }
    }

    fn feed_with_stops(points: &[GeoPoint]) -> GtfsFeed {
        let mut feed = GtfsFeed::default();
        for (i, p) in points.iter().enumerate() {
            feed.stops.push(crate::gtfs::Stop {
                stop_id: format!("S{i}"),
                name: String::new(),
                lat: p.lat,
                lon: p.lon,
            });
        }
        feed
    }

    /// Point `meters` due east of `p` along the parallel, by inverting the
    /// haversine for a pure longitude offset.
    fn east_of(p: GeoPoint, meters: f64) -> GeoPoint {
        let c = meters / crate::geo::EARTH_RADIUS_M;
        let s = (c / 2.0).sin() / p.lat.to_radians().cos();
        GeoPoint::new(p.lat, p.lon + (2.0 * s.asin()).to_degrees())
    }

    #[test]
    fn link_radius_rule() {
        let street = two_vertex_street();
        let a = street.vertices[0].point;
        let feed = feed_with_stops(&[east_of(a, 10.0), east_of(a, 499.0), east_of(a, 501.0)]);
        let g = build_graph(street, &feed).unwrap();
        assert_eq!(g.stops[0].linked_street_vertex, Some(VertexId(0)));
        assert!((g.stops[0].link_length_m - 10.0).abs() < 1e-6);
        assert!(g.stops[1].linked_street_vertex.is_some());
        assert!(g.stops[2].linked_street_vertex.is_none());
        for s in g.stops.iter().filter(|s| s.linked_street_vertex.is_some()) {
            let v = g.street.point(s.linked_street_vertex.unwrap());
            assert_eq!(s.link_length_m, haversine_m(s.point, v));
            assert!(g.meta.bbox.contains(s.point));
        }
    }

    #[test]
    fn all_stops_far_away() {
        let street = two_vertex_street();
        let feed = feed_with_stops(&[GeoPoint::new(15.0, 121.0)]);
        assert_eq!(build_graph(street, &feed).unwrap_err(), GraphError::NoStopsLinked);
    }

    #[test]
    fn nearest_vertex_rules() {
        let g = build_graph(two_vertex_street(), &GtfsFeed::default()).unwrap();
        let a = g.street.vertices[0].point;
        assert_eq!(nearest_vertex(&g, a, Mode::Walk).unwrap(), (VertexId(0), 0.0));
        // far outside the box, still the nearest
        let (v, d) = nearest_vertex(&g, GeoPoint::new(20.0, 121.0), Mode::TransitWalk).unwrap();
        assert_eq!(v, VertexId(1));
        assert!(d > 500_000.0);
        assert_eq!(nearest_vertex(&g, a, Mode::Drive), Err(GraphError::NoVertexForMode(Mode::Drive)));
    }

    #[test]
    fn nearest_vertex_tie_takes_smaller_id() {
        let mut street = two_vertex_street();
        street.vertices[0].point = GeoPoint::new(0.0, 1.0);
        street.vertices[1].point = GeoPoint::new(0.0, -1.0);
        street.edges[0].length_m = haversine_m(street.vertices[0].point, street.vertices[1].point);
        let g = build_graph(street, &GtfsFeed::default()).unwrap();
        let mid = GeoPoint::new(0.0, 0.0);
        assert_eq!(
            haversine_m(mid, g.street.vertices[0].point),
            haversine_m(mid, g.street.vertices[1].point)
        );
        assert_eq!(nearest_vertex(&g, mid, Mode::Walk).unwrap().0, VertexId(0));
    }
}
