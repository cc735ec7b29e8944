//! Multimodal trip planning over OpenStreetMap streets and GTFS timetables.
//!
//! The pipeline: parse a GTFS feed ([`gtfs`]) and an OSM extract ([`osm`]),
//! merge them into a [`MultimodalGraph`], then answer [`PlanRequest`]s with
//! [`plan`], optionally under a disaster [`Scenario`].

pub mod geo;
pub mod geocoder;
pub mod graph;
pub mod gtfs;
pub mod osm;
pub mod router;
pub mod scenario;
pub mod synth;
pub mod time;

pub use geo::{haversine_m, BoundingBox, GeoPoint};
pub use geocoder::{build_place_index, geocode, GeocodeIndex, PlaceEntry, PlaceSource};
pub use graph::{
    build_graph, build_graph_from_osm, build_graph_with, deserialize_graph, nearest_vertex, serialize_graph, BuildOptions, GraphError,
    GraphIoError, GraphMeta, Mode, MultimodalGraph,
};
pub use gtfs::{parse_feed, validate_feed, GtfsError, GtfsFeed, ValidationIssue};
pub use osm::{extract_street_network, parse_osm_xml, OsmDocument, StreetNetwork, VertexId};
pub use router::{
    earliest_arrival, plan, FareConfig, Itinerary, Leg, LegKind, PlanError, PlanRequest, PlanResponse, RoutingProfile, BOUNDARY_MESSAGE,
    NO_PATH_MESSAGE,
};
pub use scenario::{apply_scenario, Scenario, ScenarioError, ScenarioView};
pub use time::{GtfsTime, ServiceDate};
