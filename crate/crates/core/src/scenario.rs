//! Disaster overlays: closed ways and areas, disabled stops and routes.
//! Applied per query; the base graph is never modified.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::graph::MultimodalGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("scenario id must not be empty")]
    EmptyId,
    #[error("closed area {index} has {points} point(s), at least 3 required")]
    InvalidPolygon { index: usize, points: usize },
    #[error("closed area {index} has an out-of-range coordinate")]
    InvalidCoordinate { index: usize },
}

/// Closed ring; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct GeoPolygon {
    pub ring: Vec<GeoPoint>,
}

impl From<Vec<[f64; 2]>> for GeoPolygon {
    fn from(pairs: Vec<[f64; 2]>) -> Self {
        Self {
            ring: pairs.into_iter().map(|[lat, lon]| GeoPoint::new(lat, lon)).collect(),
        }
    }
}

impl From<GeoPolygon> for Vec<[f64; 2]> {
    fn from(poly: GeoPolygon) -> Self {
        poly.ring.into_iter().map(|p| [p.lat, p.lon]).collect()
    }
}

/// Ray-casting parity in the (lon, lat) plane. Points on the boundary count
/// as inside.
pub fn point_in_polygon(poly: &GeoPolygon, p: GeoPoint) -> bool {
    let ring = &poly.ring;
    let n = ring.len();
    if n == 0 {
        return false;
    }
    let (x, y) = (p.lon, p.lat);
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let (x1, y1, x2, y2) = (a.lon, a.lat, b.lon, b.lat);
        if on_segment(x, y, x1, y1, x2, y2) {
            return true;
        }
        if (y1 > y) != (y2 > y) {
            let x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1);
            if x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(x: f64, y: f64, x1: f64, y1: f64, x2: f64, y2: f64) -> bool {
    let cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
    let scale = (x2 - x1).abs().max((y2 - y1).abs()).max(1.0);
    cross.abs() <= 1e-12 * scale && x >= x1.min(x2) && x <= x1.max(x2) && y >= y1.min(y2) && y <= y1.max(y2)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub closed_way_ids: Vec<i64>,
    #[serde(default)]
    pub closed_areas: Vec<GeoPolygon>,
    #[serde(default)]
    pub disabled_stop_ids: Vec<String>,
    #[serde(default)]
    pub disabled_route_ids: Vec<String>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.id.trim().is_empty() {
            return Err(ScenarioError::EmptyId);
        }
        self.validate_areas()
    }

    pub fn validate_areas(&self) -> Result<(), ScenarioError> {
        for (index, area) in self.closed_areas.iter().enumerate() {
            if area.ring.len() < 3 {
                return Err(ScenarioError::InvalidPolygon {
                    index,
                    points: area.ring.len(),
                });
            }
            if !area.ring.iter().all(GeoPoint::is_valid) {
                return Err(ScenarioError::InvalidCoordinate { index });
            }
        }
        Ok(())
    }
}

/// Closed edges and unusable stops/routes derived from a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioView<'g> {
    pub graph: &'g MultimodalGraph,
    pub(crate) closed_edges: Vec<bool>,
    pub(crate) disabled_stops: Vec<bool>,
    pub(crate) disabled_routes: Vec<bool>,
}

impl ScenarioView<'_> {
    pub fn closed_edge_set(&self) -> BTreeSet<usize> {
        self.closed_edges.iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| i).collect()
    }

    pub fn disabled_stop_ids(&self) -> BTreeSet<&str> {
        self.disabled_stops
            .iter()
            .zip(&self.graph.stops)
            .filter(|(d, _)| **d)
            .map(|(_, s)| s.stop_id.as_str())
            .collect()
    }

    pub fn is_edge_closed(&self, edge: usize) -> bool {
        self.closed_edges[edge]
    }

    pub fn is_stop_disabled(&self, stop: usize) -> bool {
        self.disabled_stops[stop]
    }

    pub fn is_route_disabled(&self, route: usize) -> bool {
        self.disabled_routes[route]
    }
}

/// An edge closes when its way is listed or either endpoint lies in a closed
/// area; stops inside a closed area are disabled alongside listed ones.
pub fn apply_scenario<'g>(graph: &'g MultimodalGraph, scenario: &Scenario) -> ScenarioView<'g> {
    let inside_any = |p: GeoPoint| scenario.closed_areas.iter().any(|a| point_in_polygon(a, p));
    let vertex_closed: Vec<bool> = graph.street.vertices.iter().map(|v| inside_any(v.point)).collect();
    let ways: HashSet<i64> = scenario.closed_way_ids.iter().copied().collect();
    let closed_edges = graph
        .street
        .edges
        .iter()
        .map(|e| ways.contains(&e.way_id) || vertex_closed[e.from_vertex.index()] || vertex_closed[e.to_vertex.index()])
        .collect();

    let stops: HashSet<&str> = scenario.disabled_stop_ids.iter().map(String::as_str).collect();
    let disabled_stops = graph
        .stops
        .iter()
        .map(|s| stops.contains(s.stop_id.as_str()) || inside_any(s.point))
        .collect();

    let routes: HashSet<&str> = scenario.disabled_route_ids.iter().map(String::as_str).collect();
    let disabled_routes = graph.routes.iter().map(|r| routes.contains(r.route_id.as_str())).collect();

    ScenarioView {
        graph,
        closed_edges,
        disabled_stops,
        disabled_routes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> GeoPolygon {
        // [lat, lon] pairs
        GeoPolygon::from(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
    }

    #[test]
    fn square_examples() {
        let sq = unit_square();
        assert!(point_in_polygon(&sq, GeoPoint::new(0.5, 0.5)));
        assert!(!point_in_polygon(&sq, GeoPoint::new(2.0, 2.0)));
        assert!(point_in_polygon(&sq, GeoPoint::new(0.5, 0.0)));
        assert!(point_in_polygon(&sq, GeoPoint::new(0.0, 0.5)));
        assert!(point_in_polygon(&sq, GeoPoint::new(1.0, 1.0)));
        assert!(!point_in_polygon(&sq, GeoPoint::new(0.5, 1.0 + 1e-9)));
    }

    #[test]
    fn concave_ring() {
        // U shape opening north
        let u = GeoPolygon::from(vec![
            [0.0, 0.0],
            [0.0, 3.0],
            [3.0, 3.0],
            [3.0, 2.0],
            [1.0, 2.0],
            [1.0, 1.0],
            [3.0, 1.0],
            [3.0, 0.0],
        ]);
        assert!(point_in_polygon(&u, GeoPoint::new(2.0, 0.5)));
        assert!(!point_in_polygon(&u, GeoPoint::new(2.0, 1.5)));
        assert!(point_in_polygon(&u, GeoPoint::new(0.5, 1.5)));
    }

    #[test]
    fn json_shape() {
        let json = r#"{"id":"flood","name":"Flood","closed_way_ids":[100],"closed_areas":[[[0.0,0.0],[0.0,1.0],[1.0,1.0]]],"disabled_stop_ids":["B"],"disabled_route_ids":[]}"#;
        let s: Scenario = serde_json::from_str(json).unwrap();
        assert_eq!(s.closed_areas[0].ring[1], GeoPoint::new(0.0, 1.0));
        assert_eq!(serde_json::to_string(&s).unwrap(), json);
        assert!(s.validate().is_ok());
        let two: Scenario = serde_json::from_str(r#"{"id":"x","closed_areas":[[[0,0],[1,1]]]}"#).unwrap();
        assert_eq!(two.validate(), Err(ScenarioError::InvalidPolygon { index: 0, points: 2 }));
    }

    proptest! {
        #[test]
        fn rectangle_matches_bounds(lat in -2.0f64..3.0, lon in -2.0f64..3.0) {
            let inside = (0.0..=1.0).contains(&lat) && (0.0..=1.0).contains(&lon);
            prop_assert_eq!(point_in_polygon(&unit_square(), GeoPoint::new(lat, lon)), inside);
        }
    }
}
