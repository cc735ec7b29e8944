//! Seeded random queries and scenarios over synthetic instances.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mmtp_core::router::SearchRequest;
use mmtp_core::synth::RandomInstance;
use mmtp_core::{GeoPoint, Mode, MultimodalGraph, Scenario, VertexId};

use super::oracle::{Exclusions, Query};

pub fn random_query(rng: &mut StdRng, graph: &MultimodalGraph) -> Query {
    let n = graph.street.vertices.len();
    let mode = match rng.random_range(0..10) {
        0..=6 => Mode::TransitWalk,
        7 | 8 => Mode::Walk,
        _ => Mode::Drive,
    };
    Query {
        origin: rng.random_range(0..n),
        destination: rng.random_range(0..n),
        depart: rng.random_range(6 * 3600 + 1800..9 * 3600 + 1800),
        mode,
        max_walk_m: [400.0, 800.0, 1500.0, 3000.0][rng.random_range(0..4)],
        banned: BTreeSet::new(),
    }
}

pub fn queries(seed: u64, graph: &MultimodalGraph, n: usize) -> Vec<Query> {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..n).map(|_| random_query(&mut rng, graph)).collect()
}

pub fn search_request(q: &Query) -> SearchRequest {
    SearchRequest {
        origin: VertexId(q.origin as u32),
        destination: VertexId(q.destination as u32),
        date: mmtp_core::synth::tuesday(),
        depart_at: mmtp_core::GtfsTime(q.depart),
        mode: q.mode,
        max_walk_m: q.max_walk_m,
        banned_trips: q.banned.clone(),
    }
}

/// Closes random ways, disables random stops and routes, and sometimes adds
/// a triangle around a random vertex.
pub fn random_scenario(rng: &mut StdRng, inst: &RandomInstance, id: &str) -> Scenario {
    let g = &inst.graph;
    let mut s = Scenario {
        id: id.into(),
        name: id.into(),
        ..Scenario::default()
    };
    for e in &g.street.edges {
        if rng.random_bool(0.2) {
            s.closed_way_ids.push(e.way_id);
        }
    }
    for st in &g.stops {
        if rng.random_bool(0.2) {
            s.disabled_stop_ids.push(st.stop_id.clone());
        }
    }
    for r in &g.routes {
        if rng.random_bool(0.15) {
            s.disabled_route_ids.push(r.route_id.clone());
        }
    }
    if rng.random_bool(0.3) {
        let c = g.street.vertices[rng.random_range(0..g.street.vertices.len())].point;
        let d = 0.002;
        s.closed_areas.push(mmtp_core::scenario::GeoPolygon {
            ring: vec![
                GeoPoint::new(c.lat - d, c.lon - d),
                GeoPoint::new(c.lat - d, c.lon + d),
                GeoPoint::new(c.lat + d, c.lon),
            ],
        });
    }
    s
}

/// The oracle's view of a scenario, derived from the scenario definition
/// and raw coordinates rather than the router's overlay.
pub fn exclusions_of(inst: &RandomInstance, s: &Scenario) -> Exclusions {
    let inside = |p: GeoPoint| s.closed_areas.iter().any(|a| triangle_contains(&a.ring, p));
    let mut excl = Exclusions::default();
    for (i, e) in inst.street.edges.iter().enumerate() {
        let (a, b) = (
            inst.street.vertices[e.from_vertex.index()].point,
            inst.street.vertices[e.to_vertex.index()].point,
        );
        if s.closed_way_ids.contains(&e.way_id) || inside(a) || inside(b) {
            excl.closed_edges.insert(i);
        }
    }
    for st in &inst.feed.stops {
        if s.disabled_stop_ids.contains(&st.stop_id) || inside(st.point()) {
            excl.disabled_stops.insert(st.stop_id.clone());
        }
    }
    excl.disabled_routes = s.disabled_route_ids.iter().cloned().collect();
    excl
}

/// Same-side test against each edge of a triangle (boundary inclusive).
fn triangle_contains(ring: &[GeoPoint], p: GeoPoint) -> bool {
    assert_eq!(ring.len(), 3);
    let cross = |a: GeoPoint, b: GeoPoint| (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    let c = [cross(ring[0], ring[1]), cross(ring[1], ring[2]), cross(ring[2], ring[0])];
    c.iter().all(|&x| x >= 0.0) || c.iter().all(|&x| x <= 0.0)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
