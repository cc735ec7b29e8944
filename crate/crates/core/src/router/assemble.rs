use super::search::{SearchPath, Step};
use super::{Itinerary, Leg, LegKind, RoutingProfile};
use crate::geo::{haversine_m, polyline_length_m, GeoPoint};
use crate::graph::MultimodalGraph;
use crate::time::GtfsTime;

struct StreetLeg {
    kind: LegKind,
    start: GtfsTime,
    distance_m: f64,
    geometry: Vec<GeoPoint>,
    way_ids: Vec<i64>,
}

impl StreetLeg {
    fn new(kind: LegKind, start: GtfsTime, at: GeoPoint) -> Self {
        Self {
            kind,
            start,
            distance_m: 0.0,
            geometry: vec![at],
            way_ids: Vec::new(),
        }
    }

    fn finish(mut self, end: GtfsTime) -> Leg {
        if self.geometry.len() < 2 {
            self.geometry.push(self.geometry[0]);
        }
        Leg {
            kind: self.kind,
            start_time: self.start,
            end_time: end,
            distance_m: self.distance_m,
            geometry: self.geometry,
            route_id: None,
            trip_id: None,
            board_stop: None,
            alight_stop: None,
            way_ids: self.way_ids,
            approximate: false,
        }
    }
}

/// Shape points between the ones nearest the board and alight stops, the
/// second searched only after the first.
fn shape_slice(shape: &[GeoPoint], from: GeoPoint, to: GeoPoint) -> Option<Vec<GeoPoint>> {
    let nearest =
        |start: usize, p: GeoPoint| (start..shape.len()).min_by(|&a, &b| haversine_m(shape[a], p).total_cmp(&haversine_m(shape[b], p)));
    let i = nearest(0, from)?;
    let j = nearest(i, to)?;
    (j > i).then(|| shape[i..=j].to_vec())
}

/// Turns a search path into legs: consecutive street steps merge into one
/// WALK or DRIVE leg that also absorbs any wait before the next boarding,
/// and each ride becomes a TRANSIT leg.
pub fn assemble_itinerary(path: &SearchPath, graph: &MultimodalGraph, profile: &RoutingProfile) -> Itinerary {
    let street_kind = if path.mode.drives() { LegKind::Drive } else { LegKind::Walk };
    let mut legs: Vec<Leg> = Vec::new();
    let mut current: Option<StreetLeg> = None;
    let mut clock = path.depart_at;
    let mut position = graph.street.point(path.origin);

    for ps in &path.steps {
        match ps.step {
            Step::Street { edge, from, to } => {
                let e = &graph.street.edges[edge as usize];
                let leg = current.get_or_insert_with(|| StreetLeg::new(street_kind, clock, graph.street.point(from)));
                leg.distance_m += e.length_m;
                leg.geometry.push(graph.street.point(to));
                if leg.way_ids.last() != Some(&e.way_id) {
                    leg.way_ids.push(e.way_id);
                }
                position = graph.street.point(to);
            }
            Step::Link { stop, vertex, entering } => {
                let s = &graph.stops[stop as usize];
                let v = graph.street.point(vertex);
                let (a, b) = if entering { (v, s.point) } else { (s.point, v) };
                let leg = current.get_or_insert_with(|| StreetLeg::new(LegKind::Walk, clock, a));
                leg.distance_m += s.link_length_m;
                leg.geometry.push(b);
                position = b;
            }
            Step::Ride {
                trip,
                board_event,
                alight_event,
                ..
            } => {
                let ix = &graph.index.trips[trip as usize];
                let board = &ix.events[board_event as usize];
                let alight = &ix.events[alight_event as usize];
                let board_stop = &graph.stops[board.stop as usize];
                let alight_stop = &graph.stops[alight.stop as usize];

                let waiting = current.take().unwrap_or_else(|| StreetLeg::new(LegKind::Walk, clock, position));
                legs.push(waiting.finish(ps.start));

                let t = &graph.trips[trip as usize];
                let geometry = t
                    .shape_id
                    .as_ref()
                    .and_then(|id| graph.shapes.get(id))
                    .and_then(|shape| shape_slice(shape, board_stop.point, alight_stop.point))
                    .unwrap_or_else(|| {
                        ix.events[board_event as usize..=alight_event as usize]
                            .iter()
                            .map(|e| graph.stops[e.stop as usize].point)
                            .collect()
                    });
                legs.push(Leg {
                    kind: LegKind::Transit,
                    start_time: ps.start,
                    end_time: ps.end,
                    distance_m: polyline_length_m(&geometry),
                    geometry,
                    route_id: Some(t.route_id.clone()),
                    trip_id: Some(t.trip_id.clone()),
                    board_stop: Some(board_stop.stop_id.clone()),
                    alight_stop: Some(alight_stop.stop_id.clone()),
                    way_ids: Vec::new(),
                    approximate: false,
                });
                position = alight_stop.point;
            }
        }
        clock = ps.end;
    }
    if let Some(leg) = current.take() {
        legs.push(leg.finish(path.arrival));
    } else if legs.is_empty() || clock < path.arrival {
        legs.push(StreetLeg::new(street_kind, clock, position).finish(path.arrival));
    }
    Itinerary::from_legs(legs, &profile.fare, graph)
}
