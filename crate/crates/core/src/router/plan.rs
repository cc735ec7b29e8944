use std::collections::{BTreeSet, HashSet};

use super::search::{earliest_arrival, SearchRequest};
use super::{assemble_itinerary, Itinerary, Leg, LegKind, PlanDiagnostics, PlanError, PlanRequest, PlanResponse, RoutingProfile};
use crate::geo::{haversine_m, GeoPoint};
use crate::graph::{nearest_vertex, MultimodalGraph};
use crate::scenario::ScenarioView;
use crate::time::GtfsTime;

fn approximate_leg(from: GeoPoint, to: GeoPoint, start: GtfsTime, profile: &RoutingProfile) -> Leg {
    let d = haversine_m(from, to);
    Leg {
        kind: LegKind::Walk,
        start_time: start,
        end_time: GtfsTime(start.seconds() + profile.walk_seconds(d)),
        distance_m: d,
        geometry: vec![from, to],
        route_id: None,
        trip_id: None,
        board_stop: None,
        alight_stop: None,
        way_ids: Vec::new(),
        approximate: true,
    }
}

fn validate(request: &PlanRequest) -> Result<(), PlanError> {
    if request.num_itineraries == 0 {
        return Err(PlanError::InvalidRequest("num_itineraries must be at least 1".into()));
    }
    if !(request.max_walk_m.is_finite() && request.max_walk_m > 0.0) {
        return Err(PlanError::InvalidRequest("max_walk_m must be positive".into()));
    }
    if !request.origin.is_valid() || !request.destination.is_valid() {
        return Err(PlanError::InvalidRequest("coordinates out of range".into()));
    }
    Ok(())
}

/// Snaps both endpoints, then collects up to `num_itineraries` alternatives
/// by banning every trip already used and searching again. Endpoints outside
/// the map get straight-line approximate walk legs to their snap vertex.
pub fn plan(
    graph: &MultimodalGraph,
    request: &PlanRequest,
    profile: &RoutingProfile,
    view: Option<&ScenarioView<'_>>,
) -> Result<PlanResponse, PlanError> {
    validate(request)?;
    let origin_inside = graph.contains(request.origin);
    let destination_inside = graph.contains(request.destination);
    if !origin_inside && !destination_inside {
        return Err(PlanError::OutsideBoundary);
    }
    let (origin, origin_snap_m) = nearest_vertex(graph, request.origin, request.mode).map_err(|_| PlanError::NoPath)?;
    let (destination, destination_snap_m) = nearest_vertex(graph, request.destination, request.mode).map_err(|_| PlanError::NoPath)?;

    let head = (!origin_inside).then(|| approximate_leg(request.origin, graph.street.point(origin), request.depart_at, profile));
    let depart_at = head.as_ref().map_or(request.depart_at, |l| l.end_time);

    let mut search = SearchRequest {
        origin,
        destination,
        date: request.date,
        depart_at,
        mode: request.mode,
        max_walk_m: request.max_walk_m,
        banned_trips: BTreeSet::new(),
    };
    let mut itineraries: Vec<Itinerary> = Vec::new();
    let mut signatures = HashSet::new();
    let mut searches = 0;
    while itineraries.len() < request.num_itineraries {
        searches += 1;
        let Some(path) = earliest_arrival(graph, &search, profile, view) else {
            break;
        };
        let core = assemble_itinerary(&path, graph, profile);
        let mut legs = Vec::with_capacity(core.legs.len() + 2);
        legs.extend(head.clone());
        legs.extend(core.legs);
        if !destination_inside {
            legs.push(approximate_leg(
                graph.street.point(destination),
                request.destination,
                path.arrival,
                profile,
            ));
        }
        let itinerary = Itinerary::from_legs(legs, &profile.fare, graph);
        if !signatures.insert(itinerary.signature()) {
            break;
        }
        let used: Vec<String> = itinerary.trip_ids().map(str::to_owned).collect();
        let fresh = used.iter().any(|t| !search.banned_trips.contains(t));
        itineraries.push(itinerary);
        if !fresh {
            break;
        }
        search.banned_trips.extend(used);
    }
    if itineraries.is_empty() {
        return Err(PlanError::NoPath);
    }
    itineraries.sort_by_key(|it| (it.end_time, it.boardings));
    Ok(PlanResponse {
        itineraries,
        diagnostics: PlanDiagnostics {
            origin_snap_m,
            destination_snap_m,
            searches,
            banned_trips: search.banned_trips.into_iter().collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mode;
    use crate::router::BOUNDARY_MESSAGE;
    use crate::synth;

    fn req(from: GeoPoint, to: GeoPoint, t: GtfsTime) -> PlanRequest {
        PlanRequest::new(from, to, synth::tuesday(), t)
    }

    #[test]
    fn both_outside_is_boundary_error() {
        let g = synth::minimetro_graph();
        let r = req(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 0.0), GtfsTime::hms(8, 0, 0));
        let err = plan(&g, &r, &RoutingProfile::default(), None).unwrap_err();
        assert_eq!(err, PlanError::OutsideBoundary);
        assert_eq!(err.to_string(), BOUNDARY_MESSAGE);
    }

    #[test]
    fn outside_destination_gets_approximate_leg() {
        let g = synth::minimetro_graph();
        let inside = g.street.vertices[0].point;
        let outside = GeoPoint::new(14.64, 121.0);
        let r = PlanRequest {
            mode: Mode::Walk,
            max_walk_m: 5000.0,
            ..req(inside, outside, GtfsTime::hms(9, 0, 0))
        };
        let resp = plan(&g, &r, &RoutingProfile::default(), None).unwrap();
        let legs = &resp.itineraries[0].legs;
        let last = legs.last().unwrap();
        assert!(last.approximate);
        assert_eq!(last.kind, LegKind::Walk);
        assert_eq!(*last.geometry.last().unwrap(), outside);
        assert_eq!(last.distance_m, haversine_m(g.street.vertices[4].point, outside));
        assert!(last.distance_m > 2000.0);
        assert!(legs[..legs.len() - 1].iter().all(|l| !l.approximate));
        for w in legs.windows(2) {
            assert_eq!(w[0].end_time, w[1].start_time);
        }
    }

    #[test]
    fn invalid_requests() {
        let g = synth::minimetro_graph();
        let p = g.street.vertices[0].point;
        let profile = RoutingProfile::default();
        let zero = PlanRequest {
            num_itineraries: 0,
            ..req(p, p, GtfsTime(0))
        };
        assert!(matches!(plan(&g, &zero, &profile, None), Err(PlanError::InvalidRequest(_))));
        let walk = PlanRequest {
            max_walk_m: 0.0,
            ..req(p, p, GtfsTime(0))
        };
        assert!(matches!(plan(&g, &walk, &profile, None), Err(PlanError::InvalidRequest(_))));
    }

    #[test]
    fn long_walk_without_transit_is_no_trip() {
        let g = synth::minimetro_graph();
        let a = g.street.vertices[0].point;
        let e = g.street.vertices.last().unwrap().point;
        let r = PlanRequest {
            mode: Mode::Walk,
            ..req(a, e, GtfsTime::hms(9, 0, 0))
        };
        let err = plan(&g, &r, &RoutingProfile::default(), None).unwrap_err();
        assert_eq!(err.to_string(), "No trip found.");
    }

    #[test]
    fn minimetro_alternatives_are_trip_disjoint() {
        let g = synth::minimetro_graph();
        let a = g.stop("A").unwrap().point;
        let c = g.stop("C").unwrap().point;
        let resp = plan(&g, &req(a, c, GtfsTime::hms(7, 55, 0)), &RoutingProfile::default(), None).unwrap();
        let trips: Vec<Vec<&str>> = resp.itineraries.iter().map(|i| i.trip_ids().collect()).collect();
        assert_eq!(trips, [vec!["T1"], vec!["TF"]]);
        assert!(resp.itineraries.windows(2).all(|w| w[0].end_time <= w[1].end_time));
    }
}
