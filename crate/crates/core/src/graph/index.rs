//! Search-oriented indexes derived from the serialized graph. Rebuilt on
//! load, never persisted.

use std::collections::{BTreeMap, HashMap};

use super::{permitted_vertices, Mode, MultimodalGraph};
use crate::osm::VertexId;
use crate::time::GtfsTime;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    pub edge: u32,
    pub to: VertexId,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EventIx {
    pub stop: u32,
    pub arrival: GtfsTime,
    pub departure: GtfsTime,
}

#[derive(Debug, Clone)]
pub(crate) struct TripIx {
    pub route: Option<u32>,
    pub service: Option<u32>,
    pub events: Vec<EventIx>,
    /// `(start, end, headway)`; empty for scheduled trips.
    pub frequencies: Vec<(u32, u32, u32)>,
}

impl TripIx {
    pub fn is_frequency(&self) -> bool {
        !self.frequencies.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        self.events.len() >= 2
            && self.events.iter().all(|e| e.arrival <= e.departure)
            && self.events.windows(2).all(|w| w[0].departure <= w[1].arrival)
    }
}

/// Trips that share a stop sequence and never overtake each other, ordered
/// by departure. Boarding the first usable trip of a pattern dominates
/// boarding any later one.
#[derive(Debug, Clone)]
pub(crate) struct Pattern {
    pub trips: Vec<u32>,
}

/// A trip instance as seen at one stop of its pattern.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PatternTrip {
    pub pattern: u32,
    pub event: u32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct GraphIndex {
    pub walk_adj: Vec<Vec<Arc>>,
    pub drive_adj: Vec<Vec<Arc>>,
    pub walk_ok: Vec<bool>,
    pub drive_ok: Vec<bool>,
    pub stop_by_id: HashMap<String, u32>,
    /// Linked stops per street vertex.
    pub stops_at_vertex: Vec<Vec<u32>>,
    pub trip_by_id: HashMap<String, u32>,
    pub trips: Vec<TripIx>,
    pub patterns: Vec<Pattern>,
    /// Per stop, the patterns that can be boarded there (never the last
    /// event of a trip).
    pub boardable: Vec<Vec<PatternTrip>>,
}

impl GraphIndex {
    pub fn build(g: &MultimodalGraph) -> Self {
        let n = g.street.vertices.len();
        let mut walk_adj = vec![Vec::new(); n];
        let mut drive_adj = vec![Vec::new(); n];
        for (i, e) in g.street.edges.iter().enumerate() {
            let i = i as u32;
            if e.walk_permitted {
                walk_adj[e.from_vertex.index()].push(Arc { edge: i, to: e.to_vertex });
                walk_adj[e.to_vertex.index()].push(Arc {
                    edge: i,
                    to: e.from_vertex,
                });
            }
            if e.drive_permitted {
                drive_adj[e.from_vertex.index()].push(Arc { edge: i, to: e.to_vertex });
                if !e.oneway_drive {
                    drive_adj[e.to_vertex.index()].push(Arc {
                        edge: i,
                        to: e.from_vertex,
                    });
                }
            }
        }

        let stop_by_id: HashMap<String, u32> = g.stops.iter().enumerate().map(|(i, s)| (s.stop_id.clone(), i as u32)).collect();
        let mut stops_at_vertex = vec![Vec::new(); n];
        for (i, s) in g.stops.iter().enumerate() {
            if let Some(v) = s.linked_street_vertex {
                stops_at_vertex[v.index()].push(i as u32);
            }
        }

        let route_by_id: HashMap<String, u32> = g.routes.iter().enumerate().map(|(i, r)| (r.route_id.clone(), i as u32)).collect();
        let service_by_id: HashMap<String, u32> = g
            .calendars
            .iter()
            .enumerate()
            .map(|(i, c)| (c.service_id.clone(), i as u32))
            .collect();
        let trip_by_id: HashMap<String, u32> = g.trips.iter().enumerate().map(|(i, t)| (t.trip_id.clone(), i as u32)).collect();

        let trips: Vec<TripIx> = g
            .trips
            .iter()
            .map(|t| TripIx {
                route: route_by_id.get(&t.route_id).copied(),
                service: service_by_id.get(&t.service_id).copied(),
                events: g
                    .timetable
                    .trip_events
                    .get(&t.trip_id)
                    .into_iter()
                    .flatten()
                    .filter_map(|e| {
                        Some(EventIx {
                            stop: *stop_by_id.get(&e.stop_id)?,
                            arrival: e.arrival,
                            departure: e.departure,
                        })
                    })
                    .collect(),
                frequencies: g
                    .timetable
                    .frequencies
                    .get(&t.trip_id)
                    .into_iter()
                    .flatten()
                    .map(|f| (f.start_time.seconds(), f.end_time.seconds(), f.headway_secs))
                    .collect(),
            })
            .collect();

        let patterns = group_patterns(&g.trips, &trips);
        let mut boardable = vec![Vec::new(); g.stops.len()];
        for (p, pattern) in patterns.iter().enumerate() {
            let events = &trips[pattern.trips[0] as usize].events;
            for (k, e) in events.iter().enumerate().take(events.len().saturating_sub(1)) {
                boardable[e.stop as usize].push(PatternTrip {
                    pattern: p as u32,
                    event: k as u32,
                });
            }
        }

        Self {
            walk_ok: permitted_vertices(&g.street, Mode::Walk),
            drive_ok: permitted_vertices(&g.street, Mode::Drive),
            walk_adj,
            drive_adj,
            stop_by_id,
            stops_at_vertex,
            trip_by_id,
            trips,
            patterns,
            boardable,
        }
    }
}

/// Greedy FIFO grouping: a trip joins the first pattern with the same stop
/// sequence whose latest trip it does not overtake at any stop.
fn group_patterns(trips: &[crate::gtfs::Trip], ix: &[TripIx]) -> Vec<Pattern> {
    let mut order: Vec<u32> = (0..ix.len() as u32)
        .filter(|&t| {
            let ok = ix[t as usize].is_monotone();
            if !ok {
                log::warn!(
                    "trip {} has fewer than two stops or decreasing times, not routable",
                    trips[t as usize].trip_id
                );
            }
            ok
        })
        .collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (&ix[a as usize], &ix[b as usize]);
        (ta.events[0].departure, &trips[a as usize].trip_id).cmp(&(tb.events[0].departure, &trips[b as usize].trip_id))
    });

    let mut patterns: Vec<Pattern> = Vec::new();
    let mut by_sequence: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    for t in order {
        let trip = &ix[t as usize];
        if trip.is_frequency() {
            patterns.push(Pattern { trips: vec![t] });
            continue;
        }
        let key: Vec<u32> = trip.events.iter().map(|e| e.stop).collect();
        let candidates = by_sequence.entry(key).or_default();
        let fits = |p: &Pattern| {
            let last = &ix[*p.trips.last().unwrap() as usize];
            last.events
                .iter()
                .zip(&trip.events)
                .all(|(l, e)| e.arrival >= l.arrival && e.departure >= l.departure)
        };
        match candidates.iter().find(|&&p| fits(&patterns[p])) {
            Some(&p) => patterns[p].trips.push(t),
            None => {
                candidates.push(patterns.len());
                patterns.push(Pattern { trips: vec![t] });
            }
        }
    }
    patterns
}
