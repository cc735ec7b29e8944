//! Brute-force earliest arrival over raw feed and street data.
//!
//! Enumerates every location-simple sequence of street edges, stop links and
//! trip rides (each instance, each later alighting stop), keeping the best
//! arrival. Uses no graph indexes and its own copies of the constants.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use mmtp_core::gtfs::GtfsFeed;
use mmtp_core::osm::StreetNetwork;
use mmtp_core::{Mode, ServiceDate};

pub const WALK_MPS: f64 = 1.33;
pub const BOARD_SLACK_S: u32 = 60;
pub const HORIZON_S: u32 = 86_400;

pub fn drive_kmh(class: &str) -> f64 {
    match class {
        "residential" | "service" | "living_street" => 30.0,
        "unclassified" | "tertiary" => 40.0,
        "secondary" => 50.0,
        "primary" => 60.0,
        "trunk" => 80.0,
        "motorway" | "motorway_link" => 100.0,
        other => panic!("no drive speed for {other}"),
    }
}

fn walk_s(m: f64) -> u32 {
    (m / WALK_MPS).round() as u32
}

#[derive(Debug, Clone, Default)]
pub struct Exclusions {
    pub closed_edges: HashSet<usize>,
    pub disabled_stops: HashSet<String>,
    pub disabled_routes: HashSet<String>,
}

#[derive(Debug, Clone)]
pub struct Query {
    pub origin: usize,
    pub destination: usize,
    pub depart: u32,
    pub mode: Mode,
    pub max_walk_m: f64,
    pub banned: BTreeSet<String>,
}

/// One boardable run of a trip: absolute (stop index, arrival, departure)
/// per event.
struct Run {
    events: Vec<(usize, u32, u32)>,
}

pub struct Oracle<'a> {
    street: &'a StreetNetwork,
    /// Per stop in feed order: linked vertex and link length.
    links: Vec<Option<(usize, f64)>>,
    runs: Vec<Run>,
    query: &'a Query,
    excl: &'a Exclusions,
    best: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Loc {
    Street(usize),
    Stop(usize),
}

impl<'a> Oracle<'a> {
    pub fn new(
        feed: &GtfsFeed,
        street: &'a StreetNetwork,
        links: Vec<Option<(usize, f64)>>,
        date: ServiceDate,
        query: &'a Query,
        excl: &'a Exclusions,
    ) -> Self {
        let stop_ix = |id: &str| feed.stops.iter().position(|s| s.stop_id == id).unwrap();
        let mut runs = Vec::new();
        for trip in &feed.trips {
            let cal = feed.calendars.iter().find(|c| c.service_id == trip.service_id).unwrap();
            if !cal.active_on(date) || query.banned.contains(&trip.trip_id) || excl.disabled_routes.contains(&trip.route_id) {
                continue;
            }
            let times = &feed.stop_times[&trip.trip_id];
            let template: Vec<(usize, u32, u32)> = times
                .iter()
                .map(|st| (stop_ix(&st.stop_id), st.arrival.seconds(), st.departure.seconds()))
                .collect();
            let windows: Vec<_> = feed.frequencies.iter().filter(|f| f.trip_id == trip.trip_id).collect();
            if windows.is_empty() {
                runs.push(Run { events: template });
                continue;
            }
            let dep0 = template[0].2 as i64;
            for w in windows {
                let mut s = w.start_time.seconds();
                while s <= w.end_time.seconds() {
                    let shift = s as i64 - dep0;
                    let at = |t: u32| (t as i64 + shift) as u32;
                    runs.push(Run {
                        events: template.iter().map(|&(st, a, d)| (st, at(a), at(d))).collect(),
                    });
                    s += w.headway_secs;
                }
            }
        }
        Self {
            street,
            links,
            runs,
            query,
            excl,
            best: None,
        }
    }

    fn stop_ok(&self, s: usize, feed_stop_ids: &[String]) -> bool {
        self.links[s].is_some() && !self.excl.disabled_stops.contains(&feed_stop_ids[s])
    }

    pub fn solve(mut self, feed: &GtfsFeed) -> Option<u32> {
        let ids: Vec<String> = feed.stops.iter().map(|s| s.stop_id.clone()).collect();
        let mut visited = HashSet::new();
        visited.insert(Loc::Street(self.query.origin));
        self.dfs(Loc::Street(self.query.origin), self.query.depart, 0.0, &mut visited, &ids);
        self.best
    }

    fn dfs(&mut self, at: Loc, t: u32, walk: f64, visited: &mut HashSet<Loc>, ids: &[String]) {
        if self.best.is_some_and(|b| t >= b) {
            return;
        }
        if !self.query.mode.drives() && walk > self.query.max_walk_m {
            return;
        }
        if at == Loc::Street(self.query.destination) {
            self.best = Some(t);
            return;
        }
        let mut moves: Vec<(Loc, u32, f64)> = Vec::new();
        match at {
            Loc::Street(v) => {
                for (i, e) in self.street.edges.iter().enumerate() {
                    if self.excl.closed_edges.contains(&i) {
                        continue;
                    }
                    let (a, b) = (e.from_vertex.index(), e.to_vertex.index());
                    if self.query.mode.drives() {
                        if !e.drive_permitted {
                            continue;
                        }
                        let dt = (e.length_m / (drive_kmh(&e.highway_class) / 3.6)).round() as u32;
                        if a == v {
                            moves.push((Loc::Street(b), t + dt, walk));
                        }
                        if b == v && !e.oneway_drive {
                            moves.push((Loc::Street(a), t + dt, walk));
                        }
                    } else {
                        if !e.walk_permitted {
                            continue;
                        }
                        let dt = walk_s(e.length_m);
                        if a == v {
                            moves.push((Loc::Street(b), t + dt, walk + e.length_m));
                        }
                        if b == v {
                            moves.push((Loc::Street(a), t + dt, walk + e.length_m));
                        }
                    }
                }
                if self.query.mode == Mode::TransitWalk {
                    for s in 0..self.links.len() {
                        if let Some((lv, len)) = self.links[s] {
                            if lv == v && self.stop_ok(s, ids) {
                                moves.push((Loc::Stop(s), t + walk_s(len), walk + len));
                            }
                        }
                    }
                }
            }
            Loc::Stop(s) => {
                let (lv, len) = self.links[s].unwrap();
                moves.push((Loc::Street(lv), t + walk_s(len), walk + len));
                let limit = self.query.depart + HORIZON_S;
                for run in &self.runs {
                    let n = run.events.len();
                    for k in 0..n - 1 {
                        let (st, _, dep) = run.events[k];
                        if st != s || dep < t + BOARD_SLACK_S || dep > limit {
                            continue;
                        }
                        for j in k + 1..n {
                            let (to, arr, _) = run.events[j];
                            if self.stop_ok(to, ids) {
                                moves.push((Loc::Stop(to), arr, walk));
                            }
                        }
                    }
                }
            }
        }
        moves.sort_by_key(|m| m.1);
        for (loc, t2, w2) in moves {
            if visited.contains(&loc) {
                continue;
            }
            visited.insert(loc);
            self.dfs(loc, t2, w2, visited, ids);
            visited.remove(&loc);
        }
    }
}

/// Stop links as the oracle sees them, read from the built graph's stop
/// records (feed order).
pub fn links_of(graph: &mmtp_core::MultimodalGraph) -> Vec<Option<(usize, f64)>> {
    graph
        .stops
        .iter()
        .map(|s| s.linked_street_vertex.map(|v| (v.index(), s.link_length_m)))
        .collect()
}

pub fn brute_force(
    graph: &mmtp_core::MultimodalGraph,
    feed: &GtfsFeed,
    street: &StreetNetwork,
    date: ServiceDate,
    query: &Query,
    excl: &Exclusions,
) -> Option<u32> {
    Oracle::new(feed, street, links_of(graph), date, query, excl).solve(feed)
}
