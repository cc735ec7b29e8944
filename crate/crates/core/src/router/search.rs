//! Time-ordered label-setting search over streets, stop links and trips.
//!
//! Labels carry `(time, walk_m)`. A label settles unless an earlier-or-equal
//! label at the same node already walked no farther, which keeps the search
//! exact under the `max_walk_m` budget.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::RoutingProfile;
use crate::graph::{Mode, MultimodalGraph};
use crate::gtfs::next_in_window;
use crate::osm::VertexId;
use crate::scenario::ScenarioView;
use crate::time::{GtfsTime, ServiceDate};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub origin: VertexId,
    pub destination: VertexId,
    pub date: ServiceDate,
    pub depart_at: GtfsTime,
    pub mode: Mode,
    pub max_walk_m: f64,
    pub banned_trips: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Street {
        edge: u32,
        from: VertexId,
        to: VertexId,
    },
    /// Walk between a stop and its linked vertex.
    Link {
        stop: u32,
        vertex: VertexId,
        entering: bool,
    },
    /// Ride one trip instance from `board_event` to `alight_event`;
    /// `shift` offsets template times for frequency instances.
    Ride {
        trip: u32,
        board_event: u32,
        alight_event: u32,
        shift: i32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub step: Step,
    pub start: GtfsTime,
    pub end: GtfsTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchPath {
    pub origin: VertexId,
    pub mode: Mode,
    pub depart_at: GtfsTime,
    pub arrival: GtfsTime,
    pub walk_m: f64,
    pub steps: Vec<PathStep>,
}

impl SearchPath {
    pub fn trips(&self) -> impl Iterator<Item = u32> + '_ {
        self.steps.iter().filter_map(|s| match s.step {
            Step::Ride { trip, .. } => Some(trip),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Street(u32),
    Stop(u32),
    /// On the vehicle departing event `event` of the trip.
    Board {
        trip: u32,
        shift: i32,
        event: u32,
    },
}

#[derive(Debug, Clone, Copy)]
enum Via {
    Origin,
    Street(u32),
    EnterStop,
    ExitStop,
    Board,
    Hop,
    Alight,
}

#[derive(Debug, Clone, Copy)]
struct Label {
    node: Node,
    time: u32,
    walk: f64,
    boardings: u32,
    parent: u32,
    via: Via,
}

const NO_PARENT: u32 = u32::MAX;

/// Earliest scheduled or frequency-generated departure at `stop_id` no
/// earlier than `t` on `date`; ties go to the smaller trip id. The final
/// stop of a trip offers no departure.
pub fn next_departure(graph: &MultimodalGraph, stop_id: &str, t: GtfsTime, date: ServiceDate) -> Option<(String, GtfsTime)> {
    let ix = &graph.index;
    let stop = *ix.stop_by_id.get(stop_id)?;
    let mut best: Option<(u32, &str)> = None;
    for (i, trip) in ix.trips.iter().enumerate() {
        if !trip.service.is_some_and(|s| graph.calendars[s as usize].active_on(date)) {
            continue;
        }
        let last = trip.events.len().saturating_sub(1);
        for e in trip.events.iter().take(last) {
            if e.stop != stop {
                continue;
            }
            let dep = if trip.is_frequency() {
                let offset = e.departure.seconds() - trip.events[0].departure.seconds();
                trip.frequencies
                    .iter()
                    .filter_map(|&(s, end, h)| next_in_window(s, end, h, t.seconds().saturating_sub(offset)))
                    .min()
                    .map(|s| s + offset)
            } else {
                Some(e.departure.seconds()).filter(|&d| d >= t.seconds())
            };
            if let Some(d) = dep {
                let id = graph.trips[i].trip_id.as_str();
                if best.is_none_or(|b| (d, id) < b) {
                    best = Some((d, id));
                }
            }
        }
    }
    best.map(|(d, id)| (id.to_owned(), GtfsTime(d)))
}

struct Search<'a> {
    graph: &'a MultimodalGraph,
    req: &'a SearchRequest,
    profile: &'a RoutingProfile,
    view: Option<&'a ScenarioView<'a>>,
    service_active: Vec<bool>,
    banned: Vec<bool>,
    labels: Vec<Label>,
    heap: BinaryHeap<Reverse<(u32, u32, u64, u32)>>,
    street_walk: Vec<f64>,
    stop_walk: Vec<f64>,
    board_walk: HashMap<(u32, i32, u32), f64>,
    horizon_end: u32,
}

impl<'a> Search<'a> {
    fn new(graph: &'a MultimodalGraph, req: &'a SearchRequest, profile: &'a RoutingProfile, view: Option<&'a ScenarioView<'a>>) -> Self {
        let ix = &graph.index;
        let mut banned = vec![false; ix.trips.len()];
        for id in &req.banned_trips {
            if let Some(&t) = ix.trip_by_id.get(id) {
                banned[t as usize] = true;
            }
        }
        Self {
            graph,
            req,
            profile,
            view,
            service_active: graph.calendars.iter().map(|c| c.active_on(req.date)).collect(),
            banned,
            labels: Vec::new(),
            heap: BinaryHeap::new(),
            street_walk: vec![f64::INFINITY; graph.street.vertices.len()],
            stop_walk: vec![f64::INFINITY; graph.stops.len()],
            board_walk: HashMap::new(),
            horizon_end: req.depart_at.seconds().saturating_add(profile.horizon_s),
        }
    }

    fn settled_walk(&self, node: Node) -> f64 {
        match node {
            Node::Street(v) => self.street_walk[v as usize],
            Node::Stop(s) => self.stop_walk[s as usize],
            Node::Board { trip, shift, event } => self.board_walk.get(&(trip, shift, event)).copied().unwrap_or(f64::INFINITY),
        }
    }

    fn settle(&mut self, node: Node, walk: f64) {
        match node {
            Node::Street(v) => self.street_walk[v as usize] = walk,
            Node::Stop(s) => self.stop_walk[s as usize] = walk,
            Node::Board { trip, shift, event } => {
                self.board_walk.insert((trip, shift, event), walk);
            }
        }
    }

    fn push(&mut self, label: Label) {
        if label.walk > self.req.max_walk_m && !self.req.mode.drives() {
            return;
        }
        if self.settled_walk(label.node) <= label.walk {
            return;
        }
        let idx = self.labels.len() as u32;
        self.labels.push(label);
        self.heap.push(Reverse((label.time, label.boardings, label.walk.to_bits(), idx)));
    }

    fn stop_usable(&self, stop: u32) -> bool {
        self.graph.stops[stop as usize].linked_street_vertex.is_some() && !self.view.is_some_and(|v| v.is_stop_disabled(stop as usize))
    }

    fn trip_usable(&self, trip: u32) -> bool {
        let t = &self.graph.index.trips[trip as usize];
        !self.banned[trip as usize]
            && t.service.is_some_and(|s| self.service_active[s as usize])
            && !matches!((self.view, t.route), (Some(v), Some(r)) if v.is_route_disabled(r as usize))
    }

    fn run(&mut self, trace: &mut Option<Vec<u32>>) -> Option<u32> {
        let origin = Label {
            node: Node::Street(self.req.origin.0),
            time: self.req.depart_at.seconds(),
            walk: 0.0,
            boardings: 0,
            parent: NO_PARENT,
            via: Via::Origin,
        };
        self.push(origin);
        let dest = Node::Street(self.req.destination.0);
        while let Some(Reverse((_, _, _, idx))) = self.heap.pop() {
            let label = self.labels[idx as usize];
            if self.settled_walk(label.node) <= label.walk {
                continue;
            }
            self.settle(label.node, label.walk);
            if let Some(t) = trace.as_mut() {
                t.push(label.time);
            }
            if label.node == dest {
                return Some(idx);
            }
            match label.node {
                Node::Street(v) => self.expand_street(idx, label, v),
                Node::Stop(s) => self.expand_stop(idx, label, s),
                Node::Board { trip, shift, event } => self.expand_board(idx, label, trip, shift, event),
            }
        }
        None
    }

    fn expand_street(&mut self, idx: u32, label: Label, v: u32) {
        let g = self.graph;
        let drives = self.req.mode.drives();
        let adj = if drives {
            &g.index.drive_adj[v as usize]
        } else {
            &g.index.walk_adj[v as usize]
        };
        for arc in adj {
            if self.view.is_some_and(|s| s.is_edge_closed(arc.edge as usize)) {
                continue;
            }
            let edge = &g.street.edges[arc.edge as usize];
            let (dt, dw) = if drives {
                (self.profile.drive_seconds(edge.length_m, &edge.highway_class), 0.0)
            } else {
                (self.profile.walk_seconds(edge.length_m), edge.length_m)
            };
            self.push(Label {
                node: Node::Street(arc.to.0),
                time: label.time + dt,
                walk: label.walk + dw,
                boardings: label.boardings,
                parent: idx,
                via: Via::Street(arc.edge),
            });
        }
        if self.req.mode == Mode::TransitWalk {
            for &s in &g.index.stops_at_vertex[v as usize] {
                if !self.stop_usable(s) {
                    continue;
                }
                let link = g.stops[s as usize].link_length_m;
                self.push(Label {
                    node: Node::Stop(s),
                    time: label.time + self.profile.walk_seconds(link),
                    walk: label.walk + link,
                    boardings: label.boardings,
                    parent: idx,
                    via: Via::EnterStop,
                });
            }
        }
    }

    fn expand_stop(&mut self, idx: u32, label: Label, s: u32) {
        let g = self.graph;
        let stop = &g.stops[s as usize];
        if let Some(v) = stop.linked_street_vertex {
            self.push(Label {
                node: Node::Street(v.0),
                time: label.time + self.profile.walk_seconds(stop.link_length_m),
                walk: label.walk + stop.link_length_m,
                boardings: label.boardings,
                parent: idx,
                via: Via::ExitStop,
            });
        }
        let ready = label.time + self.profile.board_penalty_s;
        for pt in &g.index.boardable[s as usize] {
            let pattern = &g.index.patterns[pt.pattern as usize];
            let k = pt.event as usize;
            let Some((trip, shift, dep)) = self.first_usable(&pattern.trips, k, ready) else {
                continue;
            };
            self.push(Label {
                node: Node::Board {
                    trip,
                    shift,
                    event: pt.event,
                },
                time: dep,
                walk: label.walk,
                boardings: label.boardings + 1,
                parent: idx,
                via: Via::Board,
            });
        }
    }

    /// First trip instance of a FIFO pattern departing event `k` at or after
    /// `ready` and within the horizon.
    fn first_usable(&self, trips: &[u32], k: usize, ready: u32) -> Option<(u32, i32, u32)> {
        let ix = &self.graph.index;
        let first = &ix.trips[trips[0] as usize];
        if first.is_frequency() {
            let trip = trips[0];
            if !self.trip_usable(trip) {
                return None;
            }
            let dep0 = first.events[0].departure.seconds();
            let offset = first.events[k].departure.seconds() - dep0;
            let start = first
                .frequencies
                .iter()
                .filter_map(|&(s, e, h)| next_in_window(s, e, h, ready.saturating_sub(offset)))
                .min()?;
            let dep = start + offset;
            return (dep <= self.horizon_end).then_some((trip, (start as i64 - dep0 as i64) as i32, dep));
        }
        let dep_at = |t: u32| ix.trips[t as usize].events[k].departure.seconds();
        let from = trips.partition_point(|&t| dep_at(t) < ready);
        for &t in &trips[from..] {
            let dep = dep_at(t);
            if dep > self.horizon_end {
                return None;
            }
            if self.trip_usable(t) {
                return Some((t, 0, dep));
            }
        }
        None
    }

    fn expand_board(&mut self, idx: u32, label: Label, trip: u32, shift: i32, event: u32) {
        let events = &self.graph.index.trips[trip as usize].events;
        let next = event as usize + 1;
        let at = |t: GtfsTime| (t.seconds() as i64 + shift as i64) as u32;
        if next + 1 < events.len() {
            self.push(Label {
                node: Node::Board {
                    trip,
                    shift,
                    event: next as u32,
                },
                time: at(events[next].departure),
                via: Via::Hop,
                parent: idx,
                ..label
            });
        }
        let stop = events[next].stop;
        if self.stop_usable(stop) {
            self.push(Label {
                node: Node::Stop(stop),
                time: at(events[next].arrival),
                via: Via::Alight,
                parent: idx,
                ..label
            });
        }
    }

    fn path(&self, dest: u32) -> SearchPath {
        let mut chain = Vec::new();
        let mut i = dest;
        while i != NO_PARENT {
            chain.push(i);
            i = self.labels[i as usize].parent;
        }
        chain.reverse();

        let mut steps = Vec::new();
        let mut ride: Option<(u32, u32, i32, u32)> = None;
        for w in chain.windows(2) {
            let (prev, cur) = (self.labels[w[0] as usize], self.labels[w[1] as usize]);
            let step = match (cur.via, prev.node, cur.node) {
                (Via::Street(edge), Node::Street(a), Node::Street(b)) => Step::Street {
                    edge,
                    from: VertexId(a),
                    to: VertexId(b),
                },
                (Via::EnterStop, Node::Street(v), Node::Stop(s)) => Step::Link {
                    stop: s,
                    vertex: VertexId(v),
                    entering: true,
                },
                (Via::ExitStop, Node::Stop(s), Node::Street(v)) => Step::Link {
                    stop: s,
                    vertex: VertexId(v),
                    entering: false,
                },
                (Via::Board, _, Node::Board { trip, shift, event }) => {
                    ride = Some((trip, event, shift, cur.time));
                    continue;
                }
                (Via::Hop, _, _) => continue,
                (Via::Alight, Node::Board { event, .. }, _) => {
                    let (trip, board_event, shift, start) = ride.take().expect("alight follows a boarding");
                    steps.push(PathStep {
                        step: Step::Ride {
                            trip,
                            board_event,
                            alight_event: event + 1,
                            shift,
                        },
                        start: GtfsTime(start),
                        end: GtfsTime(cur.time),
                    });
                    continue;
                }
                _ => unreachable!("inconsistent label chain"),
            };
            steps.push(PathStep {
                step,
                start: GtfsTime(prev.time),
                end: GtfsTime(cur.time),
            });
        }
        let last = self.labels[dest as usize];
        SearchPath {
            origin: self.req.origin,
            mode: self.req.mode,
            depart_at: self.req.depart_at,
            arrival: GtfsTime(last.time),
            walk_m: last.walk,
            steps,
        }
    }
}

/// Earliest arrival at `request.destination`, honoring the walk budget,
/// banned trips and the optional scenario. `None` when unreachable.
pub fn earliest_arrival(
    graph: &MultimodalGraph,
    request: &SearchRequest,
    profile: &RoutingProfile,
    view: Option<&ScenarioView<'_>>,
) -> Option<SearchPath> {
    run_search(graph, request, profile, view, &mut None)
}

fn run_search(
    graph: &MultimodalGraph,
    request: &SearchRequest,
    profile: &RoutingProfile,
    view: Option<&ScenarioView<'_>>,
    trace: &mut Option<Vec<u32>>,
) -> Option<SearchPath> {
    let n = graph.street.vertices.len() as u32;
    if request.origin.0 >= n || request.destination.0 >= n {
        return None;
    }
    let mut search = Search::new(graph, request, profile, view);
    let dest = search.run(trace)?;
    Some(search.path(dest))
}

#[cfg(test)]
pub(crate) fn earliest_arrival_traced(
    graph: &MultimodalGraph,
    request: &SearchRequest,
    profile: &RoutingProfile,
) -> (Option<SearchPath>, Vec<u32>) {
    let mut trace = Some(Vec::new());
    let path = run_search(graph, request, profile, None, &mut trace);
    (path, trace.unwrap_or_default())
}
