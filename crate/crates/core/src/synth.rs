//! Bundled fixtures and synthetic instances for tests and benchmarks.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::geo::{haversine_m, BoundingBox, GeoPoint};
use crate::graph::{build_graph, build_graph_from_osm, BuildOptions, MultimodalGraph};
use crate::gtfs::{parse_files, Agency, Frequency, GtfsFeed, ServiceCalendar, Stop, StopTime, TransitRoute, Trip};
use crate::osm::{highway_permissions, parse_osm_xml, OsmDocument, StreetEdge, StreetNetwork, StreetVertex, VertexId};
use crate::time::{GtfsTime, ServiceDate};

pub const MINIMETRO_OSM: &str = include_str!("../../../fixtures/minimetro.osm");

macro_rules! feed_files {
    ($dir:literal) => {
        [
            ("agency.txt", include_str!(concat!("../../../fixtures/", $dir, "/agency.txt"))),
            ("calendar.txt", include_str!(concat!("../../../fixtures/", $dir, "/calendar.txt"))),
            (
                "frequencies.txt",
                include_str!(concat!("../../../fixtures/", $dir, "/frequencies.txt")),
            ),
            ("routes.txt", include_str!(concat!("../../../fixtures/", $dir, "/routes.txt"))),
            ("shapes.txt", include_str!(concat!("../../../fixtures/", $dir, "/shapes.txt"))),
            (
                "stop_times.txt",
                include_str!(concat!("../../../fixtures/", $dir, "/stop_times.txt")),
            ),
            ("stops.txt", include_str!(concat!("../../../fixtures/", $dir, "/stops.txt"))),
            ("trips.txt", include_str!(concat!("../../../fixtures/", $dir, "/trips.txt"))),
        ]
    };
}

fn load(files: [(&str, &str); 8]) -> GtfsFeed {
    let map: BTreeMap<String, String> = files.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    parse_files(&map).expect("bundled fixture parses")
}

/// Tuesday 2013-11-12, a day the fixtures' WEEKDAY service runs.
pub fn tuesday() -> ServiceDate {
    ServiceDate::from_ymd(2013, 11, 12).unwrap()
}

pub fn minimetro_osm() -> OsmDocument {
    parse_osm_xml(MINIMETRO_OSM.as_bytes()).expect("bundled fixture parses")
}

pub fn minimetro_feed() -> GtfsFeed {
    load(feed_files!("minimetro"))
}

pub fn minimetro_3path_feed() -> GtfsFeed {
    load(feed_files!("minimetro-3path"))
}

pub fn minimetro_graph() -> MultimodalGraph {
    build_graph_from_osm(&minimetro_osm(), &minimetro_feed(), &BuildOptions::default()).unwrap()
}

pub fn minimetro_3path_graph() -> MultimodalGraph {
    build_graph_from_osm(&minimetro_osm(), &minimetro_3path_feed(), &BuildOptions::default()).unwrap()
}

fn street_from(points: Vec<GeoPoint>, links: Vec<(usize, usize, &str, bool)>) -> StreetNetwork {
    let vertices: Vec<StreetVertex> = points
        .iter()
        .enumerate()
        .map(|(i, &point)| StreetVertex {
            osm_id: i as i64 + 1,
            point,
        })
        .collect();
    let edges = links
        .into_iter()
        .enumerate()
        .map(|(i, (a, b, class, oneway))| {
            let (walk, drive) = highway_permissions(class).expect("routable class");
            StreetEdge {
                from_vertex: VertexId(a as u32),
                to_vertex: VertexId(b as u32),
                length_m: haversine_m(points[a], points[b]),
                way_id: i as i64 + 1,
                highway_class: class.to_owned(),
                walk_permitted: walk,
                drive_permitted: drive,
                oneway_drive: oneway && drive,
            }
        })
        .collect();
    StreetNetwork {
        bbox: BoundingBox::from_points(points.iter().copied()).unwrap(),
        vertices,
        edges,
    }
}

fn base_feed(service_ids: &[(&str, [bool; 7])]) -> GtfsFeed {
    GtfsFeed {
        agencies: vec![Agency {
            agency_id: "AG".into(),
            name: "Synthetic".into(),
            timezone: "Asia/Manila".into(),
        }],
        calendars: service_ids
            .iter()
            .map(|(id, weekdays)| ServiceCalendar {
                service_id: (*id).into(),
                weekdays: *weekdays,
                start_date: ServiceDate::from_ymd(2013, 1, 1).unwrap(),
                end_date: ServiceDate::from_ymd(2013, 12, 31).unwrap(),
            })
            .collect(),
        ..GtfsFeed::default()
    }
}

/// A small random network and feed, with the graph built from them.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub street: StreetNetwork,
    pub feed: GtfsFeed,
    pub graph: MultimodalGraph,
}

/// At most 9 vertices, 20 street edges, 6 stops and 12 trips; roughly a
/// quarter of trips are frequency based and some run on an inactive service.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = StdRng::seed_from_u64(seed);
    let nv = rng.random_range(4..=9usize);
    let points: Vec<GeoPoint> = (0..nv)
        .map(|_| GeoPoint::new(14.600 + rng.random_range(0.0..0.012), 121.000 + rng.random_range(0.0..0.012)))
        .collect();

    let class = |rng: &mut StdRng| match rng.random_range(0..20) {
        0..=13 => "residential",
        14..=16 => "footway",
        _ => "motorway",
    };
    let mut links = Vec::new();
    for i in 1..nv {
        if rng.random_bool(0.85) {
            let j = rng.random_range(0..i);
            let c = class(&mut rng);
            links.push((j, i, c, rng.random_bool(0.2)));
        }
    }
    for _ in 0..rng.random_range(0..=8) {
        let (a, b) = (rng.random_range(0..nv), rng.random_range(0..nv));
        if a != b && links.len() < 20 {
            let c = class(&mut rng);
            links.push((a, b, c, rng.random_bool(0.2)));
        }
    }
    if links.is_empty() {
        links.push((0, 1, "residential", false));
    }
    let street = street_from(points.clone(), links);

    let all = [true; 7];
    let weekend = [false, false, false, false, false, true, true];
    let mut feed = base_feed(&[("ALL", all), ("WKND", weekend)]);
    let ns = rng.random_range(2..=6usize);
    for s in 0..ns {
        let anchor = points[rng.random_range(0..nv)];
        feed.stops.push(Stop {
            stop_id: format!("S{s}"),
            name: format!("Stop {s}"),
            lat: anchor.lat + rng.random_range(-0.004..0.004),
            lon: anchor.lon + rng.random_range(-0.004..0.004),
        });
    }
    let nr = rng.random_range(1..=3usize);
    for r in 0..nr {
        feed.routes.push(TransitRoute {
            route_id: format!("R{r}"),
            agency_id: "AG".into(),
            short_name: format!("{r}"),
            long_name: String::new(),
            route_type: if rng.random_bool(0.5) { 3 } else { 1 },
        });
    }
    for t in 0..rng.random_range(1..=12usize) {
        let trip_id = format!("T{t:02}");
        feed.trips.push(Trip {
            trip_id: trip_id.clone(),
            route_id: format!("R{}", rng.random_range(0..nr)),
            service_id: if rng.random_bool(0.85) { "ALL" } else { "WKND" }.into(),
            shape_id: None,
        });
        let mut order: Vec<usize> = (0..ns).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let len = rng.random_range(2..=ns.min(4));
        let mut clock = rng.random_range(7 * 3600..9 * 3600u32);
        let mut times = Vec::new();
        for (seq, &s) in order[..len].iter().enumerate() {
            let arrival = clock;
            if seq > 0 {
                clock += rng.random_range(0..=60);
            }
            times.push(StopTime {
                trip_id: trip_id.clone(),
                arrival: GtfsTime(arrival),
                departure: GtfsTime(clock),
                stop_id: format!("S{s}"),
                stop_sequence: seq as u32 + 1,
            });
            clock += rng.random_range(60..=600);
        }
        if rng.random_bool(0.25) {
            let mut start = rng.random_range(6 * 3600 + 1800..8 * 3600 + 1800u32);
            for _ in 0..rng.random_range(1..=2) {
                let end = start + rng.random_range(600..=7200);
                feed.frequencies.push(Frequency {
                    trip_id: trip_id.clone(),
                    start_time: GtfsTime(start),
                    end_time: GtfsTime(end),
                    headway_secs: rng.random_range(120..=900),
                });
                start = end + rng.random_range(300..=3600);
            }
        }
        feed.stop_times.insert(trip_id, times);
    }

    let graph = match build_graph(street.clone(), &feed) {
        Ok(g) => g,
        // every stop landed out of range: pull the first one onto a vertex
        Err(_) => {
            feed.stops[0].lat = points[0].lat;
            feed.stops[0].lon = points[0].lon;
            build_graph(street.clone(), &feed).expect("a stop sits on a vertex")
        }
    };
    RandomInstance { street, feed, graph }
}

/// Side length of the grid city in vertices.
pub const GRID_SIDE: usize = 71;
pub const GRID_SPACING_DEG: f64 = 0.001;

/// A 71 x 71 street grid with 10,000 edges and 20 transit lines of 50 stops
/// each, every seventh row and column. Even lines run scheduled trips every
/// ten minutes, odd lines every five minutes via frequencies, both
/// directions, 06:00 to 22:00 daily.
pub fn grid_city() -> (StreetNetwork, GtfsFeed) {
    let (lat0, lon0) = (14.55, 121.0);
    let at = |r: usize, c: usize| GeoPoint::new(lat0 + r as f64 * GRID_SPACING_DEG, lon0 + c as f64 * GRID_SPACING_DEG);
    let idx = |r: usize, c: usize| r * GRID_SIDE + c;
    let mut points = Vec::with_capacity(GRID_SIDE * GRID_SIDE);
    for r in 0..GRID_SIDE {
        for c in 0..GRID_SIDE {
            points.push(at(r, c));
        }
    }
    let mut links = Vec::new();
    for r in 0..GRID_SIDE {
        for c in 0..GRID_SIDE {
            let class = if r % 7 == 0 || c % 7 == 0 { "secondary" } else { "residential" };
            if c + 1 < GRID_SIDE {
                links.push((idx(r, c), idx(r, c + 1), class, false));
            }
            if r + 1 < GRID_SIDE {
                links.push((idx(r, c), idx(r + 1, c), class, false));
            }
        }
    }
    let mut d = 0;
    while links.len() < 10_000 {
        let (r, c) = (1 + (d * 7) % 69, 1 + (d * 11) % 69);
        links.push((idx(r, c), idx(r + 1, c + 1), "footway", false));
        d += 1;
    }
    let street = street_from(points, links);

    let mut feed = base_feed(&[("DAILY", [true; 7])]);
    let lines: Vec<(String, Vec<GeoPoint>)> = (0..10)
        .flat_map(|k| {
            let row: Vec<GeoPoint> = (0..50)
                .map(|i| {
                    let p = at(k * 7, (i * 70 + 24) / 49);
                    GeoPoint::new(p.lat + 0.00005, p.lon)
                })
                .collect();
            let col: Vec<GeoPoint> = (0..50)
                .map(|i| {
                    let p = at((i * 70 + 24) / 49, k * 7);
                    GeoPoint::new(p.lat, p.lon + 0.00005)
                })
                .collect();
            [(format!("H{k}"), row), (format!("V{k}"), col)]
        })
        .collect();
    for (r, (name, stops)) in lines.iter().enumerate() {
        let route_id = format!("L{name}");
        feed.routes.push(TransitRoute {
            route_id: route_id.clone(),
            agency_id: "AG".into(),
            short_name: name.clone(),
            long_name: String::new(),
            route_type: 3,
        });
        let ids: Vec<String> = (0..stops.len()).map(|i| format!("{name}-{i:02}")).collect();
        for (id, p) in ids.iter().zip(stops) {
            feed.stops.push(Stop {
                stop_id: id.clone(),
                name: id.clone(),
                lat: p.lat,
                lon: p.lon,
            });
        }
        let frequency = r % 2 == 1;
        for dir in 0..2 {
            let seq: Vec<&String> = if dir == 0 {
                ids.iter().collect()
            } else {
                ids.iter().rev().collect()
            };
            let starts: Vec<u32> = if frequency {
                vec![6 * 3600]
            } else {
                (0..=96).map(|i| 6 * 3600 + i * 600).collect()
            };
            for (n, start) in starts.into_iter().enumerate() {
                let trip_id = format!("{route_id}-{dir}-{n:03}");
                feed.trips.push(Trip {
                    trip_id: trip_id.clone(),
                    route_id: route_id.clone(),
                    service_id: "DAILY".into(),
                    shape_id: None,
                });
                let times = seq
                    .iter()
                    .enumerate()
                    .map(|(i, stop)| {
                        let t = GtfsTime(start + i as u32 * 60);
                        StopTime {
                            trip_id: trip_id.clone(),
                            arrival: t,
                            departure: t,
                            stop_id: (*stop).clone(),
                            stop_sequence: i as u32 + 1,
                        }
                    })
                    .collect();
                feed.stop_times.insert(trip_id.clone(), times);
                if frequency {
                    feed.frequencies.push(Frequency {
                        trip_id,
                        start_time: GtfsTime(6 * 3600),
                        end_time: GtfsTime(22 * 3600),
                        headway_secs: 300,
                    });
                }
            }
        }
    }
    (street, feed)
}

pub fn grid_city_graph() -> MultimodalGraph {
    let (street, feed) = grid_city();
    build_graph(street, &feed).expect("grid city builds")
}
