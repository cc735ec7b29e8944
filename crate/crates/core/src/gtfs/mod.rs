//! Typed GTFS feed covering the eight files a graph build needs.
//!
//! Parsing lives in [`parse`], mechanical checks in [`validate`] and the CSV
//! writer in [`write`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::time::{GtfsTime, ServiceDate};

pub mod parse;
pub mod validate;
pub mod write;

pub use parse::{parse_feed, parse_files, GtfsError};
pub use validate::{validate_feed, IssueCode, ValidationIssue};
pub use write::write_feed;

/// Required feed files, in the order they are checked.
pub const REQUIRED_FILES: [&str; 8] = [
    "agency.txt",
    "calendar.txt",
    "frequencies.txt",
    "routes.txt",
    "shapes.txt",
    "stop_times.txt",
    "stops.txt",
    "trips.txt",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agency {
    pub agency_id: String,
    pub name: String,
    pub timezone: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceCalendar {
    pub service_id: String,
    /// Monday first.
    pub weekdays: [bool; 7],
    pub start_date: ServiceDate,
    pub end_date: ServiceDate,
}

impl ServiceCalendar {
    pub fn active_on(&self, date: ServiceDate) -> bool {
        self.start_date <= date && date <= self.end_date && self.weekdays[date.weekday_index()]
    }
}

/// True iff `date` lies in the calendar's range and its weekday is flagged.
pub fn service_active_on(cal: &ServiceCalendar, date: ServiceDate) -> bool {
    cal.active_on(date)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequency {
    pub trip_id: String,
    pub start_time: GtfsTime,
    pub end_time: GtfsTime,
    pub headway_secs: u32,
}

impl Frequency {
    /// Earliest `start + k * headway` that is `>= t` and `<= end_time`.
    pub fn next_departure(&self, t: GtfsTime) -> Option<GtfsTime> {
        next_in_window(self.start_time.seconds(), self.end_time.seconds(), self.headway_secs, t.seconds()).map(GtfsTime)
    }
}

pub(crate) fn next_in_window(start: u32, end: u32, headway: u32, t: u32) -> Option<u32> {
    let d = if t <= start {
        start
    } else {
        let k = (t - start).div_ceil(headway);
        start.checked_add(k.checked_mul(headway)?)?
    };
    (d <= end).then_some(d)
}

pub fn next_frequency_departure(freq: &Frequency, t: GtfsTime) -> Option<GtfsTime> {
    freq.next_departure(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitRoute {
    pub route_id: String,
    pub agency_id: String,
    pub short_name: String,
    pub long_name: String,
    /// 0 tram, 1 metro, 2 rail, 3 bus.
    pub route_type: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapePoint {
    pub shape_id: String,
    pub lat: f64,
    pub lon: f64,
    pub sequence: u32,
}

impl ShapePoint {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub stop_id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

impl Stop {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopTime {
    pub trip_id: String,
    pub arrival: GtfsTime,
    pub departure: GtfsTime,
    pub stop_id: String,
    pub stop_sequence: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trip {
    pub trip_id: String,
    pub route_id: String,
    pub service_id: String,
    pub shape_id: Option<String>,
}

/// An in-memory feed. Once returned by [`parse_feed`] every cross-file
/// reference resolves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GtfsFeed {
    pub agencies: Vec<Agency>,
    pub calendars: Vec<ServiceCalendar>,
    pub frequencies: Vec<Frequency>,
    pub routes: Vec<TransitRoute>,
    /// Points per shape, ordered by sequence.
    pub shapes: BTreeMap<String, Vec<ShapePoint>>,
    pub stops: Vec<Stop>,
    /// Stop times per trip, ordered by stop_sequence.
    pub stop_times: BTreeMap<String, Vec<StopTime>>,
    pub trips: Vec<Trip>,
}

impl GtfsFeed {
    pub fn stop(&self, stop_id: &str) -> Option<&Stop> {
        self.stops.iter().find(|s| s.stop_id == stop_id)
    }

    pub fn trip(&self, trip_id: &str) -> Option<&Trip> {
        self.trips.iter().find(|t| t.trip_id == trip_id)
    }

    pub fn stop_time_count(&self) -> usize {
        self.stop_times.values().map(Vec::len).sum()
    }
}
