use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GtfsFeed, ServiceCalendar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueCode {
    TripTooShort,
    NonMonotonicStopSequence,
    StopTimesDecreasing,
    ServiceNeverActive,
    StopOutOfRange,
    ShapeSequenceNotIncreasing,
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One finding; serializes to a single JSON-lines record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub code: IssueCode,
    pub file: String,
    pub id: String,
    pub message: String,
}

impl ValidationIssue {
    fn new(code: IssueCode, file: &str, id: &str, message: String) -> Self {
        Self {
            code,
            file: file.to_owned(),
            id: id.to_owned(),
            message,
        }
    }
}

/// Mechanical consistency checks on a parsed feed. An empty list means clean.
pub fn validate_feed(feed: &GtfsFeed) -> Vec<ValidationIssue> {
    use IssueCode::*;
    let mut issues = Vec::new();

    for trip in &feed.trips {
        let times = feed.stop_times.get(&trip.trip_id).map_or(&[][..], Vec::as_slice);
        if times.len() < 2 {
            issues.push(ValidationIssue::new(
                TripTooShort,
                "stop_times.txt",
                &trip.trip_id,
                format!("trip has {} stop time(s), at least 2 required", times.len()),
            ));
        }
        if let Some(w) = times.windows(2).find(|w| w[0].stop_sequence >= w[1].stop_sequence) {
            issues.push(ValidationIssue::new(
                NonMonotonicStopSequence,
                "stop_times.txt",
                &trip.trip_id,
                format!("stop_sequence {} repeated", w[1].stop_sequence),
            ));
        }
        if let Some(st) = times.iter().find(|st| st.arrival > st.departure) {
            issues.push(ValidationIssue::new(
                StopTimesDecreasing,
                "stop_times.txt",
                &trip.trip_id,
                format!(
                    "arrival {} after departure {} at sequence {}",
                    st.arrival, st.departure, st.stop_sequence
                ),
            ));
        } else if let Some(w) = times.windows(2).find(|w| w[0].departure > w[1].arrival) {
            issues.push(ValidationIssue::new(
                StopTimesDecreasing,
                "stop_times.txt",
                &trip.trip_id,
                format!(
                    "departure {} at sequence {} after arrival {} at sequence {}",
                    w[0].departure, w[0].stop_sequence, w[1].arrival, w[1].stop_sequence
                ),
            ));
        }
    }

    for cal in &feed.calendars {
        if !ever_active(cal) {
            issues.push(ValidationIssue::new(
                ServiceNeverActive,
                "calendar.txt",
                &cal.service_id,
                format!("no flagged weekday falls within {}..{}", cal.start_date, cal.end_date),
            ));
        }
    }

    for stop in &feed.stops {
        if !stop.point().is_valid() {
            issues.push(ValidationIssue::new(
                StopOutOfRange,
                "stops.txt",
                &stop.stop_id,
                format!("coordinates ({}, {}) out of range", stop.lat, stop.lon),
            ));
        }
    }

    for (shape_id, points) in &feed.shapes {
        if points.windows(2).any(|w| w[0].sequence >= w[1].sequence) {
            issues.push(ValidationIssue::new(
                ShapeSequenceNotIncreasing,
                "shapes.txt",
                shape_id,
                "shape_pt_sequence repeated".to_owned(),
            ));
        }
    }

    issues
}

fn ever_active(cal: &ServiceCalendar) -> bool {
    if cal.start_date > cal.end_date {
        return false;
    }
    // one week from the start covers every weekday
    let mut day = cal.start_date;
    for _ in 0..7 {
        if cal.active_on(day) {
            return true;
        }
        match next_day(day) {
            Some(next) => day = next,
            None => break,
        }
    }
    false
}

fn next_day(d: crate::time::ServiceDate) -> Option<crate::time::ServiceDate> {
    let nd = chrono::NaiveDate::from_ymd_opt(d.year(), d.month(), d.day())?.succ_opt()?;
    use chrono::Datelike;
    crate::time::ServiceDate::from_ymd(nd.year(), nd.month(), nd.day())
}
