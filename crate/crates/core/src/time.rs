//! Service-day clock times and calendar dates.

use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SECONDS_PER_DAY: u32 = 86_400;

const MAX_HOURS: u32 = 47;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed time {0:?}")]
pub struct MalformedTime(pub String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed date {0:?}")]
pub struct MalformedDate(pub String);

/// Seconds since midnight of the service day. Values past 24:00:00 are
/// legal and denote trips that run after midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GtfsTime(pub u32);

impl GtfsTime {
    pub const fn from_seconds(seconds: u32) -> Self {
        Self(seconds)
    }

    pub const fn seconds(self) -> u32 {
        self.0
    }

    pub const fn hms(h: u32, m: u32, s: u32) -> Self {
        Self(h * 3600 + m * 60 + s)
    }

    /// Accepts `H:MM:SS` or `HH:MM:SS`, hours 0..=47.
    pub fn parse(text: &str) -> Result<Self, MalformedTime> {
        let bad = || MalformedTime(text.to_owned());
        let mut parts = text.split(':');
        let (h, m, s) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(h), Some(m), Some(s), None) => (h, m, s),
            _ => return Err(bad()),
        };
        let field = |f: &str, width: std::ops::RangeInclusive<usize>| -> Option<u32> {
            (width.contains(&f.len()) && f.bytes().all(|b| b.is_ascii_digit())).then(|| f.parse().ok())?
        };
        let h = field(h, 1..=2).ok_or_else(bad)?;
        let m = field(m, 2..=2).ok_or_else(bad)?;
        let s = field(s, 2..=2).ok_or_else(bad)?;
        if h > MAX_HOURS || m > 59 || s > 59 {
            return Err(bad());
        }
        Ok(Self::hms(h, m, s))
    }

    /// Like [`GtfsTime::parse`] but seconds may be omitted (`HH:MM`).
    pub fn parse_clock(text: &str) -> Result<Self, MalformedTime> {
        if text.matches(':').count() == 1 {
            Self::parse(&format!("{text}:00")).map_err(|_| MalformedTime(text.to_owned()))
        } else {
            Self::parse(text)
        }
    }
}

impl fmt::Display for GtfsTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        write!(f, "{:02}:{:02}:{:02}", s / 3600, s / 60 % 60, s % 60)
    }
}

/// Free-function form used by the feed parser.
pub fn parse_gtfs_time(text: &str) -> Result<GtfsTime, MalformedTime> {
    GtfsTime::parse(text)
}

/// A civil calendar date a timetable is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ServiceDate(NaiveDate);

impl ServiceDate {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self)
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    /// 0 = Monday .. 6 = Sunday.
    pub fn weekday_index(&self) -> usize {
        self.0.weekday().num_days_from_monday() as usize
    }

    /// GTFS compact form, `YYYYMMDD`.
    pub fn parse_compact(text: &str) -> Result<Self, MalformedDate> {
        if text.len() != 8 || !text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(MalformedDate(text.to_owned()));
        }
        NaiveDate::parse_from_str(text, "%Y%m%d")
            .map(Self)
            .map_err(|_| MalformedDate(text.to_owned()))
    }

    /// ISO form, `YYYY-MM-DD`.
    pub fn parse_iso(text: &str) -> Result<Self, MalformedDate> {
        let b = text.as_bytes();
        let shape_ok =
            b.len() == 10 && b[4] == b'-' && b[7] == b'-' && b.iter().enumerate().all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
        if !shape_ok {
            return Err(MalformedDate(text.to_owned()));
        }
        NaiveDate::parse_from_str(text, "%Y-%m-%d")
            .map(Self)
            .map_err(|_| MalformedDate(text.to_owned()))
    }

    pub fn to_compact(&self) -> String {
        self.0.format("%Y%m%d").to_string()
    }
}

impl fmt::Display for ServiceDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

impl TryFrom<String> for ServiceDate {
    type Error = MalformedDate;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse_iso(&value)
    }
}

impl From<ServiceDate> for String {
    fn from(value: ServiceDate) -> Self {
        value.to_string()
    }
}
