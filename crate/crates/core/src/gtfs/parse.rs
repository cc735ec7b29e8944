use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::Path;

use log::info;
use thiserror::Error;

use super::*;
use crate::time::{GtfsTime, ServiceDate};

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("missing required file {0}")]
    MissingFile(String),
    #[error("{file}:{line}: {reason}")]
    Parse { file: String, line: u64, reason: String },
    #[error("{file}: {field} {value:?} does not resolve")]
    BrokenReference { file: String, field: String, value: String },
    #[error("reading feed: {0}")]
    Io(#[from] std::io::Error),
    #[error("reading zip archive: {0}")]
    Zip(#[from] zip::result::ZipError),
}

impl GtfsError {
    fn parse(file: &str, line: u64, reason: impl Into<String>) -> Self {
        Self::Parse {
            file: file.to_owned(),
            line,
            reason: reason.into(),
        }
    }

    fn broken(file: &str, field: &str, value: &str) -> Self {
        Self::BrokenReference {
            file: file.to_owned(),
            field: field.to_owned(),
            value: value.to_owned(),
        }
    }
}

/// Reads a feed from a directory or a `.zip` archive of CSV files.
pub fn parse_feed(source: &Path) -> Result<GtfsFeed, GtfsError> {
    let files = if source.is_dir() {
        read_dir_source(source)?
    } else {
        read_zip_source(source)?
    };
    parse_files(&files)
}

type FileMap = BTreeMap<String, String>;

fn read_dir_source(dir: &Path) -> Result<FileMap, GtfsError> {
    let mut files = FileMap::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !name.ends_with(".txt") || !entry.file_type()?.is_file() {
            continue;
        }
        if REQUIRED_FILES.contains(&name.as_str()) {
            files.insert(name, fs::read_to_string(entry.path())?);
        } else {
            info!("ignoring {name}: not one of the required feed files");
        }
    }
    Ok(files)
}

fn read_zip_source(path: &Path) -> Result<FileMap, GtfsError> {
    let mut archive = zip::ZipArchive::new(fs::File::open(path)?)?;
    let mut files = FileMap::new();
    for i in 0..archive.len() {
        let mut entry = archive.by_index(i)?;
        if !entry.is_file() {
            continue;
        }
        let name = entry.name().rsplit('/').next().unwrap_or_default().to_owned();
        if !name.ends_with(".txt") {
            continue;
        }
        if REQUIRED_FILES.contains(&name.as_str()) {
            let mut text = String::new();
            entry.read_to_string(&mut text)?;
            files.insert(name, text);
        } else {
            info!("ignoring {name}: not one of the required feed files");
        }
    }
    Ok(files)
}

/// Parses the eight files from memory. Keys are bare file names.
pub fn parse_files(files: &FileMap) -> Result<GtfsFeed, GtfsError> {
    if let Some(missing) = REQUIRED_FILES.iter().find(|f| !files.contains_key(**f)) {
        return Err(GtfsError::MissingFile((*missing).to_owned()));
    }
    let text = |name: &str| files[name].as_str();

    let mut agencies = Vec::new();
    let mut seen = HashSet::new();
    for row in Table::new("agency.txt", text("agency.txt"), &["agency_name", "agency_timezone"])? {
        let row = row?;
        let agency = Agency {
            agency_id: row.get("agency_id").to_owned(),
            name: row.get("agency_name").to_owned(),
            timezone: row.get("agency_timezone").to_owned(),
        };
        if !seen.insert(agency.agency_id.clone()) {
            return Err(row.error(format!("duplicate agency_id {:?}", agency.agency_id)));
        }
        agencies.push(agency);
    }

    let mut calendars = Vec::new();
    let mut seen = HashSet::new();
    const DAYS: [&str; 7] = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];
    let mut cal_cols = vec!["service_id", "start_date", "end_date"];
    cal_cols.extend(DAYS);
    for row in Table::new("calendar.txt", text("calendar.txt"), &cal_cols)? {
        let row = row?;
        let mut weekdays = [false; 7];
        for (flag, day) in weekdays.iter_mut().zip(DAYS) {
            *flag = match row.get(day) {
                "1" => true,
                "0" => false,
                other => return Err(row.error(format!("{day} must be 0 or 1, got {other:?}"))),
            };
        }
        let cal = ServiceCalendar {
            service_id: row.required("service_id")?.to_owned(),
            weekdays,
            start_date: row.date("start_date")?,
            end_date: row.date("end_date")?,
        };
        if !seen.insert(cal.service_id.clone()) {
            return Err(row.error(format!("duplicate service_id {:?}", cal.service_id)));
        }
        calendars.push(cal);
    }

    let mut routes = Vec::new();
    let mut seen = HashSet::new();
    for row in Table::new("routes.txt", text("routes.txt"), &["route_id", "route_type"])? {
        let row = row?;
        let route = TransitRoute {
            route_id: row.required("route_id")?.to_owned(),
            agency_id: row.get("agency_id").to_owned(),
            short_name: row.get("route_short_name").to_owned(),
            long_name: row.get("route_long_name").to_owned(),
            route_type: row.number("route_type")?,
        };
        if !seen.insert(route.route_id.clone()) {
            return Err(row.error(format!("duplicate route_id {:?}", route.route_id)));
        }
        routes.push(route);
    }

    let mut shapes: BTreeMap<String, Vec<ShapePoint>> = BTreeMap::new();
    let shape_cols = ["shape_id", "shape_pt_lat", "shape_pt_lon", "shape_pt_sequence"];
    for row in Table::new("shapes.txt", text("shapes.txt"), &shape_cols)? {
        let row = row?;
        let point = ShapePoint {
            shape_id: row.required("shape_id")?.to_owned(),
            lat: row.float("shape_pt_lat")?,
            lon: row.float("shape_pt_lon")?,
            sequence: row.number("shape_pt_sequence")?,
        };
        shapes.entry(point.shape_id.clone()).or_default().push(point);
    }
    for points in shapes.values_mut() {
        points.sort_by_key(|p| p.sequence);
    }

    let mut stops = Vec::new();
    let mut seen = HashSet::new();
    for row in Table::new("stops.txt", text("stops.txt"), &["stop_id", "stop_lat", "stop_lon"])? {
        let row = row?;
        let stop = Stop {
            stop_id: row.required("stop_id")?.to_owned(),
            name: row.get("stop_name").to_owned(),
            lat: row.float("stop_lat")?,
            lon: row.float("stop_lon")?,
        };
        if !seen.insert(stop.stop_id.clone()) {
            return Err(row.error(format!("duplicate stop_id {:?}", stop.stop_id)));
        }
        stops.push(stop);
    }

    let mut trips = Vec::new();
    let mut seen = HashSet::new();
    for row in Table::new("trips.txt", text("trips.txt"), &["route_id", "service_id", "trip_id"])? {
        let row = row?;
        let shape_id = row.get("shape_id");
        let trip = Trip {
            trip_id: row.required("trip_id")?.to_owned(),
            route_id: row.get("route_id").to_owned(),
            service_id: row.get("service_id").to_owned(),
            shape_id: (!shape_id.is_empty()).then(|| shape_id.to_owned()),
        };
        if !seen.insert(trip.trip_id.clone()) {
            return Err(row.error(format!("duplicate trip_id {:?}", trip.trip_id)));
        }
        trips.push(trip);
    }

    let mut stop_times: BTreeMap<String, Vec<StopTime>> = BTreeMap::new();
    let st_cols = ["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"];
    for row in Table::new("stop_times.txt", text("stop_times.txt"), &st_cols)? {
        let row = row?;
        let (arr, dep) = match (row.get("arrival_time"), row.get("departure_time")) {
            ("", "") => return Err(row.error("arrival_time and departure_time both empty")),
            ("", d) => (d, d),
            (a, "") => (a, a),
            (a, d) => (a, d),
        };
        let st = StopTime {
            trip_id: row.get("trip_id").to_owned(),
            arrival: row.time(arr)?,
            departure: row.time(dep)?,
            stop_id: row.get("stop_id").to_owned(),
            stop_sequence: row.number("stop_sequence")?,
        };
        stop_times.entry(st.trip_id.clone()).or_default().push(st);
    }
    for times in stop_times.values_mut() {
        times.sort_by_key(|st| st.stop_sequence);
    }

    let mut frequencies = Vec::new();
    let freq_cols = ["trip_id", "start_time", "end_time", "headway_secs"];
    for row in Table::new("frequencies.txt", text("frequencies.txt"), &freq_cols)? {
        let row = row?;
        let f = Frequency {
            trip_id: row.get("trip_id").to_owned(),
            start_time: row.time(row.get("start_time"))?,
            end_time: row.time(row.get("end_time"))?,
            headway_secs: row.number("headway_secs")?,
        };
        if f.headway_secs == 0 {
            return Err(row.error("headway_secs must be positive"));
        }
        if f.start_time > f.end_time {
            return Err(row.error("start_time after end_time"));
        }
        frequencies.push(f);
    }

    let feed = GtfsFeed {
        agencies,
        calendars,
        frequencies,
        routes,
        shapes,
        stops,
        stop_times,
        trips,
    };
    resolve_references(feed)
}

fn resolve_references(mut feed: GtfsFeed) -> Result<GtfsFeed, GtfsError> {
    let agency_ids: HashSet<&str> = feed.agencies.iter().map(|a| a.agency_id.as_str()).collect();
    let sole_agency = match feed.agencies.as_slice() {
        [only] => Some(only.agency_id.clone()),
        _ => None,
    };
    for route in &mut feed.routes {
        if route.agency_id.is_empty() {
            if let Some(id) = &sole_agency {
                route.agency_id = id.clone();
            }
        }
        if !agency_ids.contains(route.agency_id.as_str()) {
            return Err(GtfsError::broken("routes.txt", "agency_id", &route.agency_id));
        }
    }

    let route_ids: HashSet<&str> = feed.routes.iter().map(|r| r.route_id.as_str()).collect();
    let service_ids: HashSet<&str> = feed.calendars.iter().map(|c| c.service_id.as_str()).collect();
    for trip in &feed.trips {
        if !route_ids.contains(trip.route_id.as_str()) {
            return Err(GtfsError::broken("trips.txt", "route_id", &trip.route_id));
        }
        if !service_ids.contains(trip.service_id.as_str()) {
            return Err(GtfsError::broken("trips.txt", "service_id", &trip.service_id));
        }
        if let Some(shape) = &trip.shape_id {
            if !feed.shapes.contains_key(shape) {
                return Err(GtfsError::broken("trips.txt", "shape_id", shape));
            }
        }
    }

    let trip_ids: HashSet<&str> = feed.trips.iter().map(|t| t.trip_id.as_str()).collect();
    let stop_ids: HashSet<&str> = feed.stops.iter().map(|s| s.stop_id.as_str()).collect();
    for (trip_id, times) in &feed.stop_times {
        if !trip_ids.contains(trip_id.as_str()) {
            return Err(GtfsError::broken("stop_times.txt", "trip_id", trip_id));
        }
        if let Some(st) = times.iter().find(|st| !stop_ids.contains(st.stop_id.as_str())) {
            return Err(GtfsError::broken("stop_times.txt", "stop_id", &st.stop_id));
        }
    }
    if let Some(f) = feed.frequencies.iter().find(|f| !trip_ids.contains(f.trip_id.as_str())) {
        return Err(GtfsError::broken("frequencies.txt", "trip_id", &f.trip_id));
    }
    Ok(feed)
}

/// Header-addressed view over one CSV file.
struct Table<'a> {
    file: &'static str,
    columns: HashMap<String, usize>,
    records: csv::StringRecordsIntoIter<&'a [u8]>,
}

impl<'a> Table<'a> {
    fn new(file: &'static str, text: &'a str, required: &[&str]) -> Result<Self, GtfsError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| GtfsError::parse(file, 1, e.to_string()))?.clone();
        let columns: HashMap<String, usize> = headers.iter().enumerate().map(|(i, h)| (h.to_owned(), i)).collect();
        // a zero-byte file has no header and no rows
        if !text.trim().is_empty() {
            if let Some(col) = required.iter().find(|c| !columns.contains_key(**c)) {
                return Err(GtfsError::parse(file, 1, format!("missing column {col}")));
            }
        }
        Ok(Self {
            file,
            columns,
            records: reader.into_records(),
        })
    }
}

impl Iterator for Table<'_> {
    type Item = Result<Row, GtfsError>;

    fn next(&mut self) -> Option<Self::Item> {
        let record = self.records.next()?;
        Some(match record {
            Ok(record) => {
                let line = record.position().map_or(0, |p| p.line());
                let fields = self
                    .columns
                    .iter()
                    .map(|(name, &i)| (name.clone(), record.get(i).unwrap_or("").to_owned()))
                    .collect();
                Ok(Row {
                    file: self.file,
                    line,
                    fields,
                })
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Err(GtfsError::parse(self.file, line, e.to_string()))
            }
        })
    }
}

struct Row {
    file: &'static str,
    line: u64,
    fields: HashMap<String, String>,
}

impl Row {
    fn get(&self, column: &str) -> &str {
        self.fields.get(column).map_or("", String::as_str)
    }

    fn error(&self, reason: impl Into<String>) -> GtfsError {
        GtfsError::parse(self.file, self.line, reason)
    }

    fn required(&self, column: &str) -> Result<&str, GtfsError> {
        match self.get(column) {
            "" => Err(self.error(format!("empty {column}"))),
            v => Ok(v),
        }
    }

    fn number<T: std::str::FromStr>(&self, column: &str) -> Result<T, GtfsError> {
        let v = self.get(column);
        v.parse().map_err(|_| self.error(format!("{column}: not an integer: {v:?}")))
    }

    fn float(&self, column: &str) -> Result<f64, GtfsError> {
        let v = self.get(column);
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.error(format!("{column}: not a number: {v:?}"))),
        }
    }

    fn date(&self, column: &str) -> Result<ServiceDate, GtfsError> {
        ServiceDate::parse_compact(self.get(column)).map_err(|e| self.error(e.to_string()))
    }

    fn time(&self, text: &str) -> Result<GtfsTime, GtfsError> {
        GtfsTime::parse(text).map_err(|e| self.error(e.to_string()))
    }
}
