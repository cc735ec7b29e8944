use std::fs;
use std::path::Path;

use super::GtfsFeed;

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes the eight required files into `dir` (created if absent).
/// Parsing the result yields a feed equal to `feed`.
pub fn write_feed(feed: &GtfsFeed, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let open = |name: &str| csv::Writer::from_path(dir.join(name));

    let mut w = open("agency.txt")?;
    w.write_record(["agency_id", "agency_name", "agency_timezone"])?;
    for a in &feed.agencies {
        w.write_record([&a.agency_id, &a.name, &a.timezone])?;
    }
    w.flush()?;

    let mut w = open("calendar.txt")?;
    w.write_record([
        "service_id",
        "monday",
        "tuesday",
        "wednesday",
        "thursday",
        "friday",
        "saturday",
        "sunday",
        "start_date",
        "end_date",
    ])?;
    for c in &feed.calendars {
        let mut rec = vec![c.service_id.clone()];
        rec.extend(c.weekdays.iter().map(|&b| flag(b).to_owned()));
        rec.push(c.start_date.to_compact());
        rec.push(c.end_date.to_compact());
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = open("frequencies.txt")?;
    w.write_record(["trip_id", "start_time", "end_time", "headway_secs"])?;
    for f in &feed.frequencies {
        w.write_record([
            f.trip_id.clone(),
            f.start_time.to_string(),
            f.end_time.to_string(),
            f.headway_secs.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = open("routes.txt")?;
    w.write_record(["route_id", "agency_id", "route_short_name", "route_long_name", "route_type"])?;
    for r in &feed.routes {
        w.write_record([&r.route_id, &r.agency_id, &r.short_name, &r.long_name, &r.route_type.to_string()])?;
    }
    w.flush()?;

    let mut w = open("shapes.txt")?;
    w.write_record(["shape_id", "shape_pt_lat", "shape_pt_lon", "shape_pt_sequence"])?;
    for p in feed.shapes.values().flatten() {
        w.write_record([p.shape_id.clone(), p.lat.to_string(), p.lon.to_string(), p.sequence.to_string()])?;
    }
    w.flush()?;

    let mut w = open("stop_times.txt")?;
    w.write_record(["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"])?;
    for st in feed.stop_times.values().flatten() {
        w.write_record([
            st.trip_id.clone(),
            st.arrival.to_string(),
            st.departure.to_string(),
            st.stop_id.clone(),
            st.stop_sequence.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = open("stops.txt")?;
    w.write_record(["stop_id", "stop_name", "stop_lat", "stop_lon"])?;
    for s in &feed.stops {
        w.write_record([s.stop_id.clone(), s.name.clone(), s.lat.to_string(), s.lon.to_string()])?;
    }
    w.flush()?;

    let mut w = open("trips.txt")?;
    w.write_record(["route_id", "service_id", "trip_id", "shape_id"])?;
    for t in &feed.trips {
        w.write_record([&t.route_id, &t.service_id, &t.trip_id, t.shape_id.as_deref().unwrap_or("")])?;
    }
    w.flush()?;

    Ok(())
}
