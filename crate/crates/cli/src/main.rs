use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use chrono::{DateTime, SecondsFormat, Utc};
use clap::{Parser, Subcommand};
use log::info;
use mmtp_core::geocoder::{build_place_index, DEFAULT_LIMIT};
use mmtp_core::graph::{BuildOptions, DEFAULT_LINK_RADIUS_M};
use mmtp_core::gtfs::validate_feed;
use mmtp_core::router::{plan, PlanRequest, DEFAULT_MAX_WALK_M, DEFAULT_NUM_ITINERARIES};
use mmtp_core::{
    apply_scenario, build_graph_from_osm, deserialize_graph, parse_feed, parse_osm_xml, serialize_graph, GeoPoint, GtfsTime, Mode,
    RoutingProfile, Scenario, ServiceDate,
};
use mmtp_service::{ServiceConfig, CONFIG_ENV};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_ISSUES: u8 = 3;
const EXIT_PLAN: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "mmtp", version, about = "Multimodal transit trip planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a GTFS feed (directory or .zip) for consistency problems.
    ValidateGtfs {
        feed: PathBuf,
        /// One JSON object per issue instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Build a routing graph from an OSM extract and a GTFS feed.
    BuildGraph {
        #[arg(long)]
        osm: PathBuf,
        #[arg(long)]
        gtfs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LINK_RADIUS_M)]
        link_radius: f64,
    },
    /// Plan a trip on a built graph and print the itineraries as JSON.
    Plan {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// YYYY-MM-DD or YYYYMMDD.
        #[arg(long)]
        date: String,
        /// HH:MM[:SS]; hours may exceed 23.
        #[arg(long)]
        time: String,
        #[arg(long, default_value = "TRANSIT_WALK")]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_NUM_ITINERARIES)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_WALK_M)]
        max_walk: f64,
        /// Scenario definition (JSON) to apply before planning.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Search place names in an OSM extract.
    Geocode {
        #[arg(long = "graph-osm")]
        graph_osm: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Run the HTTP service.
    Serve {
        /// Falls back to the MMTP_CONFIG environment variable.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::ValidateGtfs { feed, json } => validate(&feed, json),
        Command::BuildGraph {
            osm,
            gtfs,
            out,
            link_radius,
        } => build(&osm, &gtfs, &out, link_radius),
        Command::Plan {
            graph,
            from,
            to,
            date,
            time,
            mode,
            n,
            max_walk,
            scenario,
        } => {
            let date = ServiceDate::parse_iso(&date)
                .or_else(|_| ServiceDate::parse_compact(&date))
                .map_err(usage)?;
            let mut request = PlanRequest::new(point(&from)?, point(&to)?, date, GtfsTime::parse_clock(&time).map_err(usage)?);
            request.mode = Mode::parse(&mode).ok_or_else(|| usage(format!("unknown mode {mode:?}")))?;
            request.num_itineraries = n;
            request.max_walk_m = max_walk;
            plan_cmd(&graph, request, scenario.as_deref())
        }
        Command::Geocode { graph_osm, q, limit } => {
            let doc = parse_osm_xml(&fs::read(&graph_osm).map_err(|e| input(format!("{}: {e}", graph_osm.display())))?)
                .map_err(|e| input(format!("{}: {e}", graph_osm.display())))?;
            let index = build_place_index(&doc);
            let hits: Vec<_> = index
                .search(&q, limit)
                .into_iter()
                .map(|e| serde_json::json!({ "name": e.name, "lat": e.point.lat, "lon": e.point.lon }))
                .collect();
            emit(&serde_json::Value::Array(hits))?;
            Ok(0)
        }
        Command::Serve { config } => serve(config),
    }
}

fn point(text: &str) -> Result<GeoPoint, Failure> {
    GeoPoint::parse_lat_lon(text).ok_or_else(|| usage(format!("expected lat,lon but got {text:?}")))
}

fn emit(value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(input)?;
    writeln!(out).map_err(input)
}

fn validate(feed_path: &Path, json: bool) -> Result<u8, Failure> {
    let feed = parse_feed(feed_path).map_err(|e| input(format!("{}: {e}", feed_path.display())))?;
    let issues = validate_feed(&feed);
    let mut out = std::io::stdout().lock();
    for issue in &issues {
        if json {
            serde_json::to_writer(&mut out, issue).map_err(input)?;
            writeln!(out).map_err(input)?;
        } else {
            writeln!(out, "{} {} {}: {}", issue.code, issue.file, issue.id, issue.message).map_err(input)?;
        }
    }
    let summary = format!("{} issue{}", issues.len(), if issues.len() == 1 { "" } else { "s" });
    if json {
        eprintln!("{summary}");
    } else {
        writeln!(out, "{summary}").map_err(input)?;
    }
    Ok(if issues.is_empty() { 0 } else { EXIT_ISSUES })
}

/// `SOURCE_DATE_EPOCH` when set, else the newest modification time among the
/// inputs, so rebuilding unchanged inputs reproduces the file exactly.
fn build_timestamp(inputs: &[&Path]) -> Result<String, Failure> {
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        let secs: i64 = epoch
            .trim()
            .parse()
            .map_err(|_| usage(format!("SOURCE_DATE_EPOCH is not an integer: {epoch:?}")))?;
        let at = DateTime::<Utc>::from_timestamp(secs, 0).ok_or_else(|| usage("SOURCE_DATE_EPOCH out of range"))?;
        return Ok(at.to_rfc3339_opts(SecondsFormat::Secs, true));
    }
    let mut newest = SystemTime::UNIX_EPOCH;
    for path in inputs {
        newest = newest.max(newest_mtime(path).map_err(|e| input(format!("{}: {e}", path.display())))?);
    }
    Ok(DateTime::<Utc>::from(newest).to_rfc3339_opts(SecondsFormat::Secs, true))
}

fn newest_mtime(path: &Path) -> std::io::Result<SystemTime> {
    let meta = fs::metadata(path)?;
    let mut newest = meta.modified()?;
    if meta.is_dir() {
        for entry in fs::read_dir(path)? {
            newest = newest.max(entry?.metadata()?.modified()?);
        }
    }
    Ok(newest)
}

fn build(osm: &Path, gtfs: &Path, out: &Path, link_radius_m: f64) -> Result<u8, Failure> {
    if !(link_radius_m.is_finite() && link_radius_m > 0.0) {
        return Err(usage("--link-radius must be positive"));
    }
    let bytes = fs::read(osm).map_err(|e| input(format!("{}: {e}", osm.display())))?;
    let doc = parse_osm_xml(&bytes).map_err(|e| input(format!("{}: {e}", osm.display())))?;
    let feed = parse_feed(gtfs).map_err(|e| input(format!("{}: {e}", gtfs.display())))?;
    let options = BuildOptions {
        link_radius_m,
        built_at: Some(build_timestamp(&[osm, gtfs])?),
    };
    let graph = build_graph_from_osm(&doc, &feed, &options).map_err(input)?;
    fs::write(out, serialize_graph(&graph)).map_err(|e| input(format!("{}: {e}", out.display())))?;
    let c = graph.counts();
    info!("wrote {}", out.display());
    println!("{} vertices, {} edges, {} stops, {} trips", c.vertices, c.edges, c.stops, c.trips);
    println!("{} stops linked", c.linked_stops);
    Ok(0)
}

fn plan_cmd(graph_path: &Path, request: PlanRequest, scenario_path: Option<&Path>) -> Result<u8, Failure> {
    let bytes = fs::read(graph_path).map_err(|e| input(format!("{}: {e}", graph_path.display())))?;
    let graph = deserialize_graph(&bytes).map_err(|e| input(format!("{}: {e}", graph_path.display())))?;
    let scenario: Option<Scenario> = match scenario_path {
        None => None,
        Some(p) => {
            let text = fs::read(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            let s: Scenario = serde_json::from_slice(&text).map_err(|e| input(format!("{}: {e}", p.display())))?;
            s.validate().map_err(|e| input(format!("{}: {e}", p.display())))?;
            Some(s)
        }
    };
    let view = scenario.as_ref().map(|s| apply_scenario(&graph, s));
    match plan(&graph, &request, &RoutingProfile::default(), view.as_ref()) {
        Ok(response) => {
            emit(&response)?;
            Ok(0)
        }
        Err(e) => Err(Failure {
            code: EXIT_PLAN,
            message: e.to_string(),
        }),
    }
}

fn serve(config: Option<PathBuf>) -> Result<u8, Failure> {
    let path = config
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
        .ok_or_else(|| usage(format!("serve needs --config or {CONFIG_ENV}")))?;
    let config = ServiceConfig::load(&path).map_err(usage)?;
    let runtime = tokio::runtime::Runtime::new().map_err(usage)?;
    match runtime.block_on(mmtp_service::serve(config)) {
        Ok(()) => Ok(0),
        Err(e) => Err(Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }),
    }
}
