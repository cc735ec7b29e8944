use std::fs;
use std::path::{Path, PathBuf};

use mmtp_core::router::{FareConfig, RoutingProfile, DEFAULT_MAX_WALK_M, DEFAULT_NUM_ITINERARIES, DEFAULT_WALK_SPEED_MPS};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the config file when none is given.
pub const CONFIG_ENV: &str = "MMTP_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("graph file {0} does not exist")]
    MissingGraph(PathBuf),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanDefaults {
    pub max_walk_m: f64,
    pub num_itineraries: usize,
    pub walk_speed: f64,
}

impl Default for PlanDefaults {
    fn default() -> Self {
        Self {
            max_walk_m: DEFAULT_MAX_WALK_M,
            num_itineraries: DEFAULT_NUM_ITINERARIES,
            walk_speed: DEFAULT_WALK_SPEED_MPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub graph_path: PathBuf,
    #[serde(default = "default_listen")]
    pub listen_address: String,
    #[serde(default)]
    pub fare_config: FareConfig,
    #[serde(default)]
    pub defaults: PlanDefaults,
    #[serde(default = "default_log")]
    pub log_path: PathBuf,
    /// Directory served at `/`, typically the built web UI.
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_log() -> PathBuf {
    "query_log.jsonl".into()
}

impl ServiceConfig {
    pub fn new(graph_path: impl Into<PathBuf>) -> Self {
        Self {
            graph_path: graph_path.into(),
            listen_address: default_listen(),
            fare_config: FareConfig::default(),
            defaults: PlanDefaults::default(),
            log_path: default_log(),
            static_dir: None,
        }
    }

    /// Reads and checks a JSON config. Relative paths inside it resolve
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut config: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.graph_path = base.join(&config.graph_path);
        config.log_path = base.join(&config.log_path);
        config.static_dir = config.static_dir.map(|d| base.join(d));
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.graph_path.is_file() {
            return Err(ConfigError::MissingGraph(self.graph_path.clone()));
        }
        let d = &self.defaults;
        if d.num_itineraries == 0 {
            return Err(ConfigError::Invalid("defaults.num_itineraries must be at least 1".into()));
        }
        if !(d.max_walk_m > 0.0 && d.walk_speed > 0.0) {
            return Err(ConfigError::Invalid(
                "defaults.max_walk_m and defaults.walk_speed must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn settings(&self) -> Settings {
        Settings {
            profile: RoutingProfile {
                walk_speed_mps: self.defaults.walk_speed,
                fare: self.fare_config.clone(),
                ..RoutingProfile::default()
            },
            max_walk_m: self.defaults.max_walk_m,
            num_itineraries: self.defaults.num_itineraries,
        }
    }
}

/// Request defaults and the routing profile shared by all handlers.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub profile: RoutingProfile,
    pub max_walk_m: f64,
    pub num_itineraries: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            profile: RoutingProfile::default(),
            max_walk_m: DEFAULT_MAX_WALK_M,
            num_itineraries: DEFAULT_NUM_ITINERARIES,
        }
    }
}
