//! HTTP planning API: `/plan`, `/geocode`, `/scenarios`, `/health` and
//! `/graph/meta`, with an append-only JSON-lines query log.

mod app;
mod config;
mod querylog;
mod server;

pub use app::{app, AppState, LoadedGraph};
pub use config::{ConfigError, PlanDefaults, ServiceConfig, Settings, CONFIG_ENV};
pub use querylog::{QueryLog, QueryLogRecord};
pub use server::{load_graph, serve, serve_on, ServeError};
