use std::future::{Future, IntoFuture};
use std::path::Path;
use std::sync::Arc;

use log::{error, info};
use mmtp_core::{deserialize_graph, MultimodalGraph};
use thiserror::Error;
use tokio::net::TcpListener;

use crate::app::{app, AppState};
use crate::config::{ConfigError, ServiceConfig};
use crate::querylog::QueryLog;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot open query log: {0}")]
    Log(std::io::Error),
    #[error("cannot listen on {address}: {source}")]
    Bind { address: String, source: std::io::Error },
    #[error("graph load failed: {0}")]
    GraphLoad(String),
    #[error("server error: {0}")]
    Io(std::io::Error),
}

impl ServeError {
    /// 1 for configuration problems, 2 when the graph cannot be loaded.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::GraphLoad(_) => 2,
            _ => 1,
        }
    }
}

pub fn load_graph(path: &Path) -> Result<MultimodalGraph, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    deserialize_graph(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    config.validate()?;
    let listener = TcpListener::bind(&config.listen_address).await.map_err(|source| ServeError::Bind {
        address: config.listen_address.clone(),
        source,
    })?;
    serve_on(listener, config, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already-bound listener until `shutdown` resolves. The graph
/// loads in the background; a load failure stops the server.
pub async fn serve_on(
    listener: TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let log = QueryLog::open(&config.log_path).map_err(ServeError::Log)?;
    let state = Arc::new(AppState::new(config.settings(), log));
    let router = app(state.clone(), config.static_dir.as_deref());
    if let Ok(addr) = listener.local_addr() {
        info!("listening on http://{addr}");
    }

    let server = axum::serve(listener, router).with_graceful_shutdown(shutdown).into_future();
    tokio::pin!(server);
    let path = config.graph_path.clone();
    let load = tokio::task::spawn_blocking(move || load_graph(&path));

    tokio::select! {
        done = &mut server => return done.map_err(ServeError::Io),
        loaded = load => match loaded {
            Ok(Ok(graph)) => {
                let c = graph.counts();
                info!("graph loaded: {} vertices, {} edges, {} stops, {} trips", c.vertices, c.edges, c.stops, c.trips);
                state.set_graph(graph);
            }
            Ok(Err(e)) => {
                error!("{e}");
                return Err(ServeError::GraphLoad(e));
            }
            Err(e) => return Err(ServeError::GraphLoad(e.to_string())),
        },
    }
    server.await.map_err(ServeError::Io)
}
