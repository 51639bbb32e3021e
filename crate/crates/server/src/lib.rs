//! HTTP service for the medkit viewer: image upload, oblique slice rendering
//! to PNG, manual masks, frame matrices and registration.
//!
//! Images live in memory for the lifetime of the process. Every error is a
//! JSON body `{"error": {"code", "message"}}`.

pub mod error;
pub mod render;
mod routes;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::Router;

pub use error::{ApiError, ApiResult};
pub use render::{Colormap, RenderSpec};
pub use store::{Entry, ImageInfo, Store};

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Clone, Debug)]
pub struct Config {
    /// Root for `{"path": ...}` uploads; paths may not leave it.
    pub data_dir: PathBuf,
    pub register_timeout: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("."),
            register_timeout: Duration::from_secs(600),
        }
    }
}

pub struct AppState {
    pub config: Config,
    pub store: Store,
}

impl AppState {
    pub fn new(config: Config) -> Arc<Self> {
        Arc::new(Self {
            config,
            store: Store::default(),
        })
    }
}

pub fn app(state: Arc<AppState>) -> Router {
    routes::router(state)
}

/// Command-line options shared by `medkit-server` and `medkit serve`.
#[derive(Clone, Debug, clap::Args)]
pub struct ServeArgs {
    /// Port to listen on.
    #[arg(long, env = "MEDKIT_PORT", default_value_t = DEFAULT_PORT)]
    pub port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Directory that server-side paths are resolved against.
    #[arg(long, default_value = ".")]
    pub data_dir: PathBuf,
    /// Registration request timeout in seconds.
    #[arg(long, default_value_t = 600)]
    pub register_timeout: u64,
}

impl ServeArgs {
    pub fn config(&self) -> Config {
        Config {
            data_dir: self.data_dir.clone(),
            register_timeout: Duration::from_secs(self.register_timeout),
        }
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.host, self.port)
    }
}

pub async fn serve(config: Config, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// Runs [`serve`] on a fresh multi-threaded runtime until Ctrl-C.
pub fn run(args: &ServeArgs) -> anyhow::Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .try_init();
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(args.config(), args.addr()))
}
