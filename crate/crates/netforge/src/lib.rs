//! PXE provisioning daemon, simulated client fleet and operator CLI on top
//! of `netforge-core`.

pub mod cli;
pub mod client;
pub mod config;
pub mod fleet;
pub mod log;
pub mod prepare;
pub mod server;
pub mod status;
pub mod transport;

pub use client::{run_client, ClientConfig, ClientError, ClientPhase, ClientReport, Selection};
pub use config::{ConfigError, Mode, ServerConfig};
pub use fleet::{run_fleet, FleetReport};
pub use log::{Component, Level, Logger};
pub use prepare::{prepare, PrepareReport};
pub use server::{BoundPorts, ServeError, ServerHandle};
