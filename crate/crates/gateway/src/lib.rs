//! Telemetry ingestion gateway: an HTTP service that accepts 1-second JSON
//! batches of chair IMU samples and appends them to per-session logs, plus
//! the replay client that streams recorded logs into it.
//!
//! The store is append-only and batch-atomic: a batch is either fully
//! persisted (data lines + journal record) or invisible after recovery, so
//! an abrupt kill never leaves a torn batch behind.

pub mod client;
pub mod server;
pub mod store;
pub mod wire;

pub use client::{ReplayClient, ReplaySummary};
pub use server::{run_server, ServerConfig};
pub use store::{SessionStore, StoreError};
