//! Chair-mounted IMU telemetry pipeline for player-skill prediction.
//!
//! The crate covers the full offline path: raw 100 Hz nine-axis samples,
//! per-player session logs, 3-minute analysis windows, the 13 behavioral
//! features (active-movement portion, quiescent dispersion and lean-back
//! portion), four from-scratch classifiers, and the repeated group-held-out
//! ROC-AUC evaluation protocol.
//!
//! Everything is deterministic under explicit seeds. With the default
//! `parallel` feature, window extraction, population generation and
//! evaluation repeats run on a rayon pool; disabling the feature falls back
//! to sequential loops with identical results.

pub mod eval;
pub mod exec;
pub mod features;
pub mod learn;
pub mod sim;
pub mod telemetry;

pub use telemetry::{ImuSample, PlayerLog, SessionWindow};
