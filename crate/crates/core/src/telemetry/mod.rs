//! Raw telemetry domain types and session windowing.
//!
//! An [`ImuSample`] is one 0.01 s reading of the chair-mounted nine-axis
//! sensor. A [`PlayerLog`] is a whole labeled session; [`segment_windows`]
//! slices it into fixed-length [`SessionWindow`]s that downstream feature
//! extraction treats as independent rows.

mod jsonl;

pub use jsonl::{load_log_dir, read_log, write_log, LogMeta, DATA_EXT, META_SUFFIX};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nominal spacing between consecutive samples, in seconds.
pub const NOMINAL_DT: f64 = 0.01;

/// Default analysis window length, in seconds.
pub const DEFAULT_WINDOW_SECONDS: f64 = 180.0;

/// Default fraction of the nominal sample count a window must reach to be kept.
pub const DEFAULT_COMPLETENESS: f64 = 0.8;

/// One nine-axis reading: acceleration in g, angular velocity in deg/s,
/// magnetic field in raw sensor units. `t` is seconds since session start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

/// The six channels the behavioral features read, in frozen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Ax,
    Ay,
    Az,
    Gx,
    Gy,
    Gz,
}

/// Accelerometer and gyroscope channels in feature order.
pub const FEATURE_CHANNELS: [Channel; 6] = [
    Channel::Ax,
    Channel::Ay,
    Channel::Az,
    Channel::Gx,
    Channel::Gy,
    Channel::Gz,
];

impl ImuSample {
    /// Value of one accel/gyro channel.
    pub fn channel(&self, c: Channel) -> f64 {
        match c {
            Channel::Ax => self.ax,
            Channel::Ay => self.ay,
            Channel::Az => self.az,
            Channel::Gx => self.gx,
            Channel::Gy => self.gy,
            Channel::Gz => self.gz,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 9] {
        [
            ("ax", self.ax),
            ("ay", self.ay),
            ("az", self.az),
            ("gx", self.gx),
            ("gy", self.gy),
            ("gz", self.gz),
            ("mx", self.mx),
            ("my", self.my),
            ("mz", self.mz),
        ]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TelemetryError {
    #[error("channel {field} is not finite")]
    NonFiniteChannel { field: &'static str },
    #[error("timestamp {t} is negative")]
    NegativeTimestamp { t: f64 },
    #[error("malformed record: {detail}")]
    MalformedRecord { detail: String },
    #[error("timestamps not strictly increasing at sample {index} ({prev} -> {next})")]
    UnsortedLog { index: usize, prev: f64, next: f64 },
    #[error("skill label {0} is not 0 or 1")]
    InvalidSkill(u8),
}

/// Checks one candidate sample: all nine channels finite, timestamp finite
/// and non-negative. Returns the sample unchanged when valid.
pub fn validate_sample(raw: &ImuSample) -> Result<ImuSample, TelemetryError> {
    if !raw.t.is_finite() {
        return Err(TelemetryError::MalformedRecord {
            detail: "timestamp t is not finite".to_string(),
        });
    }
    if raw.t < 0.0 {
        return Err(TelemetryError::NegativeTimestamp { t: raw.t });
    }
    for (field, v) in raw.fields() {
        if !v.is_finite() {
            return Err(TelemetryError::NonFiniteChannel { field });
        }
    }
    Ok(*raw)
}

/// A whole labeled session for one player. Timestamps are strictly
/// increasing; skill is the binary target (0 = low, 1 = high).
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerLog {
    pub player_id: String,
    pub skill: u8,
    pub samples: Vec<ImuSample>,
}

impl PlayerLog {
    /// Builds a log, validating every sample, the ordering invariant and the
    /// skill label.
    pub fn new(
        player_id: impl Into<String>,
        skill: u8,
        samples: Vec<ImuSample>,
    ) -> Result<Self, TelemetryError> {
        if skill > 1 {
            return Err(TelemetryError::InvalidSkill(skill));
        }
        for s in &samples {
            validate_sample(s)?;
        }
        check_sorted(&samples)?;
        Ok(Self {
            player_id: player_id.into(),
            skill,
            samples,
        })
    }
}

fn check_sorted(samples: &[ImuSample]) -> Result<(), TelemetryError> {
    for (i, pair) in samples.windows(2).enumerate() {
        if pair[1].t <= pair[0].t {
            return Err(TelemetryError::UnsortedLog {
                index: i + 1,
                prev: pair[0].t,
                next: pair[1].t,
            });
        }
    }
    Ok(())
}

/// A 3-minute slice of one player's log; the unit of feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionWindow {
    pub player_id: String,
    pub skill: u8,
    pub window_index: u32,
    pub samples: Vec<ImuSample>,
}

/// Slices a log into consecutive non-overlapping windows of
/// `window_seconds`, aligned to the log's first timestamp. Windows with
/// fewer than `completeness_fraction * (window_seconds / 0.01)` samples are
/// dropped, which removes the trailing partial window of a typical session
/// and any window hollowed out by upload gaps.
pub fn segment_windows(
    log: &PlayerLog,
    window_seconds: f64,
    completeness_fraction: f64,
) -> Result<Vec<SessionWindow>, TelemetryError> {
    assert!(window_seconds > 0.0, "window_seconds must be positive");
    assert!(
        (0.0..=1.0).contains(&completeness_fraction),
        "completeness_fraction must be in [0, 1]"
    );
    check_sorted(&log.samples)?;
    if log.samples.is_empty() {
        return Ok(Vec::new());
    }

    let t0 = log.samples[0].t;
    let min_samples = (completeness_fraction * (window_seconds / NOMINAL_DT)).ceil() as usize;

    let mut windows = Vec::new();
    let mut current: Vec<ImuSample> = Vec::new();
    let mut current_idx: u32 = 0;
    let mut flush = |idx: u32, buf: &mut Vec<ImuSample>| {
        if buf.len() >= min_samples.max(1) {
            windows.push(SessionWindow {
                player_id: log.player_id.clone(),
                skill: log.skill,
                window_index: idx,
                samples: std::mem::take(buf),
            });
        } else {
            buf.clear();
        }
    };

    for s in &log.samples {
        let idx = ((s.t - t0) / window_seconds).floor() as u32;
        if idx != current_idx {
            flush(current_idx, &mut current);
            current_idx = idx;
        }
        current.push(*s);
    }
    flush(current_idx, &mut current);
    Ok(windows)
}
