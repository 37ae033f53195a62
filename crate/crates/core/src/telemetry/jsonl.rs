//! Session-log persistence: one JSON object per line for samples, plus a
//! sidecar metadata file per log.
//!
//! Serialization goes through serde_json's shortest-round-trip float
//! formatting, so any finite f64 written here reads back bit-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_sample, ImuSample, PlayerLog, TelemetryError};

/// Extension of the per-log sample file: `<player_id>.jsonl`.
pub const DATA_EXT: &str = "jsonl";
/// Suffix of the per-log sidecar: `<player_id>.meta.json`.
pub const META_SUFFIX: &str = ".meta.json";

/// Sidecar metadata stored next to each log file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogMeta {
    pub player_id: String,
    pub skill: u8,
}

#[derive(Debug, Error)]
pub enum LogIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid sample: {source}")]
    BadSample {
        path: PathBuf,
        line: usize,
        #[source]
        source: TelemetryError,
    },
    #[error("{path}:{line}: unparseable record: {source}")]
    BadJson {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: bad metadata: {detail}")]
    BadMeta { path: PathBuf, detail: String },
    #[error("log {path} has no sidecar metadata file")]
    MissingMeta { path: PathBuf },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: TelemetryError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LogIoError + '_ {
    move |source| LogIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `<player_id>.jsonl` and `<player_id>.meta.json` under `dir`.
/// Returns the data file path.
pub fn write_log(dir: &Path, log: &PlayerLog) -> Result<PathBuf, LogIoError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let data_path = dir.join(format!("{}.{DATA_EXT}", log.player_id));
    let meta_path = dir.join(format!("{}{META_SUFFIX}", log.player_id));

    let file = File::create(&data_path).map_err(io_err(&data_path))?;
    let mut w = BufWriter::new(file);
    for s in &log.samples {
        serde_json::to_writer(&mut w, s).map_err(|e| LogIoError::BadJson {
            path: data_path.clone(),
            line: 0,
            source: e,
        })?;
        w.write_all(b"\n").map_err(io_err(&data_path))?;
    }
    w.flush().map_err(io_err(&data_path))?;

    let meta = LogMeta {
        player_id: log.player_id.clone(),
        skill: log.skill,
    };
    let meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    std::fs::write(&meta_path, meta_json).map_err(io_err(&meta_path))?;
    Ok(data_path)
}

/// Reads a log from its data file and sidecar. Every line is validated;
/// errors carry the file path and 1-based line number.
pub fn read_log(data_path: &Path, meta_path: &Path) -> Result<PlayerLog, LogIoError> {
    let meta_text = std::fs::read_to_string(meta_path).map_err(io_err(meta_path))?;
    let meta: LogMeta = serde_json::from_str(&meta_text).map_err(|e| LogIoError::BadMeta {
        path: meta_path.to_path_buf(),
        detail: e.to_string(),
    })?;

    let file = File::open(data_path).map_err(io_err(data_path))?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(data_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: ImuSample = serde_json::from_str(&line).map_err(|e| LogIoError::BadJson {
            path: data_path.to_path_buf(),
            line: i + 1,
            source: e,
        })?;
        let s = validate_sample(&raw).map_err(|e| LogIoError::BadSample {
            path: data_path.to_path_buf(),
            line: i + 1,
            source: e,
        })?;
        samples.push(s);
    }
    PlayerLog::new(meta.player_id, meta.skill, samples).map_err(|e| LogIoError::Invalid {
        path: data_path.to_path_buf(),
        source: e,
    })
}

/// Loads every `*.jsonl` log under `dir` (non-recursive), sorted by
/// player id so downstream processing is order-stable.
pub fn load_log_dir(dir: &Path) -> Result<Vec<PlayerLog>, LogIoError> {
    let mut data_files: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some(DATA_EXT) {
            data_files.push(path);
        }
    }
    data_files.sort();

    let mut logs = Vec::new();
    for data_path in data_files {
        let stem = data_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let meta_path = dir.join(format!("{stem}{META_SUFFIX}"));
        if !meta_path.exists() {
            return Err(LogIoError::MissingMeta { path: data_path });
        }
        logs.push(read_log(&data_path, &meta_path)?);
    }
    Ok(logs)
}
