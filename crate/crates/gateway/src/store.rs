//! Append-only per-session sample store with batch-atomic commits.
//!
//! Layout under the storage root:
//!
//! ```text
//! <root>/<player_id>/<session_id>/data.jsonl     one sample per line
//! <root>/<player_id>/<session_id>/batches.jsonl  one journal record per batch
//! <root>/<player_id>/<session_id>/meta.json      written when sealed
//! ```
//!
//! Commit order is data lines first, then the journal record. Recovery
//! trusts only the journal: any data bytes past the last whole journal
//! record are truncated away, so a crash at any byte leaves a whole number
//! of batches. Duplicate sequence numbers re-acknowledge without touching
//! disk.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use chairlab_core::telemetry::{validate_sample, ImuSample, PlayerLog};

use crate::wire::BatchAck;

const DATA_FILE: &str = "data.jsonl";
const JOURNAL_FILE: &str = "batches.jsonl";
const META_FILE: &str = "meta.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("schema error: {detail}")]
    Schema { detail: String },
    #[error("unknown session {player_id}/{session_id}")]
    UnknownSession {
        player_id: String,
        session_id: String,
    },
    #[error("session {player_id}/{session_id} already closed")]
    AlreadyClosed {
        player_id: String,
        session_id: String,
    },
    #[error("session {player_id}/{session_id} is not sealed yet")]
    NotSealed {
        player_id: String,
        session_id: String,
    },
    #[error("corrupt log at {path}:{line}: {detail}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("storage error at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid id segment {0:?}")]
    InvalidId(String),
}

impl StoreError {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
        move |source| StoreError::Storage {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One committed batch in the journal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct JournalRecord {
    seq: u64,
    /// Samples in this batch.
    count: usize,
    /// Bytes this batch appended to data.jsonl.
    bytes: u64,
}

/// A missing sequence range noticed at accept time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub expected: u64,
    pub got: u64,
}

/// Sidecar written when a session is sealed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub player_id: String,
    pub session_id: String,
    pub skill: u8,
    pub sample_count: usize,
    pub batch_count: usize,
    pub gaps: Vec<GapRecord>,
}

#[derive(Debug)]
struct SessionState {
    dir: PathBuf,
    next_seq: u64,
    sample_count: usize,
    data_bytes: u64,
    last_timestamp: Option<f64>,
    /// seq -> accepted sample count, for idempotent re-acks.
    acks: HashMap<u64, usize>,
    gaps: Vec<GapRecord>,
    sealed: Option<SessionMeta>,
}

impl SessionState {
    fn fresh(dir: PathBuf) -> Self {
        SessionState {
            dir,
            next_seq: 0,
            sample_count: 0,
            data_bytes: 0,
            last_timestamp: None,
            acks: HashMap::new(),
            gaps: Vec::new(),
            sealed: None,
        }
    }
}

type SessionKey = (String, String);

/// Thread-safe session store. Appends within one session serialize on that
/// session's lock; distinct sessions proceed concurrently.
pub struct SessionStore {
    root: PathBuf,
    sessions: Mutex<HashMap<SessionKey, Arc<Mutex<SessionState>>>>,
}

fn check_id(id: &str) -> Result<(), StoreError> {
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(StoreError::InvalidId(id.to_string()));
    }
    Ok(())
}

impl SessionStore {
    /// Opens (or creates) a store rooted at `root`, recovering every
    /// existing session directory to its last whole batch.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(StoreError::io(&root))?;
        let store = SessionStore {
            root: root.clone(),
            sessions: Mutex::new(HashMap::new()),
        };
        for player_entry in std::fs::read_dir(&root).map_err(StoreError::io(&root))? {
            let player_entry = player_entry.map_err(StoreError::io(&root))?;
            if !player_entry.path().is_dir() {
                continue;
            }
            let player_id = player_entry.file_name().to_string_lossy().to_string();
            for session_entry in
                std::fs::read_dir(player_entry.path()).map_err(StoreError::io(&root))?
            {
                let session_entry = session_entry.map_err(StoreError::io(&root))?;
                if !session_entry.path().is_dir() {
                    continue;
                }
                let session_id = session_entry.file_name().to_string_lossy().to_string();
                let state = recover_session(session_entry.path())?;
                store
                    .sessions
                    .lock()
                    .expect("store lock")
                    .insert((player_id.clone(), session_id), Arc::new(Mutex::new(state)));
            }
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn session_handle(
        &self,
        player_id: &str,
        session_id: &str,
        create: bool,
    ) -> Result<Arc<Mutex<SessionState>>, StoreError> {
        check_id(player_id)?;
        check_id(session_id)?;
        let key = (player_id.to_string(), session_id.to_string());
        let mut sessions = self.sessions.lock().expect("store lock");
        if let Some(state) = sessions.get(&key) {
            return Ok(Arc::clone(state));
        }
        if !create {
            return Err(StoreError::UnknownSession {
                player_id: key.0,
                session_id: key.1,
            });
        }
        let dir = self.root.join(player_id).join(session_id);
        std::fs::create_dir_all(&dir).map_err(StoreError::io(&dir))?;
        let state = Arc::new(Mutex::new(SessionState::fresh(dir)));
        sessions.insert(key, Arc::clone(&state));
        Ok(state)
    }

    /// Appends one batch atomically. Duplicates re-acknowledge, sequence
    /// jumps are accepted with the gap recorded in session metadata.
    pub fn post_batch(
        &self,
        player_id: &str,
        session_id: &str,
        seq: u64,
        samples: &[ImuSample],
    ) -> Result<BatchAck, StoreError> {
        let handle = self.session_handle(player_id, session_id, true)?;
        let mut state = handle.lock().expect("session lock");
        if state.sealed.is_some() {
            return Err(StoreError::AlreadyClosed {
                player_id: player_id.to_string(),
                session_id: session_id.to_string(),
            });
        }

        // Validate before touching disk.
        for (i, s) in samples.iter().enumerate() {
            validate_sample(s).map_err(|e| StoreError::Schema {
                detail: format!("sample {i}: {e}"),
            })?;
            if i > 0 && samples[i].t <= samples[i - 1].t {
                return Err(StoreError::Schema {
                    detail: format!(
                        "sample {i}: timestamp {} not after previous {}",
                        samples[i].t,
                        samples[i - 1].t
                    ),
                });
            }
        }

        if seq < state.next_seq {
            let count = state.acks.get(&seq).copied().unwrap_or(samples.len());
            return Ok(BatchAck {
                accepted_count: count,
                next_expected_seq: seq + 1,
            });
        }

        if let (Some(last), Some(first)) = (state.last_timestamp, samples.first()) {
            if first.t <= last {
                return Err(StoreError::Schema {
                    detail: format!(
                        "sample 0: timestamp {} regresses behind persisted {last}",
                        first.t
                    ),
                });
            }
        }

        if seq > state.next_seq {
            let gap = GapRecord {
                expected: state.next_seq,
                got: seq,
            };
            state.gaps.push(gap);
        }

        // Commit: data lines first, then the journal record.
        let mut buffer = Vec::with_capacity(samples.len() * 160);
        for s in samples {
            serde_json::to_writer(&mut buffer, s).map_err(|e| StoreError::Schema {
                detail: format!("serialize: {e}"),
            })?;
            buffer.push(b'\n');
        }
        let data_path = state.dir.join(DATA_FILE);
        append_all(&data_path, &buffer)?;

        let record = JournalRecord {
            seq,
            count: samples.len(),
            bytes: buffer.len() as u64,
        };
        let mut journal_line = serde_json::to_vec(&record).expect("journal serializes");
        journal_line.push(b'\n');
        let journal_path = state.dir.join(JOURNAL_FILE);
        append_all(&journal_path, &journal_line)?;

        state.data_bytes += buffer.len() as u64;
        state.sample_count += samples.len();
        if let Some(s) = samples.last() {
            state.last_timestamp = Some(s.t);
        }
        state.acks.insert(seq, samples.len());
        state.next_seq = seq + 1;

        Ok(BatchAck {
            accepted_count: samples.len(),
            next_expected_seq: state.next_seq,
        })
    }

    /// Seals a session with its skill label; afterwards it is readable and
    /// immutable.
    pub fn close_session(
        &self,
        player_id: &str,
        session_id: &str,
        skill: u8,
    ) -> Result<SessionMeta, StoreError> {
        if skill > 1 {
            return Err(StoreError::Schema {
                detail: format!("skill {skill} not in {{0,1}}"),
            });
        }
        let handle = self.session_handle(player_id, session_id, false)?;
        let mut state = handle.lock().expect("session lock");
        if state.sealed.is_some() {
            return Err(StoreError::AlreadyClosed {
                player_id: player_id.to_string(),
                session_id: session_id.to_string(),
            });
        }
        let meta = SessionMeta {
            player_id: player_id.to_string(),
            session_id: session_id.to_string(),
            skill,
            sample_count: state.sample_count,
            batch_count: state.acks.len(),
            gaps: state.gaps.clone(),
        };
        let meta_path = state.dir.join(META_FILE);
        let tmp_path = state.dir.join(format!("{META_FILE}.tmp"));
        let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
        std::fs::write(&tmp_path, text).map_err(StoreError::io(&tmp_path))?;
        std::fs::rename(&tmp_path, &meta_path).map_err(StoreError::io(&meta_path))?;
        state.sealed = Some(meta.clone());
        Ok(meta)
    }

    /// Reads a sealed session back as a [`PlayerLog`], bit-identical to the
    /// acknowledged samples.
    pub fn load_log(&self, player_id: &str, session_id: &str) -> Result<PlayerLog, StoreError> {
        let handle = self.session_handle(player_id, session_id, false)?;
        let state = handle.lock().expect("session lock");
        let meta = state.sealed.as_ref().ok_or_else(|| StoreError::NotSealed {
            player_id: player_id.to_string(),
            session_id: session_id.to_string(),
        })?;

        let data_path = state.dir.join(DATA_FILE);
        let mut samples = Vec::with_capacity(meta.sample_count);
        if meta.sample_count > 0 {
            let file = File::open(&data_path).map_err(StoreError::io(&data_path))?;
            let mut reader = BufReader::new(file).take(state.data_bytes);
            let mut line = String::new();
            let mut line_no = 0usize;
            loop {
                line.clear();
                let read = reader
                    .read_line(&mut line)
                    .map_err(StoreError::io(&data_path))?;
                if read == 0 {
                    break;
                }
                line_no += 1;
                if !line.ends_with('\n') {
                    return Err(StoreError::CorruptLog {
                        path: data_path.clone(),
                        line: line_no,
                        detail: "truncated line".to_string(),
                    });
                }
                let sample: ImuSample =
                    serde_json::from_str(line.trim_end()).map_err(|e| StoreError::CorruptLog {
                        path: data_path.clone(),
                        line: line_no,
                        detail: e.to_string(),
                    })?;
                samples.push(sample);
            }
        }
        if samples.len() != meta.sample_count {
            return Err(StoreError::CorruptLog {
                path: data_path,
                line: samples.len(),
                detail: format!(
                    "expected {} samples, found {}",
                    meta.sample_count,
                    samples.len()
                ),
            });
        }
        PlayerLog::new(meta.player_id.clone(), meta.skill, samples).map_err(|e| {
            StoreError::CorruptLog {
                path: data_path,
                line: 0,
                detail: e.to_string(),
            }
        })
    }

    /// Sealed sessions, sorted for stable downstream processing.
    pub fn sealed_sessions(&self) -> Vec<(String, String)> {
        let sessions = self.sessions.lock().expect("store lock");
        let mut out: Vec<(String, String)> = sessions
            .iter()
            .filter(|(_, state)| state.lock().expect("session lock").sealed.is_some())
            .map(|(k, _)| k.clone())
            .collect();
        out.sort();
        out
    }

    /// Loads every sealed session as a player log, sorted by player id.
    pub fn load_all_sealed(&self) -> Result<Vec<PlayerLog>, StoreError> {
        let mut logs = Vec::new();
        for (player, session) in self.sealed_sessions() {
            logs.push(self.load_log(&player, &session)?);
        }
        Ok(logs)
    }
}

fn append_all(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(StoreError::io(path))?;
    file.write_all(bytes).map_err(StoreError::io(path))?;
    file.flush().map_err(StoreError::io(path))?;
    Ok(())
}

/// Rebuilds a session's state from disk, truncating any bytes past the
/// last whole journal record.
fn recover_session(dir: PathBuf) -> Result<SessionState, StoreError> {
    let mut state = SessionState::fresh(dir.clone());

    let journal_path = dir.join(JOURNAL_FILE);
    let mut committed: Vec<JournalRecord> = Vec::new();
    if journal_path.exists() {
        let mut text = String::new();
        File::open(&journal_path)
            .map_err(StoreError::io(&journal_path))?
            .read_to_string(&mut text)
            .map_err(StoreError::io(&journal_path))?;
        let mut valid_bytes = 0usize;
        for line in text.split_inclusive('\n') {
            if !line.ends_with('\n') {
                break; // torn journal tail from a crash mid-append
            }
            match serde_json::from_str::<JournalRecord>(line.trim_end()) {
                Ok(rec) => {
                    committed.push(rec);
                    valid_bytes += line.len();
                }
                Err(_) => break,
            }
        }
        if valid_bytes < text.len() {
            let file = OpenOptions::new()
                .write(true)
                .open(&journal_path)
                .map_err(StoreError::io(&journal_path))?;
            file.set_len(valid_bytes as u64)
                .map_err(StoreError::io(&journal_path))?;
        }
    }

    let committed_bytes: u64 = committed.iter().map(|r| r.bytes).sum();
    let data_path = dir.join(DATA_FILE);
    let on_disk = if data_path.exists() {
        std::fs::metadata(&data_path)
            .map_err(StoreError::io(&data_path))?
            .len()
    } else {
        0
    };
    if on_disk > committed_bytes {
        let file = OpenOptions::new()
            .write(true)
            .open(&data_path)
            .map_err(StoreError::io(&data_path))?;
        file.set_len(committed_bytes)
            .map_err(StoreError::io(&data_path))?;
    } else if on_disk < committed_bytes {
        return Err(StoreError::CorruptLog {
            path: data_path,
            line: 0,
            detail: format!("journal commits {committed_bytes} bytes, data holds {on_disk}"),
        });
    }

    for rec in &committed {
        state.acks.insert(rec.seq, rec.count);
        state.sample_count += rec.count;
        state.data_bytes += rec.bytes;
        if rec.seq >= state.next_seq {
            if rec.seq > state.next_seq {
                state.gaps.push(GapRecord {
                    expected: state.next_seq,
                    got: rec.seq,
                });
            }
            state.next_seq = rec.seq + 1;
        }
    }

    // Last committed timestamp, for cross-restart regression checks.
    if state.data_bytes > 0 {
        let mut file = File::open(&data_path).map_err(StoreError::io(&data_path))?;
        let tail_start = state.data_bytes.saturating_sub(4096);
        file.seek(SeekFrom::Start(tail_start))
            .map_err(StoreError::io(&data_path))?;
        let mut tail = String::new();
        file.take(state.data_bytes - tail_start)
            .read_to_string(&mut tail)
            .map_err(StoreError::io(&data_path))?;
        if let Some(last_line) = tail.lines().last() {
            if let Ok(sample) = serde_json::from_str::<ImuSample>(last_line) {
                state.last_timestamp = Some(sample.t);
            }
        }
    }

    let meta_path = dir.join(META_FILE);
    if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path).map_err(StoreError::io(&meta_path))?;
        let meta: SessionMeta =
            serde_json::from_str(&text).map_err(|e| StoreError::CorruptLog {
                path: meta_path.clone(),
                line: 0,
                detail: format!("bad session meta: {e}"),
            })?;
        state.sealed = Some(meta);
    }

    Ok(state)
}
