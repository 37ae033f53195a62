//! Dataset assembly and its CSV form.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{extract_features, FeatureError, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::exec;
use crate::telemetry::SessionWindow;

/// Feature matrix plus labels and player group ids, one row per window.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major feature matrix in [`FEATURE_NAMES`] column order.
    pub features: Vec<Vec<f64>>,
    /// Binary skill target per row.
    pub labels: Vec<u8>,
    /// Player id per row; the grouping key for cross-validation.
    pub players: Vec<String>,
    /// Window ordinal within each player's log.
    pub window_indices: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: std::path::PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Distinct players in first-appearance order with their labels.
    pub fn player_labels(&self) -> Vec<(String, u8)> {
        let mut seen = Vec::new();
        for (p, l) in self.players.iter().zip(self.labels.iter()) {
            if !seen.iter().any(|(q, _)| q == p) {
                seen.push((p.clone(), *l));
            }
        }
        seen
    }

    /// Returns a copy with skill labels permuted at the player level:
    /// the multiset of player labels is shuffled across players, and every
    /// window inherits its player's new label. Used for null-model runs.
    pub fn with_shuffled_player_labels(&self, seed: u64) -> Dataset {
        let players = self.player_labels();
        let mut labels: Vec<u8> = players.iter().map(|(_, l)| *l).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        labels.shuffle(&mut rng);
        let reassigned: Vec<(String, u8)> = players
            .into_iter()
            .map(|(p, _)| p)
            .zip(labels)
            .collect();
        let mut out = self.clone();
        for (row, player) in out.players.iter().enumerate() {
            let new = reassigned
                .iter()
                .find(|(p, _)| p == player)
                .expect("player present")
                .1;
            out.labels[row] = new;
        }
        out
    }

    fn from_rows(rows: Vec<FeatureVector>) -> Dataset {
        let mut features = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        let mut players = Vec::with_capacity(rows.len());
        let mut window_indices = Vec::with_capacity(rows.len());
        for r in rows {
            features.push(r.values().to_vec());
            labels.push(r.skill);
            players.push(r.player_id);
            window_indices.push(r.window_index);
        }
        Dataset {
            features,
            labels,
            players,
            window_indices,
        }
    }

    /// Reconstructs the row view used for CSV output.
    pub fn rows(&self) -> Vec<FeatureVector> {
        (0..self.len())
            .map(|i| {
                let v = &self.features[i];
                FeatureVector {
                    axn: v[0],
                    ayn: v[1],
                    azn: v[2],
                    gxn: v[3],
                    gyn: v[4],
                    gzn: v[5],
                    lb: v[6],
                    axo: v[7],
                    ayo: v[8],
                    azo: v[9],
                    gxo: v[10],
                    gyo: v[11],
                    gzo: v[12],
                    player_id: self.players[i].clone(),
                    window_index: self.window_indices[i],
                    skill: self.labels[i],
                }
            })
            .collect()
    }
}

/// Extracts features for every window (in parallel under the `parallel`
/// feature) and assembles the dataset in window order.
pub fn build_dataset(windows: &[SessionWindow], threshold_g: f64) -> Result<Dataset, DatasetError> {
    let extracted = exec::map_ordered(windows, |w| extract_features(w, threshold_g));
    let mut rows = Vec::with_capacity(extracted.len());
    for r in extracted {
        rows.push(r?);
    }
    Ok(Dataset::from_rows(rows))
}

/// Writes the dataset as CSV: 13 feature columns in frozen order, then
/// player_id, window_index, skill. Floats round-trip exactly.
pub fn write_dataset_csv(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| DatasetError::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    for row in dataset.rows() {
        w.serialize(&row).map_err(|e| DatasetError::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    w.flush().map_err(|e| DatasetError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`].
pub fn read_dataset_csv(path: &Path) -> Result<Dataset, DatasetError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| DatasetError::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rows = Vec::new();
    for rec in r.deserialize::<FeatureVector>() {
        rows.push(rec.map_err(|e| DatasetError::Csv {
            path: path.to_path_buf(),
            source: e,
        })?);
    }
    Ok(Dataset::from_rows(rows))
}

/// Sanity guard used by CSV-facing code paths.
pub fn header_matches_frozen_order(header: &[String]) -> bool {
    if header.len() != FEATURE_COUNT + 3 {
        return false;
    }
    header[..FEATURE_COUNT]
        .iter()
        .zip(FEATURE_NAMES.iter())
        .all(|(a, b)| a == b)
        && header[FEATURE_COUNT] == "player_id"
        && header[FEATURE_COUNT + 1] == "window_index"
        && header[FEATURE_COUNT + 2] == "skill"
}
