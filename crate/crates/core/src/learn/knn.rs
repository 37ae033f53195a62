//! k-nearest-neighbors scoring over the stored standardized training set.

use serde::{Deserialize, Serialize};

use super::{check_xy, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// The "model" is the training data itself plus k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x_train: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub k: usize,
}

pub fn train_knn(x: &[Vec<f64>], y: &[u8], params: &KnnParams) -> Result<KnnModel, TrainError> {
    check_xy(x, y)?;
    if params.k < 1 || params.k > x.len() {
        return Err(TrainError::KTooLarge {
            k: params.k,
            rows: x.len(),
        });
    }
    Ok(KnnModel {
        x_train: x.to_vec(),
        labels: y.to_vec(),
        k: params.k,
    })
}

/// Fraction of class-1 labels among the k Euclidean-nearest training rows.
/// Distance ties break toward the lower row index, making the score
/// deterministic.
pub fn knn_score(model: &KnnModel, x: &[f64]) -> Result<f64, TrainError> {
    if model.k > model.x_train.len() {
        return Err(TrainError::KTooLarge {
            k: model.k,
            rows: model.x_train.len(),
        });
    }
    let mut by_distance: Vec<(f64, usize)> = model
        .x_train
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let d2: f64 = row
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, i)
        })
        .collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let hits = by_distance
        .iter()
        .take(model.k)
        .filter(|(_, i)| model.labels[*i] == 1)
        .count();
    Ok(hits as f64 / model.k as f64)
}
