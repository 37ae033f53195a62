//! Per-feature standardization fit on training rows only.

use serde::{Deserialize, Serialize};

use super::TrainError;

/// Column-wise affine rescaling to zero mean, unit variance. Constant
/// columns transform to zero instead of dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Learns per-column mean and population standard deviation.
pub fn fit_standardizer(rows: &[Vec<f64>]) -> Result<Standardizer, TrainError> {
    if rows.len() < 2 {
        return Err(TrainError::InsufficientRows {
            needed: 2,
            got: rows.len(),
        });
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(TrainError::RaggedMatrix);
    }
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            means[j] += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; d];
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            let dlt = v - means[j];
            stds[j] += dlt * dlt;
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
    }
    Ok(Standardizer { means, stds })
}

impl Standardizer {
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(self.stds.iter()))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}
