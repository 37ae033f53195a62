//! Pearson correlation over features plus the skill target.

use std::path::Path;

use super::{Dataset, DatasetError, FEATURE_COUNT, FEATURE_NAMES};

/// Labeled square correlation matrix. The last variable is the target.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major, `labels.len()` squared.
    pub values: Vec<Vec<f64>>,
    /// Indices of zero-variance columns (their off-diagonal entries are 0).
    pub degenerate: Vec<usize>,
}

/// Computes the 14x14 Pearson correlation matrix over the 13 features and
/// the skill label. Zero-variance columns correlate 0 with everything else
/// and are flagged; the diagonal is 1 by definition.
pub fn correlation_matrix(dataset: &Dataset) -> Result<CorrelationMatrix, super::FeatureError> {
    let n = dataset.len();
    if n < 2 {
        return Err(super::FeatureError::InsufficientRows(n));
    }
    let d = FEATURE_COUNT + 1;
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    for (row, label) in dataset.features.iter().zip(dataset.labels.iter()) {
        for (j, v) in row.iter().enumerate() {
            columns[j].push(*v);
        }
        columns[FEATURE_COUNT].push(*label as f64);
    }

    let means: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let sds: Vec<f64> = columns
        .iter()
        .zip(means.iter())
        .map(|(c, mu)| {
            (c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64).sqrt()
        })
        .collect();
    let degenerate: Vec<usize> = sds
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == 0.0)
        .map(|(i, _)| i)
        .collect();

    let mut values = vec![vec![0.0; d]; d];
    for i in 0..d {
        values[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = if sds[i] == 0.0 || sds[j] == 0.0 {
                0.0
            } else {
                let mut cov = 0.0;
                for k in 0..n {
                    cov += (columns[i][k] - means[i]) * (columns[j][k] - means[j]);
                }
                (cov / n as f64 / (sds[i] * sds[j])).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }

    let mut labels: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    labels.push("skill".to_string());
    Ok(CorrelationMatrix {
        labels,
        values,
        degenerate,
    })
}

impl CorrelationMatrix {
    /// Correlation between two variables by name.
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

/// Emits the matrix as CSV with labeled rows and columns.
pub fn write_correlation_csv(matrix: &CorrelationMatrix, path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| DatasetError::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut header = vec![String::new()];
    header.extend(matrix.labels.iter().cloned());
    w.write_record(&header).map_err(|e| DatasetError::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    for (label, row) in matrix.labels.iter().zip(matrix.values.iter()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| DatasetError::Csv {
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

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset_with_columns(cols: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
        let n = labels.len();
        let mut features = vec![vec![0.0; FEATURE_COUNT]; n];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                features[i][j] = *v;
            }
        }
        Dataset {
            features,
            labels,
            players: (0..n).map(|i| format!("p{i}")).collect(),
            window_indices: vec![0; n],
        }
    }

    #[test]
    fn duplicated_feature_correlates_one() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let ds = dataset_with_columns(vec![x.clone(), x.clone()], vec![0, 0, 1, 1, 1]);
        let m = correlation_matrix(&ds).unwrap();
        assert!((m.get("axn", "ayn").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negated_feature_correlates_minus_one() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let ds = dataset_with_columns(vec![x, neg], vec![0, 0, 1, 1, 1]);
        let m = correlation_matrix(&ds).unwrap();
        assert!((m.get("axn", "ayn").unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_column_is_flagged_and_zeroed() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let flat = vec![7.0; 4];
        let ds = dataset_with_columns(vec![x, flat], vec![0, 1, 0, 1]);
        let m = correlation_matrix(&ds).unwrap();
        assert!(m.degenerate.contains(&1));
        assert_eq!(m.get("ayn", "axn").unwrap(), 0.0);
        assert_eq!(m.get("ayn", "ayn").unwrap(), 1.0);
    }

    #[test]
    fn symmetric_unit_diagonal_and_bounded() {
        let ds = dataset_with_columns(
            vec![
                vec![0.1, 0.4, 0.2, 0.9, 0.3],
                vec![1.0, 0.0, 0.5, 0.25, 0.75],
                vec![-1.0, 2.0, -3.0, 4.0, -5.0],
            ],
            vec![0, 1, 0, 1, 1],
        );
        let m = correlation_matrix(&ds).unwrap();
        let d = m.labels.len();
        assert_eq!(d, 14);
        for i in 0..d {
            assert_eq!(m.values[i][i], 1.0);
            for j in 0..d {
                assert_eq!(m.values[i][j], m.values[j][i]);
                assert!(m.values[i][j] >= -1.0 && m.values[i][j] <= 1.0);
            }
        }
    }

    #[test]
    fn insufficient_rows_error() {
        let ds = dataset_with_columns(vec![vec![1.0]], vec![0]);
        assert!(matches!(
            correlation_matrix(&ds),
            Err(super::super::FeatureError::InsufficientRows(1))
        ));
    }

    #[test]
    fn csv_has_labels() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let ds = dataset_with_columns(vec![x.clone(), x], vec![0, 0, 1, 1, 1]);
        let m = correlation_matrix(&ds).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corr.csv");
        write_correlation_csv(&m, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with(",axn,ayn"));
        assert!(first.ends_with("gzo,skill"));
        assert_eq!(text.lines().count(), 15);
    }
}
