//! The 13 behavioral features computed per 3-minute window.
//!
//! Three feature families, each read directly off raw channel values:
//!
//! * active-movement portion (`axn..gzn`): fraction of samples deviating
//!   from the window mean by more than 3 standard deviations, per channel;
//! * quiescent dispersion (`axo..gzo`): variance of the samples inside the
//!   3-sigma band, capturing subtle oscillations while not actively moving;
//! * lean-back portion (`lb`): fraction of samples whose vertical
//!   acceleration falls below a gravity-referenced threshold.
//!
//! Mean and sigma for the 3-sigma rule are computed per window per channel,
//! so windows stay independent rows for cross-validation. "Dispersion" is
//! population variance throughout (not standard deviation).

mod corr;
mod dataset;

pub use corr::{correlation_matrix, write_correlation_csv, CorrelationMatrix};
pub use dataset::{
    build_dataset, header_matches_frozen_order, read_dataset_csv, write_dataset_csv, Dataset,
    DatasetError,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::telemetry::{SessionWindow, FEATURE_CHANNELS};

/// Default lean-back threshold on the vertical channel, in g.
/// cos(11.5 deg) is about 0.98: tilts past that count as leaning.
pub const DEFAULT_LEAN_THRESHOLD_G: f64 = 0.98;

/// Number of behavioral features.
pub const FEATURE_COUNT: usize = 13;

/// Feature column names in the frozen dataset order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "axn", "ayn", "azn", "gxn", "gyn", "gzn", "lb", "axo", "ayo", "azo", "gxo", "gyo", "gzo",
];

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series has {0} samples; need at least 2")]
    SeriesTooShort(usize),
    #[error("need at least 2 dataset rows, got {0}")]
    InsufficientRows(usize),
}

fn mean(series: &[f64]) -> f64 {
    let mut acc = 0.0;
    for v in series {
        acc += v;
    }
    acc / series.len() as f64
}

fn population_variance_around(series: &[f64], mu: f64) -> f64 {
    let mut acc = 0.0;
    for v in series {
        let d = v - mu;
        acc += d * d;
    }
    acc / series.len() as f64
}

/// Fraction of samples deviating from the window mean by more than
/// 3 standard deviations. A constant series (sigma = 0) returns 0.
pub fn active_portion(series: &[f64]) -> Result<f64, FeatureError> {
    if series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    if series.len() < 2 {
        return Err(FeatureError::SeriesTooShort(series.len()));
    }
    let mu = mean(series);
    let sigma = population_variance_around(series, mu).sqrt();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let bound = 3.0 * sigma;
    let count = series.iter().filter(|v| (**v - mu).abs() > bound).count();
    Ok(count as f64 / series.len() as f64)
}

/// Variance of the samples inside the 3-sigma band (mean/sigma over the
/// full window). Returns 0 when the quiescent subset has fewer than 2
/// samples or when the series is constant.
pub fn quiescent_dispersion(series: &[f64]) -> Result<f64, FeatureError> {
    if series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    if series.len() < 2 {
        return Err(FeatureError::SeriesTooShort(series.len()));
    }
    let mu = mean(series);
    let sigma = population_variance_around(series, mu).sqrt();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let bound = 3.0 * sigma;
    let quiescent: Vec<f64> = series
        .iter()
        .copied()
        .filter(|v| (v - mu).abs() <= bound)
        .collect();
    if quiescent.len() < 2 {
        return Ok(0.0);
    }
    let q_mu = mean(&quiescent);
    Ok(population_variance_around(&quiescent, q_mu))
}

/// Fraction of samples whose vertical acceleration is below `threshold_g`.
pub fn lean_back_portion(az_series: &[f64], threshold_g: f64) -> Result<f64, FeatureError> {
    if az_series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    let count = az_series.iter().filter(|v| **v < threshold_g).count();
    Ok(count as f64 / az_series.len() as f64)
}

/// One dataset row: the 13 features plus identity and target.
/// Field order is the frozen column order of every file output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub axn: f64,
    pub ayn: f64,
    pub azn: f64,
    pub gxn: f64,
    pub gyn: f64,
    pub gzn: f64,
    pub lb: f64,
    pub axo: f64,
    pub ayo: f64,
    pub azo: f64,
    pub gxo: f64,
    pub gyo: f64,
    pub gzo: f64,
    pub player_id: String,
    pub window_index: u32,
    pub skill: u8,
}

impl FeatureVector {
    /// Feature values in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> [f64; FEATURE_COUNT] {
        [
            self.axn, self.ayn, self.azn, self.gxn, self.gyn, self.gzn, self.lb, self.axo,
            self.ayo, self.azo, self.gxo, self.gyo, self.gzo,
        ]
    }
}

/// Computes all 13 features for one window.
pub fn extract_features(
    window: &SessionWindow,
    threshold_g: f64,
) -> Result<FeatureVector, FeatureError> {
    let mut active = [0.0; 6];
    let mut quiet = [0.0; 6];
    let mut az_series: Vec<f64> = Vec::new();
    for (i, ch) in FEATURE_CHANNELS.iter().enumerate() {
        let series: Vec<f64> = window.samples.iter().map(|s| s.channel(*ch)).collect();
        active[i] = active_portion(&series)?;
        quiet[i] = quiescent_dispersion(&series)?;
        if i == 2 {
            az_series = series;
        }
    }
    let lb = lean_back_portion(&az_series, threshold_g)?;
    Ok(FeatureVector {
        axn: active[0],
        ayn: active[1],
        azn: active[2],
        gxn: active[3],
        gyn: active[4],
        gzn: active[5],
        lb,
        axo: quiet[0],
        ayo: quiet[1],
        azo: quiet[2],
        gxo: quiet[3],
        gyo: quiet[4],
        gzo: quiet[5],
        player_id: window.player_id.clone(),
        window_index: window.window_index,
        skill: window.skill,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::ImuSample;

    #[test]
    fn constant_series_has_zero_active_portion() {
        let series = vec![0.5; 100];
        assert_eq!(active_portion(&series).unwrap(), 0.0);
    }

    #[test]
    fn single_spike_in_large_flat_series() {
        // 17999 zeros plus one 10: the spike dominates sigma yet still
        // exceeds 3 sigma of the full window.
        let mut series = vec![0.0; 17_999];
        series.push(10.0);
        let n = series.len() as f64;
        // Independent recomputation.
        let mu = series.iter().sum::<f64>() / n;
        let var = series.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        let bound = 3.0 * var.sqrt();
        let expect = series.iter().filter(|v| (**v - mu).abs() > bound).count() as f64 / n;
        assert_eq!(expect, 1.0 / 18_000.0);
        assert_eq!(active_portion(&series).unwrap(), expect);
    }

    #[test]
    fn empty_series_errors() {
        assert_eq!(active_portion(&[]), Err(FeatureError::EmptySeries));
        assert_eq!(quiescent_dispersion(&[]), Err(FeatureError::EmptySeries));
        assert_eq!(lean_back_portion(&[], 0.98), Err(FeatureError::EmptySeries));
    }

    #[test]
    fn constant_series_has_zero_dispersion() {
        assert_eq!(quiescent_dispersion(&[2.0; 50]).unwrap(), 0.0);
    }

    #[test]
    fn spikes_excluded_from_dispersion() {
        // Alternating small noise plus occasional huge spikes: masked
        // variance stays near the noise variance, unmasked does not.
        let mut series = Vec::new();
        for i in 0..10_000 {
            let base = if i % 2 == 0 { 0.01 } else { -0.01 };
            series.push(base);
        }
        for i in 0..20 {
            series[i * 500] = 5.0;
        }
        let masked = quiescent_dispersion(&series).unwrap();
        let mu = series.iter().sum::<f64>() / series.len() as f64;
        let unmasked =
            series.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / series.len() as f64;
        assert!(masked < 2e-4, "masked variance {masked} should be noise-scale");
        assert!(unmasked > 1e-2, "unmasked variance {unmasked} should see spikes");
    }

    #[test]
    fn lean_back_threshold_cases() {
        let upright = vec![1.0; 100];
        assert_eq!(lean_back_portion(&upright, 0.98).unwrap(), 0.0);

        let tilted = vec![(20f64).to_radians().cos(); 100];
        assert_eq!(lean_back_portion(&tilted, 0.98).unwrap(), 1.0);

        let mut half = vec![1.0; 50];
        half.extend(vec![0.94; 50]);
        assert_eq!(lean_back_portion(&half, 0.98).unwrap(), 0.5);
    }

    #[test]
    fn all_constant_window_extracts_zero_vector() {
        let samples: Vec<ImuSample> = (0..200)
            .map(|i| ImuSample {
                t: i as f64 / 100.0,
                ax: 0.0,
                ay: 0.0,
                az: 1.0,
                gx: 0.0,
                gy: 0.0,
                gz: 0.0,
                mx: 0.0,
                my: 0.0,
                mz: 0.0,
            })
            .collect();
        let window = SessionWindow {
            player_id: "p01".into(),
            skill: 0,
            window_index: 0,
            samples,
        };
        let fv = extract_features(&window, DEFAULT_LEAN_THRESHOLD_G).unwrap();
        assert_eq!(fv.values(), [0.0; 13]);
        assert_eq!(fv.player_id, "p01");
        assert_eq!(fv.window_index, 0);
        assert_eq!(fv.skill, 0);
    }

    #[test]
    fn values_follow_frozen_column_order() {
        let fv = FeatureVector {
            axn: 1.0,
            ayn: 2.0,
            azn: 3.0,
            gxn: 4.0,
            gyn: 5.0,
            gzn: 6.0,
            lb: 7.0,
            axo: 8.0,
            ayo: 9.0,
            azo: 10.0,
            gxo: 11.0,
            gyo: 12.0,
            gzo: 13.0,
            player_id: "x".into(),
            window_index: 0,
            skill: 1,
        };
        let vals = fv.values();
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(*v, (i + 1) as f64);
        }
        assert_eq!(FEATURE_NAMES[6], "lb");
        assert_eq!(FEATURE_NAMES[0], "axn");
        assert_eq!(FEATURE_NAMES[12], "gzo");
    }
}
