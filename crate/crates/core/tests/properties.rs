//! Property tests for the feature and metric invariants.

use proptest::prelude::*;

use chairlab_core::eval::{roc_auc, roc_curve, trapezoid_area};
use chairlab_core::features::{active_portion, lean_back_portion, quiescent_dispersion};
use chairlab_core::telemetry::{segment_windows, ImuSample, PlayerLog};

fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 2..400)
}

/// Scores with deliberate tie mass: values snap to a coarse grid half the
/// time.
fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    prop::collection::vec((any::<bool>(), -10.0f64..10.0, any::<bool>()), 4..120).prop_map(
        |rows| {
            let mut scores = Vec::with_capacity(rows.len());
            let mut labels = Vec::with_capacity(rows.len());
            for (i, (snap, v, label)) in rows.into_iter().enumerate() {
                let s = if snap { (v * 2.0).round() / 2.0 } else { v };
                scores.push(s);
                // Guarantee both classes.
                labels.push(if i == 0 { 0 } else if i == 1 { 1 } else { label as u8 });
            }
            (scores, labels)
        },
    )
}

fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0f64;
    let mut pairs = 0u64;
    for (i, si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / pairs as f64
}

proptest! {
    #[test]
    fn feature_ranges((series, threshold) in (series_strategy(), 0.5f64..1.5)) {
        let active = active_portion(&series).unwrap();
        prop_assert!((0.0..=1.0).contains(&active));
        let disp = quiescent_dispersion(&series).unwrap();
        prop_assert!(disp >= 0.0 && disp.is_finite());
        let lb = lean_back_portion(&series, threshold).unwrap();
        prop_assert!((0.0..=1.0).contains(&lb));
    }

    #[test]
    fn translation_leaves_active_portion_and_dispersion((series, shift) in (series_strategy(), -50.0f64..50.0)) {
        let shifted: Vec<f64> = series.iter().map(|v| v + shift).collect();
        let a0 = active_portion(&series).unwrap();
        let a1 = active_portion(&shifted).unwrap();
        prop_assert!((a0 - a1).abs() < 1e-9, "active {a0} vs {a1}");
        let d0 = quiescent_dispersion(&series).unwrap();
        let d1 = quiescent_dispersion(&shifted).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-9 * d0.abs().max(1.0), "disp {d0} vs {d1}");
    }

    #[test]
    fn positive_scaling_acts_quadratically_on_dispersion((series, scale) in (series_strategy(), 0.1f64..10.0)) {
        let scaled: Vec<f64> = series.iter().map(|v| v * scale).collect();
        let a0 = active_portion(&series).unwrap();
        let a1 = active_portion(&scaled).unwrap();
        prop_assert!((a0 - a1).abs() < 1e-9);
        let d0 = quiescent_dispersion(&series).unwrap();
        let d1 = quiescent_dispersion(&scaled).unwrap();
        prop_assert!((d1 - scale * scale * d0).abs() <= 1e-6 * d0.abs().max(1e-12) * scale * scale,
            "disp {d1} vs scaled {}", scale * scale * d0);
    }

    #[test]
    fn exceedance_and_quiescent_sets_partition_the_window(series in series_strategy()) {
        // active_portion counts exactly the complement of the 3-sigma mask.
        let n = series.len() as f64;
        let mu = series.iter().sum::<f64>() / n;
        let var = series.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        let bound = 3.0 * var.sqrt();
        let exceed = series.iter().filter(|v| (**v - mu).abs() > bound).count();
        let quiescent = series.iter().filter(|v| (**v - mu).abs() <= bound).count();
        prop_assert_eq!(exceed + quiescent, series.len());
        let active = active_portion(&series).unwrap();
        if var > 0.0 {
            prop_assert_eq!(active, exceed as f64 / n);
        } else {
            prop_assert_eq!(active, 0.0);
        }
    }

    #[test]
    fn lean_back_monotone_in_threshold((series, t1, t2) in (series_strategy(), 0.5f64..1.5, 0.5f64..1.5)) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let p_lo = lean_back_portion(&series, lo).unwrap();
        let p_hi = lean_back_portion(&series, hi).unwrap();
        prop_assert!(p_lo <= p_hi, "raising the threshold can only add samples");
    }

    #[test]
    fn rank_auc_equals_pair_counting((scores, labels) in scored_labels()) {
        let fast = roc_auc(&scores, &labels).unwrap();
        let brute = brute_force_auc(&scores, &labels);
        prop_assert_eq!(fast, brute);
    }

    #[test]
    fn auc_invariant_under_strictly_increasing_transform((scores, labels) in scored_labels()) {
        let a = roc_auc(&scores, &labels).unwrap();
        // Strictly increasing and order-exact for these magnitudes.
        let transformed: Vec<f64> = scores.iter().map(|s| s * 3.0 + 7.0).collect();
        let b = roc_auc(&transformed, &labels).unwrap();
        prop_assert_eq!(a, b);
        let expd: Vec<f64> = scores.iter().map(|s| (s / 10.0).exp()).collect();
        let c = roc_auc(&expd, &labels).unwrap();
        prop_assert_eq!(a, c);
    }

    #[test]
    fn auc_complement_symmetry_without_ties(base in prop::collection::vec(0u8..=1, 4..100)) {
        // Distinct scores by construction, labels from the generator.
        let mut labels = base;
        labels[0] = 0;
        labels[1] = 1;
        let scores: Vec<f64> = (0..labels.len()).map(|i| (i as f64 * 37.0 + 11.0) % 101.0).collect();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc_auc(&scores, &labels).unwrap();
        let b = roc_auc(&neg, &labels).unwrap();
        prop_assert_eq!(a + b, 1.0);
    }

    #[test]
    fn curve_area_equals_auc((scores, labels) in scored_labels()) {
        let auc = roc_auc(&scores, &labels).unwrap();
        let curve = roc_curve(&scores, &labels).unwrap();
        prop_assert!((trapezoid_area(&curve) - auc).abs() < 1e-12);
        prop_assert_eq!(curve[0], (0.0, 0.0));
        prop_assert_eq!(*curve.last().unwrap(), (1.0, 1.0));
        for pair in curve.windows(2) {
            prop_assert!(pair[1].0 >= pair[0].0 && pair[1].1 >= pair[0].1);
        }
    }

    #[test]
    fn segmentation_concatenates_to_a_subsequence(
        n in 100usize..4000,
        completeness in 0.1f64..1.0,
    ) {
        let samples: Vec<ImuSample> = (0..n)
            .map(|i| ImuSample {
                t: i as f64 / 100.0,
                ax: (i as f64).sin(),
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
        let log = PlayerLog::new("p01", 0, samples.clone()).unwrap();
        let windows = segment_windows(&log, 10.0, completeness).unwrap();
        // Window sample sequences concatenate to a subsequence of the
        // original, and full windows tile a prefix.
        let mut cursor = 0usize;
        for w in &windows {
            for s in &w.samples {
                let pos = samples[cursor..]
                    .iter()
                    .position(|o| o == s)
                    .expect("window sample must come from the log in order");
                cursor += pos + 1;
            }
        }
        let expected_full = n / 1000;
        let min_needed = (completeness * 1000.0).ceil() as usize;
        let remainder = n % 1000;
        let expected = expected_full + usize::from(remainder >= min_needed.max(1));
        prop_assert_eq!(windows.len(), expected);
    }
}
