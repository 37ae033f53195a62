//! The experiment driver: fit per repeat on training players only, score
//! the held-out players' windows, aggregate AUC over repeats.

use serde::{Deserialize, Serialize};

use super::{make_splits, roc_auc, roc_curve, EvalError, GroupSplit};
use crate::exec;
use crate::features::{Dataset, FEATURE_NAMES};
use crate::learn::{
    fit_standardizer, train_logreg, train_model, LogisticModel, ModelKind, ModelSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub n_repeats: usize,
    pub holdout: usize,
    pub seed: u64,
    /// Average window scores per player before AUC (sensitivity mode).
    pub per_player_aggregation: bool,
    /// Repeat whose test scores feed the reported ROC curve.
    pub designated_repeat: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            n_repeats: 100,
            holdout: 5,
            seed: 42,
            per_player_aggregation: false,
            designated_repeat: 0,
        }
    }
}

/// Per-model evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub kind: ModelKind,
    pub display_name: String,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub per_repeat_auc: Vec<f64>,
    /// (FPR, TPR) points from the designated repeat.
    pub roc_curve: Vec<(f64, f64)>,
    /// Signed standardized coefficients, feature-name tagged; logistic
    /// regression only, fit once on the full dataset.
    pub importances: Option<Vec<(String, f64)>>,
}

/// Full evaluation output, serialized as report.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_rows: usize,
    pub n_players: usize,
    pub repeats: usize,
    pub holdout: usize,
    pub seed: u64,
    pub per_player_aggregation: bool,
    pub feature_names: Vec<String>,
    pub models: Vec<ModelReport>,
    pub correlations_path: Option<String>,
}

fn split_rows(
    dataset: &Dataset,
    split: &GroupSplit,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    for p in &split.test_players {
        if split.train_players.contains(p) {
            return Err(EvalError::GroupLeak(p.clone()));
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, player) in dataset.players.iter().enumerate() {
        if split.train_players.contains(player) {
            train.push(i);
        } else if split.test_players.contains(player) {
            test.push(i);
        } else {
            return Err(EvalError::PlayerMismatch(player.clone()));
        }
    }
    Ok((train, test))
}

/// Fits on one split's training windows and scores its test windows.
/// Returns the AUC together with the raw (scores, labels) used, so callers
/// can build a ROC curve for a designated repeat.
pub fn evaluate_split(
    dataset: &Dataset,
    split: &GroupSplit,
    spec: &ModelSpec,
    per_player_aggregation: bool,
) -> Result<(f64, Vec<f64>, Vec<u8>), EvalError> {
    let (train_rows, test_rows) = split_rows(dataset, split)?;
    let degenerate = |detail: &str| EvalError::DegenerateRepeat {
        repeat: split.repeat_index,
        detail: detail.to_string(),
    };
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(degenerate("empty train or test fold"));
    }

    let x_train: Vec<Vec<f64>> = train_rows.iter().map(|&i| dataset.features[i].clone()).collect();
    let y_train: Vec<u8> = train_rows.iter().map(|&i| dataset.labels[i]).collect();
    let standardizer = fit_standardizer(&x_train)?;
    let x_train = standardizer.transform(&x_train);
    let model = train_model(spec, &x_train, &y_train)?;

    let mut scores: Vec<f64> = Vec::with_capacity(test_rows.len());
    let mut labels: Vec<u8> = Vec::with_capacity(test_rows.len());
    for &i in &test_rows {
        let row = standardizer.transform_row(&dataset.features[i]);
        scores.push(model.score(&row));
        labels.push(dataset.labels[i]);
    }

    let (scores, labels) = if per_player_aggregation {
        let mut order: Vec<&String> = Vec::new();
        for &i in &test_rows {
            if !order.contains(&&dataset.players[i]) {
                order.push(&dataset.players[i]);
            }
        }
        let mut agg_scores = Vec::with_capacity(order.len());
        let mut agg_labels = Vec::with_capacity(order.len());
        for player in order {
            let rows: Vec<usize> = test_rows
                .iter()
                .enumerate()
                .filter(|(_, &i)| &dataset.players[i] == player)
                .map(|(k, _)| k)
                .collect();
            let mean = rows.iter().map(|&k| scores[k]).sum::<f64>() / rows.len() as f64;
            agg_scores.push(mean);
            agg_labels.push(labels[rows[0]]);
        }
        (agg_scores, agg_labels)
    } else {
        (scores, labels)
    };

    let auc = roc_auc(&scores, &labels).map_err(|e| match e {
        EvalError::SingleClassLabels => degenerate("test fold carries one class"),
        other => other,
    })?;
    Ok((auc, scores, labels))
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Signed standardized coefficients, tagged with feature names in frozen
/// column order. Intercept excluded.
pub fn feature_importance(model: &LogisticModel) -> Vec<(String, f64)> {
    FEATURE_NAMES
        .iter()
        .map(|s| s.to_string())
        .zip(model.weights.iter().copied())
        .collect()
}

/// Evaluates one model family over precomputed splits. Repeats run in
/// parallel under the `parallel` feature; results aggregate in repeat
/// order either way.
pub fn run_experiment(
    dataset: &Dataset,
    spec: &ModelSpec,
    splits: &[GroupSplit],
    options: &EvalOptions,
) -> Result<ModelReport, EvalError> {
    let outcomes = exec::map_ordered(splits, |split| {
        evaluate_split(dataset, split, spec, options.per_player_aggregation)
    });

    let mut per_repeat_auc = Vec::with_capacity(outcomes.len());
    let mut designated: Option<(Vec<f64>, Vec<u8>)> = None;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let (auc, scores, labels) = outcome?;
        per_repeat_auc.push(auc);
        if i == options.designated_repeat.min(splits.len().saturating_sub(1)) {
            designated = Some((scores, labels));
        }
    }
    let (mean_auc, std_auc) = mean_and_population_std(&per_repeat_auc);

    let curve = match designated {
        Some((scores, labels)) => roc_curve(&scores, &labels)?,
        None => Vec::new(),
    };

    let importances = if spec.kind == ModelKind::LogisticRegression {
        let standardizer = fit_standardizer(&dataset.features)?;
        let x = standardizer.transform(&dataset.features);
        let full = train_logreg(&x, &dataset.labels, &spec.logreg)?;
        Some(feature_importance(&full))
    } else {
        None
    };

    Ok(ModelReport {
        kind: spec.kind,
        display_name: spec.kind.display_name().to_string(),
        mean_auc,
        std_auc,
        per_repeat_auc,
        roc_curve: curve,
        importances,
    })
}

/// Runs every requested model family on one shared set of splits and wraps
/// the results into an [`EvalReport`].
pub fn run_full_experiment(
    dataset: &Dataset,
    kinds: &[ModelKind],
    base_spec: &ModelSpec,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let players = dataset.player_labels();
    let splits = make_splits(&players, options.n_repeats, options.holdout, options.seed)?;
    let mut models = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let spec = ModelSpec {
            kind: *kind,
            ..base_spec.clone()
        };
        models.push(run_experiment(dataset, &spec, &splits, options)?);
    }
    Ok(EvalReport {
        n_rows: dataset.len(),
        n_players: players.len(),
        repeats: options.n_repeats,
        holdout: options.holdout,
        seed: options.seed,
        per_player_aggregation: options.per_player_aggregation,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        models,
        correlations_path: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Six players, four windows each; feature 0 separates the classes
    /// with player-level noise, the rest is static.
    fn toy_dataset() -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut players = Vec::new();
        let mut window_indices = Vec::new();
        for p in 0..6 {
            let skill = (p < 3) as u8;
            let center = if skill == 1 { 1.0 } else { -1.0 };
            for w in 0..4 {
                let mut row = vec![0.0; 13];
                row[0] = center + (w as f64) * 0.05 + p as f64 * 0.01;
                row[1] = (w as f64 * 0.7).sin();
                features.push(row);
                labels.push(skill);
                players.push(format!("p{:02}", p + 1));
                window_indices.push(w);
            }
        }
        Dataset {
            features,
            labels,
            players,
            window_indices,
        }
    }

    #[test]
    fn separable_toy_experiment_reaches_high_auc() {
        let ds = toy_dataset();
        let splits = make_splits(&ds.player_labels(), 20, 2, 5).unwrap();
        let spec = ModelSpec::of_kind(ModelKind::LogisticRegression);
        let report = run_experiment(&ds, &spec, &splits, &EvalOptions::default()).unwrap();
        assert_eq!(report.per_repeat_auc.len(), 20);
        assert!(report.mean_auc > 0.95, "mean AUC {}", report.mean_auc);
        // Mean and std are recomputable from the per-repeat list.
        let (m, s) = mean_and_population_std(&report.per_repeat_auc);
        assert_eq!(m, report.mean_auc);
        assert_eq!(s, report.std_auc);
        // ROC curve spans the unit square.
        assert_eq!(report.roc_curve.first(), Some(&(0.0, 0.0)));
        assert_eq!(report.roc_curve.last(), Some(&(1.0, 1.0)));
        let imp = report.importances.unwrap();
        assert_eq!(imp.len(), 13);
        assert_eq!(imp[0].0, "axn");
        assert!(imp[0].1 > 0.0, "separating feature coefficient sign");
    }

    #[test]
    fn group_leak_is_detected_at_runtime() {
        let ds = toy_dataset();
        let bad = GroupSplit {
            train_players: vec!["p01".into(), "p02".into(), "p04".into(), "p05".into()],
            test_players: vec!["p01".into(), "p03".into(), "p06".into()],
            repeat_index: 0,
            seed: 0,
        };
        let spec = ModelSpec::of_kind(ModelKind::Knn);
        assert!(matches!(
            evaluate_split(&ds, &bad, &spec, false),
            Err(EvalError::GroupLeak(_))
        ));
    }

    #[test]
    fn player_outside_split_is_detected() {
        let ds = toy_dataset();
        let bad = GroupSplit {
            train_players: vec!["p01".into(), "p02".into(), "p04".into()],
            test_players: vec!["p03".into(), "p05".into()],
            repeat_index: 0,
            seed: 0,
        };
        let spec = ModelSpec::of_kind(ModelKind::Knn);
        assert!(matches!(
            evaluate_split(&ds, &bad, &spec, false),
            Err(EvalError::PlayerMismatch(_))
        ));
    }

    #[test]
    fn per_player_aggregation_scores_players_not_windows() {
        let ds = toy_dataset();
        let split = GroupSplit {
            train_players: vec!["p01".into(), "p02".into(), "p04".into(), "p05".into()],
            test_players: vec!["p03".into(), "p06".into()],
            repeat_index: 0,
            seed: 0,
        };
        let spec = ModelSpec::of_kind(ModelKind::LogisticRegression);
        let (auc, scores, labels) = evaluate_split(&ds, &split, &spec, true).unwrap();
        assert_eq!(scores.len(), 2);
        assert_eq!(labels, vec![1, 0]);
        assert_eq!(auc, 1.0);
    }

    #[test]
    fn full_experiment_covers_all_families() {
        let ds = toy_dataset();
        let options = EvalOptions {
            n_repeats: 10,
            holdout: 2,
            seed: 3,
            ..EvalOptions::default()
        };
        let report =
            run_full_experiment(&ds, &ModelKind::ALL, &ModelSpec::default(), &options).unwrap();
        assert_eq!(report.models.len(), 4);
        assert_eq!(report.n_players, 6);
        assert_eq!(report.n_rows, 24);
        for m in &report.models {
            assert_eq!(m.per_repeat_auc.len(), 10);
            assert!(m.mean_auc >= 0.5);
        }
        // Only the logistic model reports importances.
        assert!(report.models[0].importances.is_some());
        assert!(report.models[1].importances.is_none());
    }

    #[test]
    fn report_serialization_is_deterministic() {
        let ds = toy_dataset();
        let options = EvalOptions {
            n_repeats: 5,
            holdout: 2,
            seed: 3,
            ..EvalOptions::default()
        };
        let kinds = [ModelKind::LogisticRegression, ModelKind::RandomForest];
        let a = run_full_experiment(&ds, &kinds, &ModelSpec::default(), &options).unwrap();
        let b = run_full_experiment(&ds, &kinds, &ModelSpec::default(), &options).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
