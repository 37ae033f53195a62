//! From-scratch classifiers over the standardized feature matrix.
//!
//! All four model families train deterministically (fixed seeds, full-batch
//! first-order optimizers) and expose a real-valued score where higher means
//! more likely class 1, which is all ROC ranking needs.

mod forest;
mod knn;
mod logreg;
mod standardize;
mod svm;

pub use forest::{train_forest, ForestModel, ForestParams, Tree};
pub use knn::{knn_score, train_knn, KnnModel, KnnParams};
pub use logreg::{
    log_likelihood_gradient, penalized_log_likelihood, sigmoid, train_logreg, LogRegParams,
    LogisticModel,
};
pub use standardize::{fit_standardizer, Standardizer};
pub use svm::{svm_objective, train_svm, SvmModel, SvmParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("labels must be 0 or 1 (found {0})")]
    NonBinaryLabels(u8),
    #[error("training data contains a single class")]
    SingleClassTraining,
    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },
    #[error("k = {k} exceeds {rows} training rows")]
    KTooLarge { k: usize, rows: usize },
    #[error("rows have inconsistent dimensions")]
    RaggedMatrix,
    #[error("empty feature matrix")]
    EmptyMatrix,
}

pub(crate) fn check_xy(x: &[Vec<f64>], y: &[u8]) -> Result<usize, TrainError> {
    if x.is_empty() {
        return Err(TrainError::EmptyMatrix);
    }
    let d = x[0].len();
    if d == 0 {
        return Err(TrainError::EmptyMatrix);
    }
    if x.iter().any(|r| r.len() != d) || x.len() != y.len() {
        return Err(TrainError::RaggedMatrix);
    }
    let mut has0 = false;
    let mut has1 = false;
    for label in y {
        match label {
            0 => has0 = true,
            1 => has1 = true,
            other => return Err(TrainError::NonBinaryLabels(*other)),
        }
    }
    if !(has0 && has1) {
        return Err(TrainError::SingleClassTraining);
    }
    Ok(d)
}

/// Which classifier family to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression,
    Svm,
    Knn,
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::LogisticRegression,
        ModelKind::Svm,
        ModelKind::Knn,
        ModelKind::RandomForest,
    ];

    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "Logistic Regression",
            ModelKind::Svm => "Support Vector Machine",
            ModelKind::Knn => "KNN, 5 neighbours",
            ModelKind::RandomForest => "Random Forest, depth 4",
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "lr",
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "rf",
        }
    }

    pub fn parse(name: &str) -> Option<ModelKind> {
        match name.to_ascii_lowercase().as_str() {
            "lr" | "logreg" | "logistic_regression" => Some(ModelKind::LogisticRegression),
            "svm" => Some(ModelKind::Svm),
            "knn" => Some(ModelKind::Knn),
            "rf" | "forest" | "random_forest" => Some(ModelKind::RandomForest),
            _ => None,
        }
    }
}

/// Hyperparameters for every family, with the defaults used throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub logreg: LogRegParams,
    pub svm: SvmParams,
    pub knn: KnnParams,
    pub forest: ForestParams,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::LogisticRegression,
            logreg: LogRegParams::default(),
            svm: SvmParams::default(),
            knn: KnnParams::default(),
            forest: ForestParams::default(),
        }
    }
}

impl ModelSpec {
    pub fn of_kind(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            ..ModelSpec::default()
        }
    }
}

/// A fitted classifier of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    LogisticRegression(LogisticModel),
    Svm(SvmModel),
    Knn(KnnModel),
    RandomForest(ForestModel),
}

impl TrainedModel {
    /// Real-valued score of one standardized row; higher = more class 1.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            TrainedModel::LogisticRegression(m) => m.predict_proba(x),
            TrainedModel::Svm(m) => m.decision_value(x),
            TrainedModel::Knn(m) => knn_score(m, x).expect("scored with training dimensionality"),
            TrainedModel::RandomForest(m) => m.score(x),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::LogisticRegression(_) => ModelKind::LogisticRegression,
            TrainedModel::Svm(_) => ModelKind::Svm,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::RandomForest(_) => ModelKind::RandomForest,
        }
    }
}

/// Trains the family selected by `spec.kind` on standardized rows.
pub fn train_model(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
) -> Result<TrainedModel, TrainError> {
    Ok(match spec.kind {
        ModelKind::LogisticRegression => {
            TrainedModel::LogisticRegression(train_logreg(x, y, &spec.logreg)?)
        }
        ModelKind::Svm => TrainedModel::Svm(train_svm(x, y, &spec.svm)?),
        ModelKind::Knn => TrainedModel::Knn(train_knn(x, y, &spec.knn)?),
        ModelKind::RandomForest => TrainedModel::RandomForest(train_forest(x, y, &spec.forest)?),
    })
}

/// Versioned on-disk form: model type, parameters and the standardizer that
/// produced its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub standardizer: Standardizer,
    #[serde(flatten)]
    pub model: TrainedModel,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl SavedModel {
    pub fn new(standardizer: Standardizer, model: TrainedModel) -> Self {
        SavedModel {
            format_version: MODEL_FORMAT_VERSION,
            standardizer,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Standardizes a raw row and scores it.
    pub fn score_raw(&self, raw: &[f64]) -> f64 {
        self.model.score(&self.standardizer.transform_row(raw))
    }
}
