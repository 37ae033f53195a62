//! Repeated group-held-out evaluation: ROC/AUC metrics, player-level
//! splits, and the experiment driver that ties them to the learners.

mod experiment;
mod metrics;
mod split;

pub use experiment::{
    evaluate_split, feature_importance, run_experiment, run_full_experiment, EvalOptions,
    EvalReport, ModelReport,
};
pub use metrics::{roc_auc, roc_curve, trapezoid_area};
pub use split::{make_splits, GroupSplit};

use thiserror::Error;

use crate::learn::TrainError;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("labels contain a single class")]
    SingleClassLabels,
    #[error("scores and labels have different lengths ({scores} vs {labels})")]
    MismatchedLengths { scores: usize, labels: usize },
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
    #[error("empty score set")]
    EmptyScores,
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
    #[error("repeat {repeat} degenerated: {detail}")]
    DegenerateRepeat { repeat: usize, detail: String },
    #[error("train/test player sets overlap: {0}")]
    GroupLeak(String),
    #[error("dataset players do not match split players: {0}")]
    PlayerMismatch(String),
    #[error(transparent)]
    Train(#[from] TrainError),
}
