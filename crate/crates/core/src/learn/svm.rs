//! Soft-margin linear SVM trained on the unconstrained hinge-loss primal.
//!
//! Minimizes `0.5 * |w|^2 + (gamma / 2) * sum_i max(0, 1 - y_i (w.x_i + b))`
//! by full-batch subgradient descent with backtracking step halving, so the
//! tracked objective is non-increasing. Labels are mapped to {-1, +1}
//! internally; the ROC score of a row is the signed distance `w.x + b`.

use serde::{Deserialize, Serialize};

use super::{check_xy, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Hinge-loss weight: larger values favor small slack over wide margin.
    pub gamma: f64,
    pub max_epochs: usize,
    /// Stop once the accepted step size falls below this.
    pub min_step: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            gamma: 1.0,
            max_epochs: 2000,
            min_step: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub epochs: usize,
    pub final_objective: f64,
    /// Objective after every accepted epoch; not persisted.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl SvmModel {
    /// Signed distance to the separating hyperplane.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.bias + dot(&self.weights, x)
    }

    /// Margins `y_i (w.x_i + b)` with labels in {0, 1}.
    pub fn margins(&self, x: &[Vec<f64>], y: &[u8]) -> Vec<f64> {
        x.iter()
            .zip(y.iter())
            .map(|(row, label)| signed(*label) * self.decision_value(row))
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn signed(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Primal objective at `(w, b)`.
pub fn svm_objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[u8], gamma: f64) -> f64 {
    let reg: f64 = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(row, label)| (1.0 - signed(*label) * (b + dot(w, row))).max(0.0))
        .sum();
    reg + gamma / 2.0 * hinge
}

fn subgradient(w: &[f64], b: f64, x: &[Vec<f64>], y: &[u8], gamma: f64) -> (Vec<f64>, f64) {
    let mut gw = w.to_vec();
    let mut gb = 0.0;
    for (row, label) in x.iter().zip(y.iter()) {
        let yi = signed(*label);
        let margin = yi * (b + dot(w, row));
        if margin < 1.0 {
            for (g, v) in gw.iter_mut().zip(row.iter()) {
                *g -= gamma / 2.0 * yi * v;
            }
            gb -= gamma / 2.0 * yi;
        }
    }
    (gw, gb)
}

pub fn train_svm(x: &[Vec<f64>], y: &[u8], params: &SvmParams) -> Result<SvmModel, TrainError> {
    let d = check_xy(x, y)?;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut objective = svm_objective(&w, b, x, y, params.gamma);
    let mut trace = vec![objective];
    let mut step = 1.0;
    let mut epochs = 0;

    for _ in 0..params.max_epochs {
        let (gw, gb) = subgradient(&w, b, x, y, params.gamma);
        let mut eta = step * 2.0;
        let mut accepted = false;
        while eta > params.min_step {
            let cand_w: Vec<f64> = w.iter().zip(gw.iter()).map(|(wi, g)| wi - eta * g).collect();
            let cand_b = b - eta * gb;
            let cand_obj = svm_objective(&cand_w, cand_b, x, y, params.gamma);
            if cand_obj < objective {
                w = cand_w;
                b = cand_b;
                objective = cand_obj;
                step = eta;
                accepted = true;
                break;
            }
            eta /= 2.0;
        }
        if !accepted {
            break;
        }
        epochs += 1;
        trace.push(objective);
    }

    Ok(SvmModel {
        weights: w,
        bias: b,
        gamma: params.gamma,
        epochs,
        final_objective: objective,
        objective_trace: trace,
    })
}
