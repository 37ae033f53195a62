//! Binary logistic regression trained by penalized maximum likelihood.
//!
//! Full-batch gradient ascent on the log-likelihood minus an L2 ridge on
//! the weights (intercept unpenalized), with backtracking step halving so
//! the objective never decreases. The small default ridge keeps weights
//! finite on separable data.

use serde::{Deserialize, Serialize};

use super::{check_xy, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    /// Ridge strength on the weights.
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence threshold on the gradient infinity norm.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1e-4,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

/// Fitted model: 13 weights plus intercept for the feature pipeline, any
/// dimension in general.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2: f64,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    /// Objective after every accepted step; not persisted.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let z = self.intercept + dot(&self.weights, x);
        sigmoid(z)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// log(1 + e^z) without overflow.
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Penalized log-likelihood at `theta = [intercept, w_1, .., w_d]`.
pub fn penalized_log_likelihood(theta: &[f64], x: &[Vec<f64>], y: &[u8], l2: f64) -> f64 {
    let (b, w) = theta.split_first().expect("theta holds intercept");
    let mut ll = 0.0;
    for (row, label) in x.iter().zip(y.iter()) {
        let z = b + dot(w, row);
        ll += *label as f64 * z - log1p_exp(z);
    }
    let penalty: f64 = w.iter().map(|v| v * v).sum::<f64>() * l2 / 2.0;
    ll - penalty
}

/// Gradient of [`penalized_log_likelihood`] with respect to `theta`.
/// The intercept component carries no penalty term.
pub fn log_likelihood_gradient(theta: &[f64], x: &[Vec<f64>], y: &[u8], l2: f64) -> Vec<f64> {
    let (b, w) = theta.split_first().expect("theta holds intercept");
    let mut grad = vec![0.0; theta.len()];
    for (row, label) in x.iter().zip(y.iter()) {
        let z = b + dot(w, row);
        let residual = *label as f64 - sigmoid(z);
        grad[0] += residual;
        for (j, v) in row.iter().enumerate() {
            grad[j + 1] += residual * v;
        }
    }
    for (g, wj) in grad.iter_mut().skip(1).zip(w.iter()) {
        *g -= l2 * wj;
    }
    grad
}

/// Trains by gradient ascent with backtracking; the returned trace is
/// non-decreasing by construction.
pub fn train_logreg(
    x: &[Vec<f64>],
    y: &[u8],
    params: &LogRegParams,
) -> Result<LogisticModel, TrainError> {
    let d = check_xy(x, y)?;
    let mut theta = vec![0.0; d + 1];
    let mut objective = penalized_log_likelihood(&theta, x, y, params.l2);
    let mut trace = vec![objective];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..params.max_iter {
        let grad = log_likelihood_gradient(&theta, x, y, params.l2);
        let grad_inf = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_inf < params.tol {
            converged = true;
            break;
        }
        // Backtracking: halve until the objective improves.
        let mut eta = step * 2.0;
        let mut accepted = false;
        while eta > 1e-16 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(grad.iter())
                .map(|(t, g)| t + eta * g)
                .collect();
            let cand_obj = penalized_log_likelihood(&candidate, x, y, params.l2);
            if cand_obj > objective {
                theta = candidate;
                objective = cand_obj;
                step = eta;
                accepted = true;
                break;
            }
            eta /= 2.0;
        }
        iterations += 1;
        if !accepted {
            converged = true;
            break;
        }
        trace.push(objective);
    }

    let (intercept, weights) = theta.split_first().expect("theta holds intercept");
    Ok(LogisticModel {
        weights: weights.to_vec(),
        intercept: *intercept,
        l2: params.l2,
        iterations,
        final_objective: objective,
        converged,
        objective_trace: trace,
    })
}
