//! Logistic regression trained by full-batch gradient descent.
//!
//! Deterministic: weights start at zero and the data order fixes every
//! update. The intercept is not regularized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.raw_score(row) > 0.0
    }

    fn raw_score(&self, row: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { learning_rate: 0.5, epochs: 500, l2: 1e-4 }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `-[y ln p + (1-y) ln(1-p)]` for `p = sigmoid(z)`:
/// `ln(1 + exp(z)) - y z`, computed without overflow.
fn cross_entropy(z: f64, y: f64) -> f64 {
    let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    softplus - y * z
}

/// Mean cross-entropy plus (l2/2)·‖w‖².
pub fn log_loss(weights: &[f64], intercept: f64, x: &[Vec<f64>], y: &[bool], l2: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &label)| {
            let z = intercept + weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>();
            cross_entropy(z, label as u8 as f64)
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Loss and its analytic gradient at the given parameters.
pub fn loss_and_gradient(
    weights: &[f64],
    intercept: f64,
    x: &[Vec<f64>],
    y: &[bool],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = intercept + weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>();
        let residual = sigmoid(z) - label as u8 as f64;
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    grad_b /= n;
    (log_loss(weights, intercept, x, y, l2), grad_w, grad_b)
}

pub fn train_logistic(x: &[Vec<f64>], y: &[bool], opts: TrainOptions) -> Result<LogisticModel> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!(
            "matrix rows ({}) must match labels ({}) and be non-empty",
            x.len(),
            y.len()
        )));
    }
    let dims = x[0].len();
    if x.iter().any(|row| row.len() != dims) {
        return Err(Error::InvalidInput("ragged feature matrix".into()));
    }
    let mut weights = vec![0.0; dims];
    let mut intercept = 0.0;
    for epoch in 0..opts.epochs {
        let (loss, grad_w, grad_b) = loss_and_gradient(&weights, intercept, x, y, opts.l2);
        if !loss.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite loss {loss} at epoch {epoch}; reduce the learning rate"
            )));
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= opts.learning_rate * g;
        }
        intercept -= opts.learning_rate * grad_b;
    }
    Ok(LogisticModel { weights, intercept })
}

/// Convert boolean feature rows to the f64 matrix the learners consume.
pub fn to_f64_matrix(rows: &[Vec<bool>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|&b| b as u8 as f64).collect())
        .collect()
}
