//! Logistic regression fitted by iteratively reweighted least squares with
//! a tiny ridge penalty for numerical stability.

use serde::{Deserialize, Serialize};

use super::{ClassifierSpec, WeightedTrainSet};
use crate::util::solve_linear;
use crate::Result;

const DEFAULT_RIDGE: f64 = 1e-8;
const DEFAULT_MAX_ITER: f64 = 100.0;
const CONVERGENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    /// Probability of the defect-prone class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let z = self.intercept
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>();
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z > 700.0 {
        1.0
    } else if z < -700.0 {
        0.0
    } else {
        1.0 / (1.0 + (-z).exp())
    }
}

pub(super) fn train(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<LogisticModel> {
    let ridge = spec.param("ridge", DEFAULT_RIDGE);
    let max_iter = spec.param("max_iter", DEFAULT_MAX_ITER) as usize;
    let n = data.len();
    let m = data.n_attributes();
    let dim = m + 1; // attribute weights plus intercept in slot m

    let mut beta = vec![0.0; dim];
    for _ in 0..max_iter {
        // Newton step on the ridge-penalized log-likelihood.
        let mut grad = vec![0.0; dim];
        let mut hess = vec![vec![0.0; dim]; dim];
        for i in 0..n {
            let row = &data.rows[i];
            let z = beta[m]
                + row
                    .iter()
                    .zip(&beta[..m])
                    .map(|(x, b)| x * b)
                    .sum::<f64>();
            let p = sigmoid(z);
            let y = f64::from(data.labels[i]);
            let r = y - p;
            let w = (p * (1.0 - p)).max(1e-10);
            for j in 0..dim {
                let xj = if j == m { 1.0 } else { row[j] };
                grad[j] += xj * r;
                for k in j..dim {
                    let xk = if k == m { 1.0 } else { row[k] };
                    hess[j][k] += w * xj * xk;
                }
            }
        }
        for j in 0..dim {
            grad[j] -= ridge * beta[j];
            hess[j][j] += ridge;
            for k in 0..j {
                hess[j][k] = hess[k][j];
            }
        }
        let Some(step) = solve_linear(hess, grad) else {
            break;
        };
        let mut max_delta: f64 = 0.0;
        for j in 0..dim {
            beta[j] += step[j];
            max_delta = max_delta.max(step[j].abs());
        }
        if max_delta < CONVERGENCE_TOL {
            break;
        }
        // Separable data drives coefficients to infinity; once the decision
        // boundary stops moving meaningfully there is nothing left to fit.
        if max_delta > 1e6 {
            break;
        }
    }

    let intercept = beta.pop().expect("beta holds intercept");
    Ok(LogisticModel {
        weights: beta,
        intercept,
    })
}
