//! Linear support vector machine trained with sequential minimal
//! optimization (the simplified variant with a random second choice).
//! The linear kernel lets the weight vector be maintained directly, so
//! decision values cost O(m).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierSpec, WeightedTrainSet};
use crate::rng::rng_for;
use crate::Result;

const DEFAULT_C: f64 = 1.0;
const DEFAULT_TOL: f64 = 1e-3;
const DEFAULT_MAX_SWEEPS: f64 = 100_000.0;
/// Consecutive sweeps without an update required to declare convergence.
const CLEAN_SWEEPS: usize = 5;
const MIN_ALPHA_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    /// Signed distance to the separating hyperplane; positive values lie on
    /// the defect-prone side.
    pub fn score(&self, row: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn train(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<SvmModel> {
    let c = spec.param("c", DEFAULT_C);
    let tol = spec.param("tol", DEFAULT_TOL);
    let max_sweeps = spec.param("max_passes", DEFAULT_MAX_SWEEPS) as usize;
    let n = data.len();
    let m = data.n_attributes();
    let y: Vec<f64> = data.labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let self_dot: Vec<f64> = data.rows.iter().map(|r| dot(r, r)).collect();

    let mut rng = rng_for(spec.seed, &["svm"]);
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; m];
    let mut b = 0.0;

    let mut clean = 0usize;
    let mut sweeps = 0usize;
    while clean < CLEAN_SWEEPS && sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let f_i = dot(&w, &data.rows[i]) + b;
            let e_i = f_i - y[i];
            let violates = (y[i] * e_i < -tol && alpha[i] < c) || (y[i] * e_i > tol && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let f_j = dot(&w, &data.rows[j]) + b;
            let e_j = f_j - y[j];

            let (lo, hi) = if y[i] != y[j] {
                ((alpha[j] - alpha[i]).max(0.0), (c + alpha[j] - alpha[i]).min(c))
            } else {
                ((alpha[i] + alpha[j] - c).max(0.0), (alpha[i] + alpha[j]).min(c))
            };
            if lo >= hi {
                continue;
            }
            let k_ij = dot(&data.rows[i], &data.rows[j]);
            let eta = 2.0 * k_ij - self_dot[i] - self_dot[j];
            if eta >= 0.0 {
                continue;
            }
            let alpha_j_old = alpha[j];
            let alpha_i_old = alpha[i];
            let mut a_j = alpha_j_old - y[j] * (e_i - e_j) / eta;
            a_j = a_j.clamp(lo, hi);
            if (a_j - alpha_j_old).abs() < MIN_ALPHA_STEP {
                continue;
            }
            let a_i = alpha_i_old + y[i] * y[j] * (alpha_j_old - a_j);
            alpha[i] = a_i;
            alpha[j] = a_j;

            let di = y[i] * (a_i - alpha_i_old);
            let dj = y[j] * (a_j - alpha_j_old);
            for (wk, (xi, xj)) in w
                .iter_mut()
                .zip(data.rows[i].iter().zip(data.rows[j].iter()))
            {
                *wk += di * xi + dj * xj;
            }

            let b1 = b - e_i - di * self_dot[i] - dj * k_ij;
            let b2 = b - e_j - di * k_ij - dj * self_dot[j];
            b = if a_i > 0.0 && a_i < c {
                b1
            } else if a_j > 0.0 && a_j < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            changed += 1;
        }
        if changed == 0 {
            clean += 1;
        } else {
            clean = 0;
        }
    }
    if sweeps >= max_sweeps {
        log::warn!("svm stopped at the sweep limit ({max_sweeps}) before converging");
    }

    Ok(SvmModel { weights: w, bias: b })
}
