//! Gaussian naive Bayes with instance weights.

use serde::{Deserialize, Serialize};

use super::{ClassifierSpec, WeightedTrainSet};
use crate::Result;

const DEFAULT_SIGMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NbModel {
    log_prior_neg: f64,
    log_prior_pos: f64,
    mean_neg: Vec<f64>,
    mean_pos: Vec<f64>,
    sd_neg: Vec<f64>,
    sd_pos: Vec<f64>,
}

impl NbModel {
    pub fn n_attributes(&self) -> usize {
        self.mean_neg.len()
    }

    /// Posterior probability of the defect-prone class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let ll_neg = self.log_prior_neg + log_likelihood(row, &self.mean_neg, &self.sd_neg);
        let ll_pos = self.log_prior_pos + log_likelihood(row, &self.mean_pos, &self.sd_pos);
        // P(pos | x) = 1 / (1 + exp(ll_neg - ll_pos)), evaluated stably.
        let d = ll_neg - ll_pos;
        if d > 700.0 {
            0.0
        } else if d < -700.0 {
            1.0
        } else {
            1.0 / (1.0 + d.exp())
        }
    }
}

fn log_likelihood(row: &[f64], means: &[f64], sds: &[f64]) -> f64 {
    const LN_SQRT_2PI: f64 = 0.9189385332046727;
    row.iter()
        .zip(means.iter().zip(sds))
        .map(|(&x, (&m, &s))| {
            let z = (x - m) / s;
            -LN_SQRT_2PI - s.ln() - 0.5 * z * z
        })
        .sum()
}

/// Weighted maximum-likelihood estimates per class and attribute. Standard
/// deviations are floored to keep densities finite on constant columns.
pub(super) fn train(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<NbModel> {
    let floor = spec.param("sigma_floor", DEFAULT_SIGMA_FLOOR);
    let m = data.n_attributes();
    let (mass_neg, mass_pos) = data.class_mass();
    let total = mass_neg + mass_pos;

    let mut mean = [vec![0.0; m], vec![0.0; m]];
    for ((row, &label), &w) in data.rows.iter().zip(&data.labels).zip(&data.weights) {
        let acc = &mut mean[usize::from(label)];
        for (j, &x) in row.iter().enumerate() {
            acc[j] += w * x;
        }
    }
    for (c, mass) in [(0, mass_neg), (1, mass_pos)] {
        for v in &mut mean[c] {
            *v /= mass;
        }
    }

    let mut var = [vec![0.0; m], vec![0.0; m]];
    for ((row, &label), &w) in data.rows.iter().zip(&data.labels).zip(&data.weights) {
        let c = usize::from(label);
        for (j, &x) in row.iter().enumerate() {
            let d = x - mean[c][j];
            var[c][j] += w * d * d;
        }
    }
    let mut sd = [vec![0.0; m], vec![0.0; m]];
    for (c, mass) in [(0, mass_neg), (1, mass_pos)] {
        for j in 0..m {
            sd[c][j] = (var[c][j] / mass).sqrt().max(floor);
        }
    }

    Ok(NbModel {
        log_prior_neg: (mass_neg / total).ln(),
        log_prior_pos: (mass_pos / total).ln(),
        mean_neg: std::mem::take(&mut mean[0]),
        mean_pos: std::mem::take(&mut mean[1]),
        sd_neg: std::mem::take(&mut sd[0]),
        sd_pos: std::mem::take(&mut sd[1]),
    })
}
