//! Single-hidden-layer perceptron trained by online backpropagation on the
//! squared error, with momentum. Inputs are standardized internally and
//! examples are visited in data order, so training is deterministic given
//! the seed used for weight initialization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierSpec, WeightedTrainSet};
use crate::rng::rng_for;
use crate::Result;

const DEFAULT_LEARNING_RATE: f64 = 0.3;
const DEFAULT_MOMENTUM: f64 = 0.2;
const DEFAULT_EPOCHS: f64 = 500.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    norm_mean: Vec<f64>,
    norm_sd: Vec<f64>,
    /// hidden x inputs
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl MlpModel {
    pub fn n_attributes(&self) -> usize {
        self.norm_mean.len()
    }

    /// Activation of the output unit, in (0, 1).
    pub fn score(&self, row: &[f64]) -> f64 {
        let x = self.standardize(row);
        let mut z = self.b2;
        for (h, (wh, bh)) in self.w1.iter().zip(&self.b1).enumerate() {
            let a = sigmoid(bh + dot(wh, &x));
            z += self.w2[h] * a;
        }
        sigmoid(z)
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.norm_mean.iter().zip(&self.norm_sd))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
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

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn train(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<MlpModel> {
    let lr = spec.param("learning_rate", DEFAULT_LEARNING_RATE);
    let momentum = spec.param("momentum", DEFAULT_MOMENTUM);
    let epochs = spec.param("epochs", DEFAULT_EPOCHS) as usize;
    let m = data.n_attributes();
    let hidden = spec.param("hidden", ((m + 2) as f64 / 2.0).ceil()) as usize;

    // Standardization parameters from the training data; constant columns
    // pass through unscaled.
    let n = data.len() as f64;
    let mut mean = vec![0.0; m];
    for row in &data.rows {
        for (j, &x) in row.iter().enumerate() {
            mean[j] += x;
        }
    }
    for v in &mut mean {
        *v /= n;
    }
    let mut sd = vec![0.0; m];
    for row in &data.rows {
        for (j, &x) in row.iter().enumerate() {
            sd[j] += (x - mean[j]) * (x - mean[j]);
        }
    }
    for v in &mut sd {
        *v = (*v / n).sqrt();
        if *v == 0.0 {
            *v = 1.0;
        }
    }
    let x: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(mean.iter().zip(&sd))
                .map(|(&v, (&mu, &s))| (v - mu) / s)
                .collect()
        })
        .collect();
    let t: Vec<f64> = data.labels.iter().map(|&l| f64::from(l)).collect();

    let mut rng = rng_for(spec.seed, &["mlp"]);
    let mut init = || rng.gen_range(-0.5..0.5);
    let mut w1: Vec<Vec<f64>> = (0..hidden).map(|_| (0..m).map(|_| init()).collect()).collect();
    let mut b1: Vec<f64> = (0..hidden).map(|_| init()).collect();
    let mut w2: Vec<f64> = (0..hidden).map(|_| init()).collect();
    let mut b2: f64 = init();

    let mut v_w1 = vec![vec![0.0; m]; hidden];
    let mut v_b1 = vec![0.0; hidden];
    let mut v_w2 = vec![0.0; hidden];
    let mut v_b2 = 0.0;
    let mut act = vec![0.0; hidden];

    for _ in 0..epochs {
        for (xi, &ti) in x.iter().zip(&t) {
            for h in 0..hidden {
                act[h] = sigmoid(b1[h] + dot(&w1[h], xi));
            }
            let out = sigmoid(b2 + dot(&w2, &act));
            let delta_out = (ti - out) * out * (1.0 - out);

            for h in 0..hidden {
                let delta_h = act[h] * (1.0 - act[h]) * w2[h] * delta_out;
                v_w2[h] = lr * delta_out * act[h] + momentum * v_w2[h];
                w2[h] += v_w2[h];
                v_b1[h] = lr * delta_h + momentum * v_b1[h];
                b1[h] += v_b1[h];
                for (vw, (wj, xj)) in v_w1[h].iter_mut().zip(w1[h].iter_mut().zip(xi)) {
                    *vw = lr * delta_h * xj + momentum * *vw;
                    *wj += *vw;
                }
            }
            v_b2 = lr * delta_out + momentum * v_b2;
            b2 += v_b2;
        }
    }

    Ok(MlpModel {
        norm_mean: mean,
        norm_sd: sd,
        w1,
        b1,
        w2,
        b2,
    })
}
