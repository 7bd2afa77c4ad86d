//! Random forest: bagged threshold trees with per-node attribute
//! subsampling, scored by the fraction of trees voting defect-prone.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, SplitCriterion, TreeNode};
use super::{ClassifierSpec, WeightedTrainSet};
use crate::rng::rng_for;
use crate::Result;

const DEFAULT_TREES: f64 = 100.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub n_attributes: usize,
}

impl ForestModel {
    /// Fraction of trees voting for the defect-prone class. A tree whose
    /// leaf is perfectly mixed contributes half a vote.
    pub fn score(&self, row: &[f64]) -> f64 {
        let votes: f64 = self
            .trees
            .iter()
            .map(|t| {
                let p = t.score(row);
                if p > 0.5 {
                    1.0
                } else if p < 0.5 {
                    0.0
                } else {
                    0.5
                }
            })
            .sum();
        votes / self.trees.len() as f64
    }
}

pub(super) fn train(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<ForestModel> {
    let n_trees = spec.param("trees", DEFAULT_TREES) as usize;
    let m = data.n_attributes();
    let subsample = (((m as f64).log2().floor() as usize) + 1).min(m);
    let n = data.len();

    let trees: Vec<TreeNode> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            // Per-tree stream: bootstrap first, then node-level subsampling,
            // so trees are independent of build order.
            let mut rng = rng_for(spec.seed, &["tree", &t.to_string()]);
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let params = GrowParams {
                criterion: SplitCriterion::InfoGain,
                max_depth: None,
                min_leaf: 1,
                subsample: Some(subsample),
            };
            grow(&data.rows, &data.labels, idx, &params, Some(&mut rng), 0)
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_attributes: m,
    })
}
