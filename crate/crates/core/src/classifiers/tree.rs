//! Binary-threshold decision trees. One grower serves two consumers: the
//! C4.5 style single tree (gain ratio, bounded depth) and random-forest
//! member trees (information gain on a per-node attribute subsample).

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierSpec, WeightedTrainSet};
use crate::rng::rng_for;
use crate::util::binary_entropy;
use crate::Result;

const C45_MAX_DEPTH: f64 = 25.0;
const C45_MIN_LEAF: f64 = 2.0;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Fraction of defect-prone training rows that reached this leaf.
        pos_frac: f64,
    },
    Split {
        attr: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { pos_frac } => return *pos_frac,
                TreeNode::Split {
                    attr,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*attr] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub n_attributes: usize,
}

impl TreeModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.root.score(row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum SplitCriterion {
    GainRatio,
    InfoGain,
}

pub(super) struct GrowParams {
    pub criterion: SplitCriterion,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Number of attributes examined per node; None means all.
    pub subsample: Option<usize>,
}

struct BestSplit {
    attr: usize,
    threshold: f64,
    quality: f64,
}

/// Picks the best threshold split for `attr` over the node rows, or None
/// when no split satisfies the leaf-size constraint with positive gain.
fn best_threshold(
    rows: &[Vec<f64>],
    labels: &[bool],
    idx: &[usize],
    attr: usize,
    params: &GrowParams,
    parent_entropy: f64,
) -> Option<BestSplit> {
    let mut values: Vec<(f64, bool)> = idx.iter().map(|&i| (rows[i][attr], labels[i])).collect();
    values.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite attribute values"));

    let total = values.len() as f64;
    let total_pos = values.iter().filter(|v| v.1).count() as f64;
    let mut best: Option<BestSplit> = None;
    let mut left_n = 0.0;
    let mut left_pos = 0.0;
    for i in 0..values.len() - 1 {
        left_n += 1.0;
        if values[i].1 {
            left_pos += 1.0;
        }
        if values[i].0 == values[i + 1].0 {
            continue;
        }
        let right_n = total - left_n;
        if (left_n as usize) < params.min_leaf || (right_n as usize) < params.min_leaf {
            continue;
        }
        let h_left = binary_entropy(left_pos, left_n);
        let h_right = binary_entropy(total_pos - left_pos, right_n);
        let gain = parent_entropy - (left_n * h_left + right_n * h_right) / total;
        if gain <= MIN_GAIN {
            continue;
        }
        let quality = match params.criterion {
            SplitCriterion::InfoGain => gain,
            SplitCriterion::GainRatio => {
                let split_info = binary_entropy(left_n, total);
                if split_info <= MIN_GAIN {
                    continue;
                }
                gain / split_info
            }
        };
        if best.as_ref().is_none_or(|b| quality > b.quality) {
            best = Some(BestSplit {
                attr,
                threshold: (values[i].0 + values[i + 1].0) / 2.0,
                quality,
            });
        }
    }
    best
}

fn candidate_attrs(m: usize, params: &GrowParams, rng: &mut Option<&mut ChaCha8Rng>) -> Vec<usize> {
    match (params.subsample, rng) {
        (Some(k), Some(rng)) if k < m => {
            use rand::seq::SliceRandom;
            let mut all: Vec<usize> = (0..m).collect();
            let (chosen, _) = all.partial_shuffle(rng, k);
            let mut chosen = chosen.to_vec();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..m).collect(),
    }
}

pub(super) fn grow(
    rows: &[Vec<f64>],
    labels: &[bool],
    idx: Vec<usize>,
    params: &GrowParams,
    mut rng: Option<&mut ChaCha8Rng>,
    depth: usize,
) -> TreeNode {
    let n = idx.len();
    let pos = idx.iter().filter(|&&i| labels[i]).count();
    let leaf = TreeNode::Leaf {
        pos_frac: pos as f64 / n as f64,
    };
    if pos == 0 || pos == n || n < 2 * params.min_leaf {
        return leaf;
    }
    if params.max_depth.is_some_and(|d| depth >= d) {
        return leaf;
    }

    let m = rows[0].len();
    let parent_entropy = binary_entropy(pos as f64, n as f64);
    let attrs = candidate_attrs(m, params, &mut rng);
    let mut best: Option<BestSplit> = None;
    for attr in attrs {
        if let Some(split) = best_threshold(rows, labels, &idx, attr, params, parent_entropy) {
            if best.as_ref().is_none_or(|b| split.quality > b.quality) {
                best = Some(split);
            }
        }
    }
    let Some(split) = best else {
        return leaf;
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .into_iter()
        .partition(|&i| rows[i][split.attr] <= split.threshold);
    let left = grow(rows, labels, left_idx, params, rng.as_deref_mut(), depth + 1);
    let right = grow(rows, labels, right_idx, params, rng, depth + 1);
    TreeNode::Split {
        attr: split.attr,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

pub(super) fn train_c45(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<TreeModel> {
    let params = GrowParams {
        criterion: SplitCriterion::GainRatio,
        max_depth: Some(spec.param("max_depth", C45_MAX_DEPTH) as usize),
        min_leaf: spec.param("min_leaf", C45_MIN_LEAF) as usize,
        subsample: None,
    };
    // Growth is fully deterministic; the rng is unused for a single tree.
    let _ = rng_for(spec.seed, &["c45"]);
    let idx: Vec<usize> = (0..data.len()).collect();
    let root = grow(&data.rows, &data.labels, idx, &params, None, 0);
    Ok(TreeModel {
        root,
        n_attributes: data.n_attributes(),
    })
}
