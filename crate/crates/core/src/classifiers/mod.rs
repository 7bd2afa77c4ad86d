//! Native classifier implementations.
//!
//! Six kinds are supported: Gaussian naive Bayes, random forest, a C4.5
//! style decision tree, an SMO-trained linear support vector machine, a
//! single-hidden-layer MLP, and ridge-stabilized logistic regression.
//! Every model exposes one operation, `score`, returning a real value where
//! higher means more defect-prone. Only naive Bayes consumes instance
//! weights natively; the other kinds reject non-uniform weights.

mod forest;
mod logistic;
mod mlp;
mod nb;
mod svm;
mod tree;

pub use forest::ForestModel;
pub use logistic::LogisticModel;
pub use mlp::MlpModel;
pub use nb::NbModel;
pub use svm::SvmModel;
pub use tree::{TreeModel, TreeNode};

use std::collections::BTreeMap;

use crate::rng::rng_for;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifierKind {
    C45,
    Rf,
    Svm,
    Mlp,
    Nb,
    Logistic,
}

impl ClassifierKind {
    pub fn id(&self) -> &'static str {
        match self {
            ClassifierKind::C45 => "c45",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Nb => "nb",
            ClassifierKind::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "c45" => Ok(ClassifierKind::C45),
            "rf" => Ok(ClassifierKind::Rf),
            "svm" => Ok(ClassifierKind::Svm),
            "mlp" => Ok(ClassifierKind::Mlp),
            "nb" => Ok(ClassifierKind::Nb),
            "logistic" => Ok(ClassifierKind::Logistic),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }

    /// The five kinds paired with transfer solutions in the comparison.
    pub fn comparison_kinds() -> [ClassifierKind; 5] {
        [
            ClassifierKind::C45,
            ClassifierKind::Rf,
            ClassifierKind::Svm,
            ClassifierKind::Mlp,
            ClassifierKind::Nb,
        ]
    }
}

/// A classifier kind plus seed and hyperparameter overrides. Defaults are
/// fixed per kind; `params` only overrides individual values.
#[derive(Debug, Clone)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub(crate) fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

/// Training rows with per-instance weights.
#[derive(Debug, Clone)]
pub struct WeightedTrainSet {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
    pub weights: Vec<f64>,
}

impl WeightedTrainSet {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>, weights: Vec<f64>) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != weights.len() {
            return Err(Error::Data(format!(
                "training set size mismatch: {} rows, {} labels, {} weights",
                rows.len(),
                labels.len(),
                weights.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::DegenerateTraining("empty training set".into()));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::Data("training rows have no attributes".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Data(format!(
                    "training row {i} has {} attributes, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "training row {i} contains a non-finite value"
                )));
            }
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Data(format!(
                "weight {} at index {i} is not a finite non-negative number",
                weights[i]
            )));
        }
        Ok(Self {
            rows,
            labels,
            weights,
        })
    }

    pub fn unweighted(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        let n = rows.len();
        Self::new(rows, labels, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    /// Weight mass per class `(negative, positive)`.
    pub fn class_mass(&self) -> (f64, f64) {
        let mut mass = (0.0, 0.0);
        for (&label, &w) in self.labels.iter().zip(&self.weights) {
            if label {
                mass.1 += w;
            } else {
                mass.0 += w;
            }
        }
        mass
    }
}

/// A fitted model. Scoring never mutates, so models are freely shareable
/// across threads.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Nb(NbModel),
    Forest(ForestModel),
    Tree(TreeModel),
    Svm(SvmModel),
    Mlp(MlpModel),
    Logistic(LogisticModel),
}

impl TrainedModel {
    /// Defect-proneness score for one row; higher means more defect-prone.
    pub fn score(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Nb(m) => m.score(row),
            TrainedModel::Forest(m) => m.score(row),
            TrainedModel::Tree(m) => m.score(row),
            TrainedModel::Svm(m) => m.score(row),
            TrainedModel::Mlp(m) => m.score(row),
            TrainedModel::Logistic(m) => m.score(row),
        }
    }

    pub fn score_all(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.score(r)).collect()
    }

    pub fn n_attributes(&self) -> usize {
        match self {
            TrainedModel::Nb(m) => m.n_attributes(),
            TrainedModel::Forest(m) => m.n_attributes,
            TrainedModel::Tree(m) => m.n_attributes,
            TrainedModel::Svm(m) => m.weights.len(),
            TrainedModel::Mlp(m) => m.n_attributes(),
            TrainedModel::Logistic(m) => m.weights.len(),
        }
    }
}

/// Trains a model of the requested kind.
pub fn train(spec: &ClassifierSpec, data: &WeightedTrainSet) -> Result<TrainedModel> {
    let (neg, pos) = data.class_mass();
    if neg <= 0.0 || pos <= 0.0 {
        return Err(Error::DegenerateTraining(format!(
            "{} requires positive weight in both classes (negative mass {neg}, positive mass {pos})",
            spec.kind.id()
        )));
    }
    if spec.kind != ClassifierKind::Nb && !data.is_uniform() {
        return Err(Error::Config(format!(
            "classifier `{}` does not support instance weights; only `nb` trains weighted",
            spec.kind.id()
        )));
    }
    match spec.kind {
        ClassifierKind::Nb => nb::train(spec, data).map(TrainedModel::Nb),
        ClassifierKind::Rf => forest::train(spec, data).map(TrainedModel::Forest),
        ClassifierKind::C45 => tree::train_c45(spec, data).map(TrainedModel::Tree),
        ClassifierKind::Svm => svm::train(spec, data).map(TrainedModel::Svm),
        ClassifierKind::Mlp => mlp::train(spec, data).map(TrainedModel::Mlp),
        ClassifierKind::Logistic => logistic::train(spec, data).map(TrainedModel::Logistic),
    }
}

/// How well a logistic model can tell rows of `a` from rows of `b`,
/// estimated by stratified two-fold cross-validation. Values near 0.5 mean
/// the two samples are practically indistinguishable.
pub fn separability_accuracy(a: &[Vec<f64>], b: &[Vec<f64>], seed: u64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Data(
            "separability requires two non-empty samples".into(),
        ));
    }
    let width = a[0].len();
    if a.iter().chain(b.iter()).any(|r| r.len() != width) {
        return Err(Error::Data(
            "separability samples must share one attribute width".into(),
        ));
    }

    use rand::seq::SliceRandom;
    let mut rng = rng_for(seed, &["separability"]);

    // Stratified fold assignment: split each class roughly in half.
    let mut fold_of = vec![0u8; a.len() + b.len()];
    for (offset, len) in [(0usize, a.len()), (a.len(), b.len())] {
        let mut idx: Vec<usize> = (0..len).collect();
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold_of[offset + i] = (pos % 2) as u8;
        }
    }

    let row_of = |i: usize| -> &Vec<f64> {
        if i < a.len() {
            &a[i]
        } else {
            &b[i - a.len()]
        }
    };
    let label_of = |i: usize| i >= a.len();

    let n = a.len() + b.len();
    let mut correct = 0usize;
    for eval_fold in 0..2u8 {
        let train_idx: Vec<usize> = (0..n).filter(|&i| fold_of[i] != eval_fold).collect();
        let test_idx: Vec<usize> = (0..n).filter(|&i| fold_of[i] == eval_fold).collect();
        if test_idx.is_empty() {
            continue;
        }
        let train_labels: Vec<bool> = train_idx.iter().map(|&i| label_of(i)).collect();
        let single_class = train_labels.windows(2).all(|w| w[0] == w[1]);
        if train_idx.is_empty() || single_class {
            // Fall back to the majority class of the whole sample.
            let majority = b.len() >= a.len();
            correct += test_idx.iter().filter(|&&i| label_of(i) == majority).count();
            continue;
        }
        let rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| row_of(i).clone()).collect();
        let spec = ClassifierSpec::new(
            ClassifierKind::Logistic,
            crate::rng::derive_seed(seed, &["separability-fold", &eval_fold.to_string()]),
        );
        let model = train(&spec, &WeightedTrainSet::unweighted(rows, train_labels)?)?;
        for &i in &test_idx {
            let predicted = model.score(row_of(i)) > 0.5;
            if predicted == label_of(i) {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::auc;
    use crate::rng::rng_for;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn blob(center: &[f64], n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                center
                    .iter()
                    .map(|&c| c + spread * (rng.gen::<f64>() - 0.5))
                    .collect()
            })
            .collect()
    }

    fn two_blob_set(n_per_side: usize) -> WeightedTrainSet {
        let mut rng = rng_for(7, &["blob"]);
        let mut rows = blob(&[0.0, 0.0], n_per_side, 1.0, &mut rng);
        rows.extend(blob(&[4.0, 4.0], n_per_side, 1.0, &mut rng));
        let labels: Vec<bool> = (0..2 * n_per_side).map(|i| i >= n_per_side).collect();
        WeightedTrainSet::unweighted(rows, labels).unwrap()
    }

    fn train_auc(kind: ClassifierKind, data: &WeightedTrainSet) -> f64 {
        let model = train(&ClassifierSpec::new(kind, 11), data).unwrap();
        auc(&model.score_all(&data.rows), &data.labels).unwrap()
    }

    #[test]
    fn nb_posterior_matches_hand_computation() {
        let data = WeightedTrainSet::unweighted(
            vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]],
            vec![false, false, true, true],
        )
        .unwrap();
        let model = train(&ClassifierSpec::new(ClassifierKind::Nb, 1), &data).unwrap();
        // Class means 0.5 and 10.5, both sds 0.5: the midpoint of the
        // positive class is overwhelmingly positive.
        assert!(model.score(&[10.5]) > 0.999, "deep in the positive class");
        assert!(model.score(&[0.5]) < 0.001, "deep in the negative class");
    }

    #[test]
    fn nb_is_invariant_to_weight_scaling() {
        let rows = vec![vec![0.0], vec![1.0], vec![9.0], vec![11.0]];
        let labels = vec![false, false, true, true];
        let a = WeightedTrainSet::new(rows.clone(), labels.clone(), vec![1.0; 4]).unwrap();
        let b = WeightedTrainSet::new(rows, labels, vec![3.0; 4]).unwrap();
        let spec = ClassifierSpec::new(ClassifierKind::Nb, 1);
        let ma = train(&spec, &a).unwrap();
        let mb = train(&spec, &b).unwrap();
        for x in [0.0, 0.5, 5.0, 10.0] {
            assert!(
                (ma.score(&[x]) - mb.score(&[x])).abs() < 1e-12,
                "scaled weights changed the posterior at {x}"
            );
        }
    }

    #[test]
    fn nb_doubled_weight_equals_duplicated_row() {
        let weighted = WeightedTrainSet::new(
            vec![vec![0.0], vec![1.0], vec![10.0]],
            vec![false, false, true],
            vec![1.0, 2.0, 1.0],
        )
        .unwrap();
        let duplicated = WeightedTrainSet::unweighted(
            vec![vec![0.0], vec![1.0], vec![1.0], vec![10.0]],
            vec![false, false, false, true],
        )
        .unwrap();
        let spec = ClassifierSpec::new(ClassifierKind::Nb, 1);
        let mw = train(&spec, &weighted).unwrap();
        let md = train(&spec, &duplicated).unwrap();
        for x in [0.0, 2.0, 6.0, 12.0] {
            assert!(
                (mw.score(&[x]) - md.score(&[x])).abs() < 1e-12,
                "weight 2 differs from duplication at {x}"
            );
        }
    }

    #[test]
    fn single_class_training_is_degenerate_for_every_kind() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![true, true, true];
        for kind in [
            ClassifierKind::C45,
            ClassifierKind::Rf,
            ClassifierKind::Svm,
            ClassifierKind::Mlp,
            ClassifierKind::Nb,
            ClassifierKind::Logistic,
        ] {
            let data = WeightedTrainSet::unweighted(rows.clone(), labels.clone()).unwrap();
            let err = train(&ClassifierSpec::new(kind, 1), &data).unwrap_err();
            assert!(
                matches!(err, crate::Error::DegenerateTraining(_)),
                "{kind:?} accepted single-class data: {err}"
            );
        }
    }

    #[test]
    fn only_nb_accepts_non_uniform_weights() {
        let rows = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let labels = vec![false, false, true, true];
        let weights = vec![1.0, 2.0, 1.0, 1.0];
        for kind in [
            ClassifierKind::C45,
            ClassifierKind::Rf,
            ClassifierKind::Svm,
            ClassifierKind::Mlp,
            ClassifierKind::Logistic,
        ] {
            let data =
                WeightedTrainSet::new(rows.clone(), labels.clone(), weights.clone()).unwrap();
            let err = train(&ClassifierSpec::new(kind, 1), &data).unwrap_err();
            assert!(
                matches!(err, crate::Error::Config(_)),
                "{kind:?} should reject instance weights: {err}"
            );
        }
        let data = WeightedTrainSet::new(rows, labels, weights).unwrap();
        assert!(train(&ClassifierSpec::new(ClassifierKind::Nb, 1), &data).is_ok());
    }

    #[test]
    fn linear_kinds_separate_two_blobs() {
        let data = two_blob_set(30);
        for kind in [
            ClassifierKind::Svm,
            ClassifierKind::Logistic,
            ClassifierKind::Nb,
        ] {
            let value = train_auc(kind, &data);
            assert!(value > 0.999, "{kind:?} train auc {value} on separable blobs");
        }
    }

    #[test]
    fn tree_kinds_separate_two_blobs() {
        let data = two_blob_set(30);
        for kind in [ClassifierKind::C45, ClassifierKind::Rf] {
            let value = train_auc(kind, &data);
            assert!(value > 0.99, "{kind:?} train auc {value} on separable blobs");
        }
    }

    #[test]
    fn mlp_separates_two_blobs() {
        let data = two_blob_set(30);
        let value = train_auc(ClassifierKind::Mlp, &data);
        assert!(value > 0.99, "mlp train auc {value} on separable blobs");
    }

    #[test]
    fn c45_learns_xor() {
        let mut rng = rng_for(3, &["xor"]);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (cx, cy, label) in [
            (0.0, 0.0, false),
            (0.0, 1.0, true),
            (1.0, 0.0, true),
            (1.0, 1.0, false),
        ] {
            rows.extend(blob(&[cx, cy], 6, 0.2, &mut rng));
            labels.extend(std::iter::repeat(label).take(6));
        }
        let data = WeightedTrainSet::unweighted(rows, labels).unwrap();
        let tree = train_auc(ClassifierKind::C45, &data);
        let linear = train_auc(ClassifierKind::Logistic, &data);
        assert!(tree > 0.95, "c45 train auc {tree} on xor corners");
        assert!(linear < 0.7, "a linear model should fail xor, got {linear}");
    }

    #[test]
    fn forest_is_deterministic_for_a_seed() {
        let data = two_blob_set(20);
        let spec = ClassifierSpec::new(ClassifierKind::Rf, 42);
        let a = train(&spec, &data).unwrap().score_all(&data.rows);
        let b = train(&spec, &data).unwrap().score_all(&data.rows);
        assert_eq!(a, b, "same seed must give identical forests");
    }

    #[test]
    fn svm_orients_the_margin_correctly() {
        let data = two_blob_set(20);
        let model = train(&ClassifierSpec::new(ClassifierKind::Svm, 5), &data).unwrap();
        assert!(
            model.score(&[4.0, 4.0]) > model.score(&[0.0, 0.0]),
            "positive blob must score higher"
        );
    }

    #[test]
    fn separability_of_identical_sources_is_near_chance() {
        let mut rng = rng_for(9, &["sep"]);
        let a = blob(&[0.0, 0.0, 0.0], 100, 2.0, &mut rng);
        let value = separability_accuracy(&a, &a, 17).unwrap();
        assert!(
            (value - 0.5).abs() <= 0.1,
            "identical sources should be indistinguishable, got {value}"
        );
    }

    #[test]
    fn separability_of_disjoint_sources_is_high() {
        let mut rng = rng_for(9, &["sep2"]);
        let a = blob(&[0.0, 0.0], 60, 1.0, &mut rng);
        let b = blob(&[10.0, 10.0], 60, 1.0, &mut rng);
        let value = separability_accuracy(&a, &b, 17).unwrap();
        assert!(value >= 0.95, "disjoint sources should separate, got {value}");
    }

    #[test]
    fn kind_ids_round_trip() {
        for kind in [
            ClassifierKind::C45,
            ClassifierKind::Rf,
            ClassifierKind::Svm,
            ClassifierKind::Mlp,
            ClassifierKind::Nb,
            ClassifierKind::Logistic,
        ] {
            assert_eq!(ClassifierKind::parse(kind.id()).unwrap(), kind);
        }
        assert!(ClassifierKind::parse("knn").is_err());
    }
}
