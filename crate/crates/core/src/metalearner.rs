//! Method recommendation via meta-learning.
//!
//! Each dataset becomes one multi-label meta-example: its meta-features
//! plus the set of methods that attain the dataset's best rounded AUC among
//! a fixed label universe. A binary-relevance random forest per label
//! yields confidences; the recommendation is the argmax. Feature subsets
//! are chosen by a best-first forward wrapper scored with an internal
//! leave-one-project-out pass, and the whole recommender is evaluated the
//! same way: the fold for a project never trains on any of its versions.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierKind, ClassifierSpec, ForestModel, TrainedModel, WeightedTrainSet};
use crate::data::DefectDataset;
use crate::evaluation::PerformanceTable;
use crate::metafeatures::{extract, MetaFeatureVector, MetaSetKind};
use crate::rng::{derive_seed, rng_for};
use crate::{Error, Result};

/// Default label universe: the methods that topped the base-level
/// comparison, in tie-break order.
pub const DEFAULT_LABELS: [&str; 4] = ["2012Ma_nb", "2013He_rf", "2009Turhan_nb", "2013He_svm"];

/// One dataset as seen by the meta-learner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaExample {
    pub dataset_id: String,
    pub project: String,
    pub features: Vec<f64>,
    /// Indices into the label universe of every method attaining the
    /// dataset's best rounded AUC.
    pub labels: BTreeSet<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaDataset {
    pub feature_names: Vec<String>,
    pub label_universe: Vec<String>,
    pub examples: Vec<MetaExample>,
}

impl MetaDataset {
    pub fn n_labels(&self) -> usize {
        self.label_universe.len()
    }

    /// Projects in order of first appearance.
    pub fn projects(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.examples {
            if !out.contains(&e.project) {
                out.push(e.project.clone());
            }
        }
        out
    }
}

/// Label sets per table row: every universe method whose rounded AUC
/// equals the row maximum over the universe.
pub fn build_meta_targets(
    table: &PerformanceTable,
    labels: &[String],
) -> Result<Vec<BTreeSet<usize>>> {
    let cols: Vec<usize> = labels
        .iter()
        .map(|l| {
            table
                .method_index(l)
                .ok_or_else(|| Error::Config(format!("label method `{l}` is not in the table")))
        })
        .collect::<Result<Vec<_>>>()?;
    let rounded = table.rounded();
    let mut out = Vec::with_capacity(table.n_datasets());
    for (i, row) in rounded.iter().enumerate() {
        let vals: Vec<i64> = cols
            .iter()
            .map(|&j| {
                row[j].ok_or_else(|| {
                    Error::Data(format!(
                        "dataset {} has no defined auc for {}",
                        table.dataset_ids[i], table.method_ids[j]
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let best = *vals.iter().max().expect("non-empty universe");
        out.push(
            vals.iter()
                .enumerate()
                .filter(|&(_, &v)| v == best)
                .map(|(l, _)| l)
                .collect(),
        );
    }
    Ok(out)
}

/// Builds the meta-dataset: one example per table row, with features
/// extracted from the corresponding dataset.
pub fn assemble_meta_dataset(
    datasets: &[DefectDataset],
    table: &PerformanceTable,
    kind: MetaSetKind,
    labels: &[String],
    seed: u64,
) -> Result<MetaDataset> {
    let targets = build_meta_targets(table, labels)?;
    let mut feature_names = None;
    let mut examples = Vec::with_capacity(table.n_datasets());
    for (i, id) in table.dataset_ids.iter().enumerate() {
        let d = datasets
            .iter()
            .find(|d| &d.id() == id)
            .ok_or_else(|| Error::Config(format!("table dataset {id} is not loaded")))?;
        let fv = extract(d, kind, derive_seed(seed, &["metafeatures", id]))?;
        if feature_names.is_none() {
            feature_names = Some(fv.names.clone());
        }
        examples.push(MetaExample {
            dataset_id: id.clone(),
            project: d.project.clone(),
            features: fv.values,
            labels: targets[i].clone(),
        });
    }
    Ok(MetaDataset {
        feature_names: feature_names.expect("at least one dataset"),
        label_universe: labels.to_vec(),
        examples,
    })
}

/// Column-wise z-score parameters fitted on training features only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Normalization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Normalization {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let n = rows.len().max(1) as f64;
        let m = rows.first().map_or(0, |r| r.len());
        let mut means = vec![0.0; m];
        for row in rows {
            for (j, &x) in row.iter().enumerate() {
                means[j] += x;
            }
        }
        for v in &mut means {
            *v /= n;
        }
        let mut sds = vec![0.0; m];
        for row in rows {
            for (j, &x) in row.iter().enumerate() {
                sds[j] += (x - means[j]) * (x - means[j]);
            }
        }
        for v in &mut sds {
            *v = (*v / n).sqrt();
            if *v == 0.0 {
                *v = 1.0; // constant feature: pass through centered
            }
        }
        Self { means, sds }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }
}

/// Duplicates randomly chosen minority examples until the classes balance
/// exactly. The originals are always a prefix of the result.
pub fn oversample(
    rows: &[Vec<f64>],
    labels: &[bool],
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<bool>) {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let mut out_rows = rows.to_vec();
    let mut out_labels = labels.to_vec();
    if pos.is_empty() || neg.is_empty() || pos.len() == neg.len() {
        return (out_rows, out_labels);
    }
    let (minority, deficit) = if pos.len() < neg.len() {
        (&pos, neg.len() - pos.len())
    } else {
        (&neg, pos.len() - neg.len())
    };
    for _ in 0..deficit {
        let i = minority[rng.gen_range(0..minority.len())];
        out_rows.push(rows[i].clone());
        out_labels.push(labels[i]);
    }
    (out_rows, out_labels)
}

/// Per-label model of the binary-relevance decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum LabelModel {
    /// Single-class training data: the confidence is the class prior.
    Constant(f64),
    Forest(ForestModel),
}

impl LabelModel {
    fn confidence(&self, row: &[f64]) -> f64 {
        match self {
            LabelModel::Constant(c) => *c,
            LabelModel::Forest(f) => f.score(row),
        }
    }
}

pub const META_MODEL_FORMAT: &str = "cpdp-meta-model";
pub const META_MODEL_VERSION: u32 = 1;

/// A trained recommender: normalization, the selected feature subset, and
/// one model per label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaModel {
    pub format: String,
    pub version: u32,
    pub meta_set: MetaSetKind,
    pub extraction_seed: u64,
    pub label_universe: Vec<String>,
    pub subset: Vec<String>,
    pub normalization: Normalization,
    pub per_label: Vec<LabelModel>,
}

fn subset_indices(names: &[String], subset: &[String]) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|s| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::MissingFeature(s.clone()))
        })
        .collect()
}

/// Trains the recommender on all examples of `md`, restricted to the given
/// feature subset.
pub fn train_meta(md: &MetaDataset, subset: &[String], seed: u64) -> Result<MetaModel> {
    if md.examples.is_empty() {
        return Err(Error::Data("meta-dataset has no examples".into()));
    }
    if subset.is_empty() {
        return Err(Error::Config("feature subset must not be empty".into()));
    }
    let idx = subset_indices(&md.feature_names, subset)?;
    let rows: Vec<Vec<f64>> = md
        .examples
        .iter()
        .map(|e| idx.iter().map(|&j| e.features[j]).collect())
        .collect();
    let normalization = Normalization::fit(&rows);
    let normalized = normalization.apply(&rows);

    let mut per_label = Vec::with_capacity(md.n_labels());
    for l in 0..md.n_labels() {
        let labels: Vec<bool> = md.examples.iter().map(|e| e.labels.contains(&l)).collect();
        let positives = labels.iter().filter(|&&b| b).count();
        if positives == 0 || positives == labels.len() {
            per_label.push(LabelModel::Constant(positives as f64 / labels.len() as f64));
            continue;
        }
        let mut rng = rng_for(seed, &["oversample", &l.to_string()]);
        let (os_rows, os_labels) = oversample(&normalized, &labels, &mut rng);
        let spec = ClassifierSpec::new(
            ClassifierKind::Rf,
            derive_seed(seed, &["label-forest", &l.to_string()]),
        );
        let model = train(&spec, &WeightedTrainSet::unweighted(os_rows, os_labels)?)?;
        let TrainedModel::Forest(forest) = model else {
            unreachable!("rf training returns a forest");
        };
        per_label.push(LabelModel::Forest(forest));
    }

    Ok(MetaModel {
        format: META_MODEL_FORMAT.to_string(),
        version: META_MODEL_VERSION,
        meta_set: MetaSetKind::Dist,
        extraction_seed: 0,
        label_universe: md.label_universe.clone(),
        subset: subset.to_vec(),
        normalization,
        per_label,
    })
}

/// Per-label confidences for a full named feature vector.
pub fn confidences(model: &MetaModel, features: &MetaFeatureVector) -> Result<Vec<f64>> {
    let raw: Vec<f64> = model
        .subset
        .iter()
        .map(|name| {
            features
                .get(name)
                .ok_or_else(|| Error::MissingFeature(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let row = model.normalization.apply_row(&raw);
    Ok(model.per_label.iter().map(|m| m.confidence(&row)).collect())
}

/// Index of the winning label; confidence ties break toward the earlier
/// universe position.
pub fn argmax_label(confs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in confs.iter().enumerate().skip(1) {
        if c > confs[best] {
            best = i;
        }
    }
    best
}

/// Recommends a method for a feature vector: the label with the highest
/// confidence.
pub fn recommend(model: &MetaModel, features: &MetaFeatureVector) -> Result<(String, Vec<f64>)> {
    let confs = confidences(model, features)?;
    let idx = argmax_label(&confs);
    Ok((model.label_universe[idx].clone(), confs))
}

/// Fraction of predictions whose top label is not in the true label set.
pub fn one_error(predicted: &[usize], truth: &[BTreeSet<usize>]) -> f64 {
    assert_eq!(predicted.len(), truth.len(), "prediction/truth length mismatch");
    if predicted.is_empty() {
        return 0.0;
    }
    let misses = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| !t.contains(p))
        .count();
    misses as f64 / predicted.len() as f64
}

/// The label contained in the most label sets; ties break toward the
/// earlier universe position.
pub fn majority_label(md: &MetaDataset) -> usize {
    let mut counts = vec![0usize; md.n_labels()];
    for e in &md.examples {
        for &l in &e.labels {
            counts[l] += 1;
        }
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn restrict(md: &MetaDataset, keep: impl Fn(&MetaExample) -> bool) -> MetaDataset {
    MetaDataset {
        feature_names: md.feature_names.clone(),
        label_universe: md.label_universe.clone(),
        examples: md.examples.iter().filter(|e| keep(e)).cloned().collect(),
    }
}

fn recommend_for_example(model: &MetaModel, md: &MetaDataset, e: &MetaExample) -> Result<Vec<f64>> {
    let fv = MetaFeatureVector {
        names: md.feature_names.clone(),
        values: e.features.clone(),
    };
    confidences(model, &fv)
}

/// Accuracy of a feature subset under internal leave-one-project-out
/// cross-validation: for every project, a model trained without any of its
/// versions recommends for each version; accuracy is the fraction of
/// recommendations contained in the version's label set.
pub fn cploo_accuracy(md: &MetaDataset, subset: &[String], seed: u64) -> Result<f64> {
    let projects = md.projects();
    if projects.len() < 2 {
        return Err(Error::Config(
            "internal cross-validation needs at least two projects".into(),
        ));
    }
    let mut correct = 0usize;
    let mut total = 0usize;
    for project in &projects {
        let train_md = restrict(md, |e| &e.project != project);
        if train_md.examples.is_empty() {
            continue;
        }
        let model = train_meta(&train_md, subset, derive_seed(seed, &["fold", project]))?;
        for e in md.examples.iter().filter(|e| &e.project == project) {
            let confs = recommend_for_example(&model, md, e)?;
            if e.labels.contains(&argmax_label(&confs)) {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(correct as f64 / total.max(1) as f64)
}

#[derive(Debug, Clone)]
pub struct WrapperResult {
    pub subset: Vec<String>,
    pub accuracy: f64,
    /// Number of candidate subsets evaluated.
    pub evaluated: usize,
}

const WRAPPER_STALL_LIMIT: usize = 5;
const WRAPPER_MAX_SUBSET: usize = 10;

/// Candidate ordering: higher accuracy first, then smaller subsets, then
/// lexicographically earlier feature lists.
fn better(
    acc_a: f64,
    subset_a: &[usize],
    acc_b: f64,
    subset_b: &[usize],
    names: &[String],
) -> bool {
    if acc_a != acc_b {
        return acc_a > acc_b;
    }
    if subset_a.len() != subset_b.len() {
        return subset_a.len() < subset_b.len();
    }
    let a: Vec<&String> = subset_a.iter().map(|&i| &names[i]).collect();
    let b: Vec<&String> = subset_b.iter().map(|&i| &names[i]).collect();
    a < b
}

/// Best-first forward feature selection scored by `cploo_accuracy`. The
/// search expands the most promising open subset, stops after five
/// consecutive expansions that fail to improve the best accuracy, and
/// never grows subsets beyond ten features.
pub fn best_first_wrapper(md: &MetaDataset, seed: u64) -> Result<WrapperResult> {
    let names = &md.feature_names;
    let m = names.len();
    if m == 0 {
        return Err(Error::Data("meta-dataset has no features".into()));
    }

    let eval = |subset: &[usize]| -> Result<f64> {
        let subset_names: Vec<String> = subset.iter().map(|&i| names[i].clone()).collect();
        let key = subset_names.join("+");
        cploo_accuracy(md, &subset_names, derive_seed(seed, &["subset", &key]))
    };

    let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut open: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0usize;
    let mut stall = 0usize;
    let mut frontier: Vec<usize> = Vec::new(); // the subset being expanded

    loop {
        // Expand: add each unused feature to the current subset.
        let children: Vec<Vec<usize>> = (0..m)
            .filter(|f| !frontier.contains(f))
            .map(|f| {
                let mut s = frontier.clone();
                s.push(f);
                s.sort_unstable();
                s
            })
            .filter(|s| !visited.contains(s))
            .collect();
        let scored: Vec<(Vec<usize>, f64)> = children
            .into_par_iter()
            .map(|s| {
                let acc = eval(&s)?;
                Ok((s, acc))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut improved = false;
        for (s, acc) in scored {
            evaluated += 1;
            visited.insert(s.clone());
            match &best {
                None => {
                    best = Some((acc, s.clone()));
                    improved = true;
                }
                Some((bacc, bsub)) => {
                    if better(acc, &s, *bacc, bsub, names) {
                        improved = acc > *bacc;
                        best = Some((acc, s.clone()));
                    }
                }
            }
            if s.len() < WRAPPER_MAX_SUBSET {
                open.push((acc, s));
            }
        }

        if improved {
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= WRAPPER_STALL_LIMIT || open.is_empty() {
            break;
        }

        // Pop the best open node for the next expansion.
        let mut pick = 0;
        for i in 1..open.len() {
            if better(open[i].0, &open[i].1, open[pick].0, &open[pick].1, names) {
                pick = i;
            }
        }
        frontier = open.swap_remove(pick).1;
    }

    let (accuracy, subset_idx) =
        best.ok_or_else(|| Error::Data("wrapper evaluated no subsets".into()))?;
    Ok(WrapperResult {
        subset: subset_idx.iter().map(|&i| names[i].clone()).collect(),
        accuracy,
        evaluated,
    })
}

/// One leave-one-project-out fold of the recommender evaluation.
#[derive(Debug, Clone)]
pub struct FoldTrace {
    pub project: String,
    /// Dataset ids the fold's wrapper and model were trained on.
    pub train_ids: Vec<String>,
    pub subset: Vec<String>,
    pub estimated_accuracy: f64,
    /// Accuracy of always predicting the fold-training majority label,
    /// measured on the fold's training examples.
    pub majority_accuracy: f64,
    pub majority_label: usize,
}

#[derive(Debug, Clone)]
pub struct VersionOutcome {
    pub dataset_id: String,
    pub project: String,
    pub recommended: String,
    pub recommended_index: usize,
    pub confidences: Vec<f64>,
    pub correct: bool,
    /// Whether the fold-majority label would have been correct.
    pub majority_correct: bool,
}

#[derive(Debug, Clone)]
pub struct MetaCplooEval {
    pub folds: Vec<FoldTrace>,
    pub outcomes: Vec<VersionOutcome>,
    /// Fraction of versions whose recommendation is in the label set.
    pub accuracy: f64,
    pub one_error: f64,
    /// Accuracy of the per-fold majority baseline on the same versions.
    pub majority_accuracy: f64,
}

/// Evaluates the full recommender under leave-one-project-out: per fold, a
/// wrapper-selected subset and a fresh meta-model, trained strictly without
/// the held-out project.
pub fn meta_cploo_eval(md: &MetaDataset, seed: u64) -> Result<MetaCplooEval> {
    let projects = md.projects();
    if projects.len() < 2 {
        return Err(Error::Config(
            "meta evaluation needs at least two projects".into(),
        ));
    }
    let mut folds = Vec::with_capacity(projects.len());
    let mut outcomes = Vec::new();
    for project in &projects {
        let train_md = restrict(md, |e| &e.project != project);
        let wrapper = best_first_wrapper(&train_md, derive_seed(seed, &["wrapper", project]))?;
        let model = train_meta(
            &train_md,
            &wrapper.subset,
            derive_seed(seed, &["fold-model", project]),
        )?;

        let maj = majority_label(&train_md);
        let maj_hits = train_md
            .examples
            .iter()
            .filter(|e| e.labels.contains(&maj))
            .count();
        folds.push(FoldTrace {
            project: project.clone(),
            train_ids: train_md.examples.iter().map(|e| e.dataset_id.clone()).collect(),
            subset: wrapper.subset.clone(),
            estimated_accuracy: wrapper.accuracy,
            majority_accuracy: maj_hits as f64 / train_md.examples.len().max(1) as f64,
            majority_label: maj,
        });

        for e in md.examples.iter().filter(|e| &e.project == project) {
            let confs = recommend_for_example(&model, md, e)?;
            let idx = argmax_label(&confs);
            outcomes.push(VersionOutcome {
                dataset_id: e.dataset_id.clone(),
                project: project.clone(),
                recommended: md.label_universe[idx].clone(),
                recommended_index: idx,
                confidences: confs,
                correct: e.labels.contains(&idx),
                majority_correct: e.labels.contains(&maj),
            });
        }
    }
    let total = outcomes.len().max(1) as f64;
    let accuracy = outcomes.iter().filter(|o| o.correct).count() as f64 / total;
    let majority_accuracy =
        outcomes.iter().filter(|o| o.majority_correct).count() as f64 / total;
    Ok(MetaCplooEval {
        folds,
        outcomes,
        accuracy,
        one_error: 1.0 - accuracy,
        majority_accuracy,
    })
}

/// Expected AUC per table row when picking uniformly among the label
/// methods, averaged over `repeats` seeded draws.
pub fn random_baseline(
    table: &PerformanceTable,
    labels: &[String],
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let cols: Vec<usize> = labels
        .iter()
        .map(|l| {
            table
                .method_index(l)
                .ok_or_else(|| Error::Config(format!("label method `{l}` is not in the table")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(table.n_datasets());
    for (i, id) in table.dataset_ids.iter().enumerate() {
        let mut rng = rng_for(seed, &["random-baseline", id]);
        let mut sum = 0.0;
        for _ in 0..repeats {
            let j = cols[rng.gen_range(0..cols.len())];
            sum += table.auc[i][j].ok_or_else(|| {
                Error::Data(format!(
                    "dataset {id} has no defined auc for {}",
                    table.method_ids[j]
                ))
            })?;
        }
        out.push(sum / repeats.max(1) as f64);
    }
    Ok(out)
}

/// Full recommender evaluation joined with base-level AUC values.
#[derive(Debug, Clone)]
pub struct MetaCplooReport {
    pub md: MetaDataset,
    pub eval: MetaCplooEval,
    /// AUC of the recommended method per evaluated version (table order of
    /// `eval.outcomes`).
    pub recommended_auc: Vec<f64>,
    /// Random-pick baseline per version, aligned with `eval.outcomes`.
    pub random_auc: Vec<f64>,
    pub global_majority: String,
}

/// Evaluates the recommender against a finished comparison table.
pub fn meta_cploo(
    datasets: &[DefectDataset],
    table: &PerformanceTable,
    kind: MetaSetKind,
    labels: &[String],
    seed: u64,
) -> Result<MetaCplooReport> {
    let md = assemble_meta_dataset(datasets, table, kind, labels, seed)?;
    let eval = meta_cploo_eval(&md, seed)?;
    let random_rows = random_baseline(table, labels, 30, seed)?;

    let mut recommended_auc = Vec::with_capacity(eval.outcomes.len());
    let mut random_auc = Vec::with_capacity(eval.outcomes.len());
    for o in &eval.outcomes {
        let row = table
            .dataset_index(&o.dataset_id)
            .ok_or_else(|| Error::Data(format!("outcome dataset {} missing", o.dataset_id)))?;
        let col = table
            .method_index(&o.recommended)
            .ok_or_else(|| Error::Data(format!("method {} missing", o.recommended)))?;
        recommended_auc.push(table.auc[row][col].ok_or_else(|| {
            Error::Data(format!("dataset {} has no auc for {}", o.dataset_id, o.recommended))
        })?);
        random_auc.push(random_rows[row]);
    }
    let global_majority = md.label_universe[majority_label(&md)].clone();
    Ok(MetaCplooReport {
        md,
        eval,
        recommended_auc,
        random_auc,
        global_majority,
    })
}

/// Writes a meta-model as versioned JSON.
pub fn save_meta_model(path: &Path, model: &MetaModel) -> Result<()> {
    let json = serde_json::to_string_pretty(model)
        .map_err(|e| Error::ModelFormat(format!("serialization failed: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Loads a meta-model, rejecting unknown formats or versions.
pub fn load_meta_model(path: &Path) -> Result<MetaModel> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::ModelFormat(format!("cannot read {}: {e}", path.display()))
    })?;
    let model: MetaModel = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    if model.format != META_MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "{}: unknown format `{}`",
            path.display(),
            model.format
        )));
    }
    if model.version != META_MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "{}: unsupported version {} (expected {})",
            path.display(),
            model.version,
            META_MODEL_VERSION
        )));
    }
    Ok(model)
}
