//! Transfer solutions for cross-project defect prediction.
//!
//! Each solution adapts the raw cross-project setup before an ordinary
//! classifier is trained:
//!
//! * `orig` concatenates the pool as-is,
//! * `2008Watanabe` rescales test columns to the training means,
//! * `2009Cruz` shifts test columns to the training medians,
//! * `2009Turhan` keeps only pool rows near the test rows,
//! * `2012Ma` weights pool rows by how many attributes fall inside the
//!   test ranges (paired with weighted naive Bayes),
//! * `2013He` picks the least separable source datasets, drops unstable
//!   attributes, and averages an ensemble,
//! * `2013Herbold` keeps the source datasets whose distributional
//!   characteristics are closest to the test set.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::classifiers::{
    separability_accuracy, train, ClassifierKind, ClassifierSpec, WeightedTrainSet,
};
use crate::data::{CrossProjectPool, DefectDataset};
use crate::rng::{derive_seed, rng_for};
use crate::util::{column, euclidean, mean, median, pop_sd};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Solution {
    Orig,
    Watanabe2008,
    Cruz2009,
    Turhan2009,
    Ma2012,
    He2013,
    Herbold2013,
}

impl Solution {
    pub fn id(&self) -> &'static str {
        match self {
            Solution::Orig => "orig",
            Solution::Watanabe2008 => "2008Watanabe",
            Solution::Cruz2009 => "2009Cruz",
            Solution::Turhan2009 => "2009Turhan",
            Solution::Ma2012 => "2012Ma",
            Solution::He2013 => "2013He",
            Solution::Herbold2013 => "2013Herbold",
        }
    }

    pub fn all() -> [Solution; 7] {
        [
            Solution::Orig,
            Solution::Watanabe2008,
            Solution::Cruz2009,
            Solution::Turhan2009,
            Solution::Ma2012,
            Solution::He2013,
            Solution::Herbold2013,
        ]
    }
}

/// A comparison cell: one transfer solution paired with one classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CpdpMethod {
    pub solution: Solution,
    pub classifier: ClassifierKind,
}

impl CpdpMethod {
    /// The relevancy weights of `2012Ma` only make sense for a classifier
    /// that trains on weighted instances, so it pairs exclusively with
    /// naive Bayes.
    pub fn new(solution: Solution, classifier: ClassifierKind) -> Result<Self> {
        if solution == Solution::Ma2012 && classifier != ClassifierKind::Nb {
            return Err(Error::Config(format!(
                "2012Ma pairs only with nb, not {}",
                classifier.id()
            )));
        }
        if classifier == ClassifierKind::Logistic {
            return Err(Error::Config(
                "logistic is reserved for the separability check, not for comparison methods"
                    .into(),
            ));
        }
        Ok(Self {
            solution,
            classifier,
        })
    }

    pub fn id(&self) -> String {
        format!("{}_{}", self.solution.id(), self.classifier.id())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (sol, clf) = s.rsplit_once('_').ok_or_else(|| {
            Error::Config(format!("method id `{s}` is not of the form <solution>_<classifier>"))
        })?;
        let solution = Solution::all()
            .into_iter()
            .find(|x| x.id() == sol)
            .ok_or_else(|| Error::Config(format!("unknown transfer solution `{sol}`")))?;
        CpdpMethod::new(solution, ClassifierKind::parse(clf)?)
    }

    /// The full comparison grid: six solutions crossed with five
    /// classifiers, plus the weight-based solution with naive Bayes.
    pub fn all() -> Vec<CpdpMethod> {
        let mut out = Vec::with_capacity(31);
        for solution in Solution::all() {
            if solution == Solution::Ma2012 {
                out.push(CpdpMethod::new(solution, ClassifierKind::Nb).unwrap());
                continue;
            }
            for kind in ClassifierKind::comparison_kinds() {
                out.push(CpdpMethod::new(solution, kind).unwrap());
            }
        }
        out
    }
}

/// Rescales each test column to the training mean: `x * mean_train / mean_test`.
/// Columns with zero test mean pass through unchanged.
pub fn watanabe_transform(test_rows: &[Vec<f64>], train_rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = test_rows.first().map_or(0, |r| r.len());
    let mut factors = Vec::with_capacity(m);
    for j in 0..m {
        let test_mean = mean(&column(test_rows, j));
        if test_mean == 0.0 {
            log::warn!("compensation skipped for column {j}: zero test mean");
            factors.push(1.0);
        } else {
            factors.push(mean(&column(train_rows, j)) / test_mean);
        }
    }
    test_rows
        .iter()
        .map(|row| row.iter().zip(&factors).map(|(x, f)| x * f).collect())
        .collect()
}

/// Shifts each test column by `median_train - median_test`.
pub fn cruz_transform(test_rows: &[Vec<f64>], train_rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = test_rows.first().map_or(0, |r| r.len());
    let shifts: Vec<f64> = (0..m)
        .map(|j| median(&column(train_rows, j)) - median(&column(test_rows, j)))
        .collect();
    test_rows
        .iter()
        .map(|row| row.iter().zip(&shifts).map(|(x, s)| x + s).collect())
        .collect()
}

/// Relevancy filtering: for each test row, the `k` nearest pool rows by
/// Euclidean distance are kept; the union is deduplicated on exact feature
/// and label equality. Distance ties break toward lower pool indices.
pub fn turhan_filter(
    test_rows: &[Vec<f64>],
    pool_rows: &[Vec<f64>],
    pool_labels: &[bool],
    k: usize,
) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut selected = BTreeSet::new();
    if pool_rows.len() <= k {
        log::warn!(
            "nearest-neighbor filter: pool has {} rows, k = {k}; keeping the whole pool",
            pool_rows.len()
        );
        selected.extend(0..pool_rows.len());
    } else {
        for test in test_rows {
            let mut dist: Vec<(f64, usize)> = pool_rows
                .iter()
                .enumerate()
                .map(|(i, row)| (euclidean(test, row), i))
                .collect();
            dist.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            selected.extend(dist[..k].iter().map(|&(_, i)| i));
        }
    }

    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in selected {
        let key: (Vec<u64>, bool) = (
            pool_rows[i].iter().map(|v| v.to_bits()).collect(),
            pool_labels[i],
        );
        if seen.insert(key) {
            rows.push(pool_rows[i].clone());
            labels.push(pool_labels[i]);
        }
    }
    (rows, labels)
}

/// Relevancy weights: `s_i` counts the attributes of training row `i` that
/// fall inside the test min/max range; the weight grows quadratically as a
/// row fits more test ranges.
pub fn ma_weights(train_rows: &[Vec<f64>], test_rows: &[Vec<f64>]) -> Vec<f64> {
    let m = train_rows.first().map_or(0, |r| r.len());
    let k = m as f64;
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for row in test_rows {
        for (j, &x) in row.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    train_rows
        .iter()
        .map(|row| {
            let s = row
                .iter()
                .enumerate()
                .filter(|&(j, &x)| x >= lo[j] && x <= hi[j])
                .count() as f64;
            s / ((k - s + 1.0) * (k - s + 1.0))
        })
        .collect()
}

/// Distributional characteristics used by the `2013Herbold` selector:
/// per-attribute mean and standard deviation, concatenated.
fn characteristics(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(2 * m);
    for j in 0..m {
        out.push(mean(&column(rows, j)));
    }
    for j in 0..m {
        out.push(pop_sd(&column(rows, j)));
    }
    out
}

/// Keeps the `ceil(fraction * pool size)` candidate datasets whose
/// characteristic vectors are nearest to the test set after z-scoring each
/// characteristic over the candidates. Selected datasets are concatenated
/// in pool order, so `fraction = 1` reproduces the plain concatenation.
pub fn herbold_filter(
    test_rows: &[Vec<f64>],
    pool: &CrossProjectPool,
    fraction: f64,
) -> Result<(Vec<Vec<f64>>, Vec<bool>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&fraction) || fraction <= 0.0 {
        return Err(Error::Config(format!(
            "selection fraction must be in (0, 1], got {fraction}"
        )));
    }
    let candidates: Vec<Vec<f64>> = pool
        .datasets
        .iter()
        .map(|d| characteristics(&d.rows))
        .collect();
    let target = characteristics(test_rows);
    let dims = target.len();

    let mut mu = vec![0.0; dims];
    let mut sd = vec![0.0; dims];
    for j in 0..dims {
        let vals: Vec<f64> = candidates.iter().map(|c| c[j]).collect();
        mu[j] = mean(&vals);
        sd[j] = pop_sd(&vals).max(1e-12);
    }
    let z = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(j, &x)| (x - mu[j]) / sd[j])
            .collect()
    };
    let target_z = z(&target);
    let mut dist: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (euclidean(&z(c), &target_z), i))
        .collect();
    dist.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    let keep = ((fraction * pool.datasets.len() as f64).ceil() as usize)
        .clamp(1, pool.datasets.len());
    let mut chosen: Vec<usize> = dist[..keep].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for &i in &chosen {
        rows.extend(pool.datasets[i].rows.iter().cloned());
        labels.extend(pool.datasets[i].labels.iter().copied());
    }
    Ok((rows, labels, chosen))
}

#[derive(Debug, Clone, Copy)]
pub struct HeParams {
    /// Number of source datasets kept (pool size permitting).
    pub n_select: usize,
    /// Fraction of attributes removed per selected dataset.
    pub fss: f64,
    /// Cap on rows sampled per side when estimating separability.
    pub sample_cap: usize,
}

impl Default for HeParams {
    fn default() -> Self {
        Self {
            n_select: 10,
            fss: 0.8,
            sample_cap: 500,
        }
    }
}

/// One selected source dataset with its retained attributes.
#[derive(Debug, Clone)]
pub struct HeMember {
    pub dataset_index: usize,
    pub retained_attrs: Vec<usize>,
    pub separability: f64,
}

fn sample_rows(rows: &[Vec<f64>], k: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec<f64>> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    let (chosen, _) = idx.partial_shuffle(rng, k);
    chosen.iter().map(|&i| rows[i].clone()).collect()
}

/// Information gain of attribute `j` for separating two merged samples,
/// using ten equal-frequency bins.
fn info_gain(sam_a: &[Vec<f64>], sam_b: &[Vec<f64>], j: usize) -> f64 {
    let mut values: Vec<(f64, bool)> = sam_a
        .iter()
        .map(|r| (r[j], false))
        .chain(sam_b.iter().map(|r| (r[j], true)))
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite attribute values"));
    let n = values.len();
    let total_pos = values.iter().filter(|v| v.1).count() as f64;
    let h_total = crate::util::binary_entropy(total_pos, n as f64);

    let bins = 10.min(n);
    let mut h_cond = 0.0;
    for b in 0..bins {
        let start = b * n / bins;
        let end = (b + 1) * n / bins;
        if start == end {
            continue;
        }
        let slice = &values[start..end];
        let pos = slice.iter().filter(|v| v.1).count() as f64;
        h_cond += (slice.len() as f64 / n as f64)
            * crate::util::binary_entropy(pos, slice.len() as f64);
    }
    h_total - h_cond
}

/// Source selection for the `2013He` ensemble: the `n_select` pool datasets
/// whose sampled rows are hardest to distinguish from the test rows, each
/// stripped of its `floor(fss * m)` most distribution-separating attributes.
pub fn he_select(
    test_rows: &[Vec<f64>],
    pool: &CrossProjectPool,
    params: &HeParams,
    seed: u64,
) -> Result<Vec<HeMember>> {
    let m = test_rows.first().map_or(0, |r| r.len());
    let mut scored = Vec::new();
    for (di, d) in pool.datasets.iter().enumerate() {
        let k = d.len().min(test_rows.len()).min(params.sample_cap);
        if k < 2 {
            log::warn!(
                "skipping candidate {}: too few rows ({}) to estimate separability",
                d.id(),
                k
            );
            continue;
        }
        let mut rng = rng_for(seed, &["he-sample", &d.id()]);
        let sam_train = sample_rows(&d.rows, k, &mut rng);
        let sam_test = sample_rows(test_rows, k, &mut rng);
        let sep = separability_accuracy(
            &sam_train,
            &sam_test,
            derive_seed(seed, &["he-separability", &d.id()]),
        )?;
        scored.push((sep, di, sam_train, sam_test));
    }
    if scored.is_empty() {
        return Err(Error::DegenerateTraining(
            "no pool dataset is large enough for source selection".into(),
        ));
    }
    scored.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite separability")
            .then(a.1.cmp(&b.1))
    });
    scored.truncate(params.n_select);

    let drop_count = ((params.fss * m as f64).floor() as usize).min(m.saturating_sub(1));
    let members = scored
        .into_iter()
        .map(|(sep, di, sam_train, sam_test)| {
            let mut by_gain: Vec<(f64, usize)> = (0..m)
                .map(|j| (info_gain(&sam_train, &sam_test, j), j))
                .collect();
            // Highest gain means the attribute separates source from test
            // best, i.e. it is the least stable across the two datasets.
            by_gain.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .expect("finite information gain")
                    .then(a.1.cmp(&b.1))
            });
            let dropped: BTreeSet<usize> =
                by_gain[..drop_count].iter().map(|&(_, j)| j).collect();
            let retained_attrs: Vec<usize> = (0..m).filter(|j| !dropped.contains(j)).collect();
            HeMember {
                dataset_index: di,
                retained_attrs,
                separability: sep,
            }
        })
        .collect();
    Ok(members)
}

fn project_rows(rows: &[Vec<f64>], attrs: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| attrs.iter().map(|&j| r[j]).collect())
        .collect()
}

/// Trains one model per selected source dataset and averages their scores.
/// Members whose training set degenerates are skipped with a warning.
pub fn he_predict(
    members: &[HeMember],
    pool: &CrossProjectPool,
    test_rows: &[Vec<f64>],
    kind: ClassifierKind,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; test_rows.len()];
    let mut trained = 0usize;
    for (mi, member) in members.iter().enumerate() {
        let d = pool.datasets[member.dataset_index];
        let rows = project_rows(&d.rows, &member.retained_attrs);
        let spec = ClassifierSpec::new(kind, derive_seed(seed, &["he-member", &mi.to_string()]));
        let data = match WeightedTrainSet::unweighted(rows, d.labels.clone()) {
            Ok(data) => data,
            Err(Error::DegenerateTraining(msg)) => {
                log::warn!("ensemble member {} skipped: {msg}", d.id());
                continue;
            }
            Err(e) => return Err(e),
        };
        let model = match train(&spec, &data) {
            Ok(model) => model,
            Err(Error::DegenerateTraining(msg)) => {
                log::warn!("ensemble member {} skipped: {msg}", d.id());
                continue;
            }
            Err(e) => return Err(e),
        };
        let test = project_rows(test_rows, &member.retained_attrs);
        for (s, row) in sums.iter_mut().zip(&test) {
            *s += model.score(row);
        }
        trained += 1;
    }
    if trained == 0 {
        return Err(Error::DegenerateTraining(
            "every ensemble member failed to train".into(),
        ));
    }
    Ok(sums.into_iter().map(|s| s / trained as f64).collect())
}

/// Scores plus the metadata recorded for one comparison cell.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub scores: Vec<f64>,
    pub seed: u64,
    pub wall: Duration,
}

/// Runs one method against one target dataset. The per-cell seed is derived
/// from `(base_seed, method id, dataset id)`, so cells are reproducible
/// regardless of evaluation order.
pub fn run_method(
    method: &CpdpMethod,
    target: &DefectDataset,
    pool: &CrossProjectPool,
    base_seed: u64,
) -> Result<MethodRun> {
    let cell_seed = derive_seed(base_seed, &["method", &method.id(), "dataset", &target.id()]);
    let started = Instant::now();
    let spec = ClassifierSpec::new(method.classifier, cell_seed);

    let scores = match method.solution {
        Solution::Orig => {
            let (rows, labels) = pool.concat();
            let model = train(&spec, &WeightedTrainSet::unweighted(rows, labels)?)?;
            model.score_all(&target.rows)
        }
        Solution::Watanabe2008 => {
            let (rows, labels) = pool.concat();
            let transformed = watanabe_transform(&target.rows, &rows);
            let model = train(&spec, &WeightedTrainSet::unweighted(rows, labels)?)?;
            model.score_all(&transformed)
        }
        Solution::Cruz2009 => {
            let (rows, labels) = pool.concat();
            let transformed = cruz_transform(&target.rows, &rows);
            let model = train(&spec, &WeightedTrainSet::unweighted(rows, labels)?)?;
            model.score_all(&transformed)
        }
        Solution::Turhan2009 => {
            let (rows, labels) = pool.concat();
            let (kept_rows, kept_labels) = turhan_filter(&target.rows, &rows, &labels, 10);
            let model = train(&spec, &WeightedTrainSet::unweighted(kept_rows, kept_labels)?)?;
            model.score_all(&target.rows)
        }
        Solution::Ma2012 => {
            let (rows, labels) = pool.concat();
            let weights = ma_weights(&rows, &target.rows);
            let model = train(&spec, &WeightedTrainSet::new(rows, labels, weights)?)?;
            model.score_all(&target.rows)
        }
        Solution::He2013 => {
            let members = he_select(&target.rows, pool, &HeParams::default(), cell_seed)?;
            he_predict(&members, pool, &target.rows, method.classifier, cell_seed)?
        }
        Solution::Herbold2013 => {
            let (rows, labels, _) = herbold_filter(&target.rows, pool, 0.5)?;
            let model = train(&spec, &WeightedTrainSet::unweighted(rows, labels)?)?;
            model.score_all(&target.rows)
        }
    };

    let wall = started.elapsed();
    log::debug!(
        "method {} on {}: seed {cell_seed}, {} rows scored in {:?}",
        method.id(),
        target.id(),
        scores.len(),
        wall
    );
    Ok(MethodRun {
        scores,
        seed: cell_seed,
        wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_pool, DefectDataset, METRIC_COUNT};
    use proptest::prelude::*;
    use rand::Rng;

    fn synth_dataset(project: &str, version: &str, n: usize, shift: f64) -> DefectDataset {
        let mut rng = rng_for(99, &["synth", project, version]);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..METRIC_COUNT)
                    .map(|j| shift + j as f64 + rng.gen::<f64>())
                    .collect()
            })
            .collect();
        let bugs: Vec<u32> = (0..n).map(|i| (i % 3 == 0) as u32).collect();
        DefectDataset::new(project, version, rows, bugs).unwrap()
    }

    #[test]
    fn method_grid_is_complete_and_unique() {
        let all = CpdpMethod::all();
        assert_eq!(all.len(), 31, "7 solutions x 5 classifiers minus 4 nb-only cells");
        let ids: std::collections::BTreeSet<String> = all.iter().map(|m| m.id()).collect();
        assert_eq!(ids.len(), 31, "method ids must be unique");
        for m in &all {
            assert_eq!(CpdpMethod::parse(&m.id()).unwrap(), *m, "id round trip");
        }
        assert_eq!(
            all.iter().filter(|m| m.solution == Solution::Ma2012).count(),
            1,
            "relevancy weighting only pairs with naive bayes"
        );
    }

    #[test]
    fn invalid_method_combinations_are_rejected() {
        assert!(CpdpMethod::new(Solution::Ma2012, ClassifierKind::Rf).is_err());
        assert!(CpdpMethod::new(Solution::Orig, ClassifierKind::Logistic).is_err());
        assert!(CpdpMethod::parse("2012Ma_svm").is_err());
        assert!(CpdpMethod::parse("nonsense").is_err());
    }

    #[test]
    fn watanabe_scales_test_columns_to_training_means() {
        let train = vec![vec![4.0, 100.0], vec![8.0, 300.0]]; // means 6, 200
        let test = vec![vec![3.0, 50.0], vec![1.0, 150.0]]; // means 2, 100
        let out = watanabe_transform(&test, &train);
        assert_eq!(out[0], vec![3.0 * 6.0 / 2.0, 50.0 * 200.0 / 100.0]);
        assert_eq!(out[1], vec![1.0 * 6.0 / 2.0, 150.0 * 200.0 / 100.0]);
    }

    #[test]
    fn watanabe_passes_through_zero_mean_test_columns() {
        let train = vec![vec![4.0], vec![8.0]];
        let test = vec![vec![0.0], vec![0.0]];
        let out = watanabe_transform(&test, &train);
        assert!(out.iter().flatten().all(|v| v.is_finite()), "no NaN from 0/0");
        assert_eq!(out, test, "zero-mean column is left unchanged");
    }

    #[test]
    fn cruz_shifts_test_medians_onto_training_medians() {
        let train = vec![vec![9.0], vec![10.0], vec![11.0]]; // median 10
        let test = vec![vec![3.0], vec![4.0], vec![5.0]]; // median 4
        let out = cruz_transform(&test, &train);
        assert_eq!(out, vec![vec![9.0], vec![10.0], vec![11.0]]);
    }

    #[test]
    fn turhan_matches_brute_force_union() {
        let mut rng = rng_for(5, &["turhan"]);
        let pool_rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..3).map(|_| rng.gen::<f64>() * 10.0).collect())
            .collect();
        let pool_labels: Vec<bool> = (0..30).map(|i| i % 2 == 0).collect();
        let test_rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.gen::<f64>() * 10.0).collect())
            .collect();
        let k = 4;

        let mut expect_idx = std::collections::BTreeSet::new();
        for t in &test_rows {
            let mut d: Vec<(f64, usize)> = pool_rows
                .iter()
                .enumerate()
                .map(|(i, r)| (euclidean(t, r), i))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            expect_idx.extend(d[..k].iter().map(|&(_, i)| i));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut expect: Vec<(Vec<f64>, bool)> = Vec::new();
        for &i in &expect_idx {
            let key: (Vec<u64>, bool) = (
                pool_rows[i].iter().map(|v| v.to_bits()).collect(),
                pool_labels[i],
            );
            if seen.insert(key) {
                expect.push((pool_rows[i].clone(), pool_labels[i]));
            }
        }

        let (rows, labels) = turhan_filter(&test_rows, &pool_rows, &pool_labels, k);
        let got: Vec<(Vec<f64>, bool)> = rows.into_iter().zip(labels).collect();
        assert_eq!(got, expect, "filter must equal the brute-force union");
    }

    #[test]
    fn turhan_deduplicates_identical_training_rows() {
        let pool_rows = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], vec![9.0, 9.0]];
        let pool_labels = vec![true, true, false, false];
        let test_rows = vec![vec![1.1, 1.0]];
        let (rows, labels) = turhan_filter(&test_rows, &pool_rows, &pool_labels, 3);
        // Two of the three nearest are identical in features and label.
        assert_eq!(rows.len(), 2, "exact duplicates collapse");
        assert_eq!(labels, vec![true, false], "distinct labels both survive");
        assert_eq!(rows[0], rows[1], "same features, different labels");
    }

    #[test]
    fn turhan_keeps_small_pools_whole() {
        let pool_rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let pool_labels = vec![true, false, true];
        let (rows, _) = turhan_filter(&[vec![0.0]], &pool_rows, &pool_labels, 10);
        assert_eq!(rows.len(), 3, "pool smaller than k is kept whole");
    }

    #[test]
    fn ma_weights_match_the_closed_form() {
        // Test ranges are [0, 1] in every attribute.
        let test: Vec<Vec<f64>> = vec![vec![0.0; METRIC_COUNT], vec![1.0; METRIC_COUNT]];
        let inside = vec![0.5; METRIC_COUNT]; // s = 20
        let mut half = vec![0.5; METRIC_COUNT];
        for v in half.iter_mut().take(10) {
            *v = 5.0; // push 10 attributes out of range: s = 10
        }
        let outside = vec![-3.0; METRIC_COUNT]; // s = 0
        let w = ma_weights(&[inside, half, outside], &test);
        assert!((w[0] - 20.0).abs() < 1e-12, "s=k gives w=k, got {}", w[0]);
        assert!((w[1] - 10.0 / 121.0).abs() < 1e-12, "s=10,k=20 gives 10/121");
        assert!((w[2] - 0.0).abs() < 1e-12, "fully out of range gives 0");
        assert!(w[0] > w[1] && w[1] > w[2], "weights grow with matching attributes");
    }

    #[test]
    fn herbold_full_fraction_reproduces_the_plain_pool() {
        let datasets = vec![
            synth_dataset("a", "1", 12, 0.0),
            synth_dataset("b", "1", 9, 2.0),
            synth_dataset("c", "1", 15, 4.0),
            synth_dataset("t", "1", 10, 1.0),
        ];
        let target = &datasets[3];
        let pool = build_pool(&datasets, target).unwrap();
        let (rows, labels, chosen) = herbold_filter(&target.rows, &pool, 1.0).unwrap();
        let (orig_rows, orig_labels) = pool.concat();
        assert_eq!(chosen, vec![0, 1, 2], "everything selected, pool order");
        assert_eq!(rows, orig_rows, "full fraction must be bit-identical to the plain pool");
        assert_eq!(labels, orig_labels);
    }

    #[test]
    fn herbold_half_fraction_keeps_the_nearest_half() {
        let datasets = vec![
            synth_dataset("a", "1", 12, 0.0),
            synth_dataset("b", "1", 9, 50.0),
            synth_dataset("c", "1", 15, 0.2),
            synth_dataset("t", "1", 10, 0.1),
        ];
        let target = &datasets[3];
        let pool = build_pool(&datasets, target).unwrap();
        let (_, _, chosen) = herbold_filter(&target.rows, &pool, 0.5).unwrap();
        assert_eq!(chosen.len(), 2, "ceil(0.5 * 3) datasets");
        assert!(
            !chosen.contains(&1),
            "the far-shifted dataset must not be among the nearest"
        );
    }

    #[test]
    fn he_members_drop_sixteen_of_twenty_attributes() {
        let datasets = vec![
            synth_dataset("a", "1", 30, 0.0),
            synth_dataset("b", "1", 30, 1.0),
            synth_dataset("c", "1", 30, 2.0),
            synth_dataset("t", "1", 25, 0.5),
        ];
        let target = &datasets[3];
        let pool = build_pool(&datasets, target).unwrap();
        let members = he_select(&target.rows, &pool, &HeParams::default(), 3).unwrap();
        assert_eq!(members.len(), 3, "pool smaller than n_select keeps everything");
        for m in &members {
            assert_eq!(m.retained_attrs.len(), 4, "floor(0.8*20)=16 attributes dropped");
            assert!(m.retained_attrs.windows(2).all(|w| w[0] < w[1]), "sorted attrs");
        }
    }

    #[test]
    fn he_prefers_sources_that_look_like_the_test_set() {
        let datasets = vec![
            synth_dataset("same", "1", 40, 0.0),
            synth_dataset("far", "1", 40, 1000.0),
            synth_dataset("t", "1", 40, 0.0),
        ];
        let target = &datasets[2];
        let pool = build_pool(&datasets, target).unwrap();
        let params = HeParams {
            n_select: 1,
            ..HeParams::default()
        };
        let members = he_select(&target.rows, &pool, &params, 3).unwrap();
        assert_eq!(members.len(), 1);
        assert_eq!(
            pool.datasets[members[0].dataset_index].project, "same",
            "the indistinguishable source wins"
        );
        assert!(members[0].separability < 0.75, "low separability for a lookalike");
    }

    #[test]
    fn he_drops_the_most_distribution_separating_attribute() {
        let mut source = synth_dataset("s", "1", 40, 0.0);
        let mut target = synth_dataset("t", "1", 40, 0.0);
        // Attribute 0 alone distinguishes the two datasets.
        for r in &mut source.rows {
            r[0] = 0.0;
        }
        for r in &mut target.rows {
            r[0] = 100.0;
        }
        let other = synth_dataset("o", "1", 40, 0.3);
        let datasets = vec![source, other, target];
        let target = &datasets[2];
        let pool = build_pool(&datasets, target).unwrap();
        let params = HeParams {
            fss: 0.05, // drop exactly one attribute
            ..HeParams::default()
        };
        let members = he_select(&target.rows, &pool, &params, 3).unwrap();
        let s_member = members
            .iter()
            .find(|m| pool.datasets[m.dataset_index].project == "s")
            .expect("source dataset selected");
        assert_eq!(s_member.retained_attrs.len(), METRIC_COUNT - 1);
        assert!(
            !s_member.retained_attrs.contains(&0),
            "the shifted attribute must be removed"
        );
    }

    #[test]
    fn run_method_is_deterministic_per_seed() {
        let datasets = vec![
            synth_dataset("a", "1", 25, 0.0),
            synth_dataset("b", "1", 25, 1.0),
            synth_dataset("t", "1", 15, 0.5),
        ];
        let target = &datasets[2];
        let pool = build_pool(&datasets, target).unwrap();
        for id in ["orig_nb", "2009Turhan_nb", "2012Ma_nb", "2013He_rf"] {
            let method = CpdpMethod::parse(id).unwrap();
            let a = run_method(&method, target, &pool, 7).unwrap();
            let b = run_method(&method, target, &pool, 7).unwrap();
            assert_eq!(a.scores, b.scores, "{id} must be reproducible");
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.scores.len(), target.len(), "one score per test row");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn turhan_output_is_a_subset_of_the_pool(
            pool_vals in proptest::collection::vec(
                proptest::collection::vec(0.0f64..100.0, 3), 2..40),
            test_vals in proptest::collection::vec(
                proptest::collection::vec(0.0f64..100.0, 3), 1..8),
            k in 1usize..12,
        ) {
            let labels: Vec<bool> = (0..pool_vals.len()).map(|i| i % 2 == 0).collect();
            let (rows, out_labels) = turhan_filter(&test_vals, &pool_vals, &labels, k);
            prop_assert_eq!(rows.len(), out_labels.len());
            prop_assert!(rows.len() <= pool_vals.len());
            for (r, l) in rows.iter().zip(&out_labels) {
                let found = pool_vals
                    .iter()
                    .zip(&labels)
                    .any(|(pr, pl)| pr == r && pl == l);
                prop_assert!(found, "selected row must come from the pool");
            }
        }
    }
}
