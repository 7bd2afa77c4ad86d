//! Dataset meta-features.
//!
//! Two characterizations of a defect dataset feed the recommender:
//!
//! * `ms_dist` (101 values): five distribution measures per metric column
//!   plus the dataset size,
//! * `ms_uns` (44 values): size terms, aggregated column statistics
//!   (means, dispersions, entropies, correlations, skewness, kurtosis),
//!   and three clustering validity indices for two algorithms at three
//!   cluster-count ratios.
//!
//! Undefined statistics are imputed as 0 with a logged warning so feature
//! vectors always have the full length and finite values.

pub mod clustering;

use serde::{Deserialize, Serialize};

use crate::data::{DefectDataset, METRIC_NAMES};
use crate::rng::rng_for;
use crate::util::{column, mean, median, pop_sd, sample_sd};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetaSetKind {
    Dist,
    Uns,
}

impl MetaSetKind {
    pub fn id(&self) -> &'static str {
        match self {
            MetaSetKind::Dist => "dist",
            MetaSetKind::Uns => "uns",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dist" => Ok(MetaSetKind::Dist),
            "uns" => Ok(MetaSetKind::Uns),
            other => Err(Error::Config(format!(
                "unknown meta-feature set `{other}` (expected `dist` or `uns`)"
            ))),
        }
    }
}

/// Named meta-feature values for one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl MetaFeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const DIST_MEASURES: [&str; 5] = ["mean", "sd", "med", "max", "min"];

pub fn ms_dist_names() -> Vec<String> {
    let mut names = Vec::with_capacity(101);
    for metric in METRIC_NAMES {
        for measure in DIST_MEASURES {
            names.push(format!("{metric}_{measure}"));
        }
    }
    names.push("size".into());
    names
}

/// Distributional meta-features: mean, population sd, median, max, and min
/// of every metric column, plus the row count.
pub fn ms_dist(d: &DefectDataset) -> Result<MetaFeatureVector> {
    if d.is_empty() {
        return Err(Error::Data(format!("dataset {} has no rows", d.id())));
    }
    let mut values = Vec::with_capacity(101);
    for j in 0..METRIC_NAMES.len() {
        let col = column(&d.rows, j);
        values.push(mean(&col));
        values.push(pop_sd(&col));
        values.push(median(&col));
        values.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        values.push(col.iter().copied().fold(f64::INFINITY, f64::min));
    }
    values.push(d.len() as f64);
    Ok(MetaFeatureVector {
        names: ms_dist_names(),
        values,
    })
}

const UNS_FAMILIES: [&str; 6] = ["mean", "sd", "entr", "corr", "skew", "kurt"];
const UNS_AGGREGATES: [&str; 4] = ["min", "max", "mean", "min/max"];
const VALIDITY_MEASURES: [&str; 3] = ["conn", "dunn", "silh"];
const CLUSTER_ALGOS: [&str; 2] = ["k", "h"];
const CLUSTER_RATIOS: [(f64, &str); 3] = [(1.0, "1"), (1.5, "1.5"), (2.0, "2")];
const CONNECTIVITY_NEIGHBORS: usize = 10;
const KMEANS_RESTARTS: usize = 10;
const KMEANS_ITERS: usize = 100;

pub fn ms_uns_names() -> Vec<String> {
    let mut names = vec!["size".to_string(), "size_lg".to_string()];
    for family in UNS_FAMILIES {
        for agg in UNS_AGGREGATES {
            names.push(format!("{family}_{agg}"));
        }
    }
    for measure in VALIDITY_MEASURES {
        for algo in CLUSTER_ALGOS {
            for (_, suffix) in CLUSTER_RATIOS {
                names.push(format!("{measure}_{algo}{suffix}"));
            }
        }
    }
    names
}

/// min, max, mean, and min/max of a family vector. Empty families and a
/// zero max for the ratio are imputed as 0.
fn aggregate(family: &str, dataset: &str, vals: &[f64]) -> [f64; 4] {
    if vals.is_empty() {
        log::warn!("{dataset}: no defined {family} values; aggregates imputed as 0");
        return [0.0; 4];
    }
    let mn = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ratio = if mx == 0.0 {
        log::warn!("{dataset}: {family} max is 0; min/max imputed as 0");
        0.0
    } else {
        mn / mx
    };
    [mn, mx, mean(vals), ratio]
}

/// Normalized entropy of one column: the column is shifted to be
/// non-negative, rescaled into a probability vector, and its entropy is
/// divided by `ln n`. Undefined cases (zero mass, single row) impute 0.
fn column_entropy(col: &[f64], dataset: &str, name: &str) -> f64 {
    let n = col.len();
    if n < 2 {
        log::warn!("{dataset}: entropy of {name} undefined for a single row; imputed as 0");
        return 0.0;
    }
    let mn = col.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = if mn < 0.0 {
        col.iter().map(|&x| x - mn).collect()
    } else {
        col.to_vec()
    };
    let total: f64 = shifted.iter().sum();
    if total <= 0.0 {
        log::warn!("{dataset}: entropy of {name} undefined for an all-zero column; imputed as 0");
        return 0.0;
    }
    let mut h = 0.0;
    for &x in &shifted {
        if x > 0.0 {
            let p = x / total;
            h -= p * p.ln();
        }
    }
    h / (n as f64).ln()
}

/// Adjusted sample skewness `n / ((n-1)(n-2)) * sum(((x - mean) / s)^3)`.
fn column_skewness(col: &[f64]) -> Option<f64> {
    let n = col.len() as f64;
    if col.len() < 3 {
        return None;
    }
    let s = sample_sd(col);
    if s == 0.0 {
        return None;
    }
    let mu = mean(col);
    let sum3: f64 = col.iter().map(|&x| ((x - mu) / s).powi(3)).sum();
    Some(n / ((n - 1.0) * (n - 2.0)) * sum3)
}

/// Adjusted excess kurtosis with the standard small-sample correction.
fn column_kurtosis(col: &[f64]) -> Option<f64> {
    let n = col.len() as f64;
    if col.len() < 4 {
        return None;
    }
    let s = sample_sd(col);
    if s == 0.0 {
        return None;
    }
    let mu = mean(col);
    let sum4: f64 = col.iter().map(|&x| ((x - mu) / s).powi(4)).sum();
    let term = n * (n + 1.0) / ((n - 1.0) * (n - 2.0) * (n - 3.0)) * sum4;
    Some(term - 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)))
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let sa = pop_sd(a);
    let sb = pop_sd(b);
    if sa == 0.0 || sb == 0.0 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64;
    Some(cov / (sa * sb))
}

/// Validity indices of one clustering.
#[derive(Debug, Clone, Copy)]
pub struct ValidityScores {
    pub connectivity: f64,
    pub dunn: f64,
    pub silhouette: f64,
}

fn validity_from_labels(rows_z: &[Vec<f64>], labels: &[usize], dataset: &str) -> ValidityScores {
    let connectivity = clustering::connectivity(rows_z, labels, CONNECTIVITY_NEIGHBORS);
    let dunn = clustering::dunn(rows_z, labels).unwrap_or_else(|| {
        log::warn!("{dataset}: every cluster has zero diameter; dunn imputed as 0");
        0.0
    });
    let silhouette = clustering::silhouette(rows_z, labels);
    ValidityScores {
        connectivity,
        dunn,
        silhouette,
    }
}

/// Clusters z-scored rows with k-means (`algo` "k") or average-linkage
/// hierarchical clustering (`algo` "h") at `k = max(2, round(2 * ratio))`
/// and reports the three validity indices.
pub fn cluster_validity(
    rows: &[Vec<f64>],
    algo: &str,
    ratio: f64,
    seed: u64,
) -> Result<ValidityScores> {
    let k = ((2.0 * ratio).round() as usize).max(2);
    let rows_z = zscored(rows);
    let labels = match algo {
        "k" => {
            let mut rng = rng_for(seed, &["kmeans", &k.to_string()]);
            clustering::kmeans(&rows_z, k, KMEANS_RESTARTS, KMEANS_ITERS, &mut rng)?
        }
        "h" => clustering::average_linkage(&rows_z).cut(k)?,
        other => return Err(Error::Config(format!("unknown clustering algorithm `{other}`"))),
    };
    Ok(validity_from_labels(&rows_z, &labels, "<ad hoc>"))
}

fn zscored(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    clustering::zscore_columns(rows)
}

/// Unsupervised meta-features. Clustering indices are imputed as 0 (with a
/// warning) when the dataset has fewer than 5 rows or a partition cannot
/// be produced.
pub fn ms_uns(d: &DefectDataset, seed: u64) -> Result<MetaFeatureVector> {
    if d.is_empty() {
        return Err(Error::Data(format!("dataset {} has no rows", d.id())));
    }
    let id = d.id();
    let n = d.len();
    let m = METRIC_NAMES.len();
    let cols: Vec<Vec<f64>> = (0..m).map(|j| column(&d.rows, j)).collect();

    let mut values = vec![n as f64, (n as f64).ln()];

    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    values.extend(aggregate("mean", &id, &means));

    let sds: Vec<f64> = cols.iter().map(|c| pop_sd(c)).collect();
    values.extend(aggregate("sd", &id, &sds));

    let entrs: Vec<f64> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| column_entropy(c, &id, METRIC_NAMES[j]))
        .collect();
    values.extend(aggregate("entr", &id, &entrs));

    let mut corrs = Vec::new();
    for j in 0..m {
        for l in j + 1..m {
            if let Some(r) = pearson(&cols[j], &cols[l]) {
                corrs.push(r);
            }
        }
    }
    values.extend(aggregate("corr", &id, &corrs));

    let skews: Vec<f64> = cols
        .iter()
        .map(|c| {
            column_skewness(c).unwrap_or_else(|| {
                log::warn!("{id}: skewness undefined for a constant or tiny column; imputed as 0");
                0.0
            })
        })
        .collect();
    values.extend(aggregate("skew", &id, &skews));

    let kurts: Vec<f64> = cols
        .iter()
        .map(|c| {
            column_kurtosis(c).unwrap_or_else(|| {
                log::warn!("{id}: kurtosis undefined for a constant or tiny column; imputed as 0");
                0.0
            })
        })
        .collect();
    values.extend(aggregate("kurt", &id, &kurts));

    // Clustering block: measure-major order, k-means before hierarchical.
    let mut validity: Vec<Option<ValidityScores>> = Vec::with_capacity(6);
    if n < 5 {
        log::warn!("{id}: fewer than 5 rows; clustering meta-features imputed as 0");
        validity.resize(6, None);
    } else {
        let rows_z = zscored(&d.rows);
        let dendrogram = clustering::average_linkage(&rows_z);
        for algo in CLUSTER_ALGOS {
            for (ratio, _) in CLUSTER_RATIOS {
                let k = ((2.0 * ratio).round() as usize).max(2);
                let labels = match algo {
                    "k" => {
                        let mut rng = rng_for(seed, &["metafeatures", &id, "kmeans", &k.to_string()]);
                        clustering::kmeans(&rows_z, k, KMEANS_RESTARTS, KMEANS_ITERS, &mut rng)
                    }
                    _ => dendrogram.cut(k),
                };
                match labels {
                    Ok(labels) => {
                        validity.push(Some(validity_from_labels(&rows_z, &labels, &id)))
                    }
                    Err(e) => {
                        log::warn!("{id}: {algo}-clustering at k = {k} failed ({e}); indices imputed as 0");
                        validity.push(None);
                    }
                }
            }
        }
    }
    // validity is ordered algo-major (k1, k1.5, k2, h1, h1.5, h2).
    for measure in VALIDITY_MEASURES {
        for v in &validity {
            values.push(match (measure, v) {
                ("conn", Some(s)) => s.connectivity,
                ("dunn", Some(s)) => s.dunn,
                ("silh", Some(s)) => s.silhouette,
                _ => 0.0,
            });
        }
    }

    debug_assert_eq!(values.len(), ms_uns_names().len());
    Ok(MetaFeatureVector {
        names: ms_uns_names(),
        values,
    })
}

/// Extracts the requested feature set for one dataset.
pub fn extract(d: &DefectDataset, kind: MetaSetKind, seed: u64) -> Result<MetaFeatureVector> {
    match kind {
        MetaSetKind::Dist => ms_dist(d),
        MetaSetKind::Uns => ms_uns(d, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DefectDataset, METRIC_COUNT};
    use crate::rng::rng_for;
    use rand::Rng;

    fn synth_dataset(n: usize) -> DefectDataset {
        let mut rng = rng_for(11, &["mf"]);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..METRIC_COUNT).map(|j| j as f64 + rng.gen::<f64>() * 3.0).collect())
            .collect();
        let bugs: Vec<u32> = (0..n).map(|i| (i % 4 == 0) as u32).collect();
        DefectDataset::new("p", "1", rows, bugs).unwrap()
    }

    #[test]
    fn distribution_set_has_101_features() {
        let names = ms_dist_names();
        assert_eq!(names.len(), 101);
        let d = synth_dataset(12);
        let fv = ms_dist(&d).unwrap();
        assert_eq!(fv.names, names);
        assert_eq!(fv.values.len(), 101);
        for probe in ["dam_med", "avg_cc_sd", "max_cc_max", "wmc_mean", "size"] {
            assert!(fv.get(probe).is_some(), "missing feature {probe}");
        }
        assert_eq!(fv.get("size"), Some(12.0));
    }

    #[test]
    fn distribution_features_match_hand_statistics() {
        let mut rows = vec![vec![0.0; METRIC_COUNT]; 3];
        for (i, v) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            rows[i][0] = v; // wmc column
        }
        let d = DefectDataset::new("p", "1", rows, vec![1, 0, 0]).unwrap();
        let fv = ms_dist(&d).unwrap();
        assert_eq!(fv.get("wmc_mean"), Some(2.0));
        let sd = fv.get("wmc_sd").unwrap();
        assert!((sd - (2.0f64 / 3.0).sqrt()).abs() < 1e-12, "population sd, got {sd}");
        assert_eq!(fv.get("wmc_med"), Some(2.0));
        assert_eq!(fv.get("wmc_max"), Some(3.0));
        assert_eq!(fv.get("wmc_min"), Some(1.0));
        assert_eq!(fv.get("size"), Some(3.0));
    }

    #[test]
    fn unsupervised_set_has_44_features() {
        let names = ms_uns_names();
        assert_eq!(names.len(), 44);
        assert_eq!(names[0], "size");
        assert_eq!(names[1], "size_lg");
        for probe in [
            "mean_min/max",
            "entr_mean",
            "corr_max",
            "skew_min",
            "kurt_min/max",
            "conn_k1",
            "conn_k1.5",
            "dunn_h2",
            "silh_h1.5",
        ] {
            assert!(names.iter().any(|n| n == probe), "missing name {probe}");
        }
        let d = synth_dataset(20);
        let fv = ms_uns(&d, 5).unwrap();
        assert_eq!(fv.names, names);
        assert_eq!(fv.values.len(), 44);
        assert_eq!(fv.get("size"), Some(20.0));
        let lg = fv.get("size_lg").unwrap();
        assert!((lg - 20.0f64.ln()).abs() < 1e-12, "natural log of n, got {lg}");
    }

    #[test]
    fn unsupervised_extraction_is_deterministic_per_seed() {
        let d = synth_dataset(25);
        let a = ms_uns(&d, 9).unwrap();
        let b = ms_uns(&d, 9).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn tiny_datasets_skip_clustering_entirely() {
        let d = synth_dataset(4);
        let fv = ms_uns(&d, 1).unwrap();
        for name in &fv.names {
            let is_validity = name.starts_with("conn_")
                || name.starts_with("dunn_")
                || name.starts_with("silh_");
            if is_validity {
                assert_eq!(fv.get(name), Some(0.0), "{name} imputed for n < 5");
            }
        }
        assert_eq!(fv.get("size"), Some(4.0));
    }

    #[test]
    fn entropy_of_a_uniform_positive_column_is_one() {
        let h = column_entropy(&[2.0, 2.0, 2.0, 2.0], "d", "c");
        assert!((h - 1.0).abs() < 1e-12, "uniform mass maximizes entropy, got {h}");
    }

    #[test]
    fn entropy_undefined_cases_impute_zero() {
        assert_eq!(column_entropy(&[5.0], "d", "c"), 0.0, "single row");
        assert_eq!(column_entropy(&[0.0, 0.0], "d", "c"), 0.0, "zero mass");
    }

    #[test]
    fn entropy_handles_negative_values_by_shifting() {
        // Shifted to [0, 2]: p = (0, 1), entropy 0.
        let h = column_entropy(&[-1.0, 1.0], "d", "c");
        assert!((h - 0.0).abs() < 1e-12, "one-hot mass has zero entropy, got {h}");
    }

    #[test]
    fn skewness_of_a_symmetric_column_is_zero() {
        let s = column_skewness(&[-1.0, 0.0, 1.0]).unwrap();
        assert!((s - 0.0).abs() < 1e-12, "got {s}");
        assert!(column_skewness(&[1.0, 1.0]).is_none(), "too short");
        assert!(column_skewness(&[2.0, 2.0, 2.0]).is_none(), "zero spread");
    }

    #[test]
    fn kurtosis_matches_the_adjusted_small_sample_form() {
        let k = column_kurtosis(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        assert!((k - -6.0).abs() < 1e-12, "hand-computed value is -6, got {k}");
        assert!(column_kurtosis(&[1.0, 2.0, 3.0]).is_none(), "too short");
    }

    #[test]
    fn pearson_detects_perfect_correlation() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_none(), "constant column");
    }

    #[test]
    fn aggregate_imputes_zero_ratio_when_max_is_zero() {
        let [mn, mx, avg, ratio] = aggregate("fam", "d", &[-2.0, 0.0]);
        assert_eq!((mn, mx, avg), (-2.0, 0.0, -1.0));
        assert_eq!(ratio, 0.0, "min/max with max 0 imputes 0");
    }

    #[test]
    fn correlated_copies_drive_corr_aggregates_to_one() {
        let mut rng = rng_for(13, &["corr"]);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let base = rng.gen::<f64>() * 10.0;
                (0..METRIC_COUNT).map(|j| base + j as f64).collect()
            })
            .collect();
        let d = DefectDataset::new("p", "1", rows, vec![0; 10]).unwrap();
        let fv = ms_uns(&d, 1).unwrap();
        for probe in ["corr_min", "corr_max", "corr_mean", "corr_min/max"] {
            let v = fv.get(probe).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{probe} should be 1, got {v}");
        }
    }

    #[test]
    fn extraction_dispatches_on_kind() {
        let d = synth_dataset(15);
        assert_eq!(extract(&d, MetaSetKind::Dist, 1).unwrap().values.len(), 101);
        assert_eq!(extract(&d, MetaSetKind::Uns, 1).unwrap().values.len(), 44);
    }

    #[test]
    fn kind_ids_round_trip() {
        assert_eq!(MetaSetKind::parse("dist").unwrap(), MetaSetKind::Dist);
        assert_eq!(MetaSetKind::parse("uns").unwrap(), MetaSetKind::Uns);
        assert_eq!(MetaSetKind::Dist.id(), "dist");
        assert!(MetaSetKind::parse("other").is_err());
    }
}
