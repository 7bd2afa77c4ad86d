//! Leave-one-project-out evaluation and the ranked statistical comparison.
//!
//! AUC values are rounded half-even to two decimals before ranking; rank 1
//! is the best method of a dataset row and ties receive the average of the
//! positions they cover. The Friedman test (with the standard tie
//! correction) guards a Fisher-LSD style pairwise comparison on rank sums,
//! summarized as compact letter groups.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::data::{build_pool, DefectDataset};
use crate::transfer::{run_method, CpdpMethod};
use crate::util::{mean, sample_sd};
use crate::{Error, Result};

/// Area under the ROC curve via the rank statistic: the probability that a
/// random defect-prone row scores above a random clean row, counting ties
/// as half. Equivalent to exhaustive pair enumeration.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "auc: {} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Data("auc: scores contain NaN".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("no NaN scores"));

    // Average ranks over tie groups, then sum the positive ranks.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 2) as f64 / 2.0; // 1-based ranks i+1 ..= j+1
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Half-even rounding to two decimals, returned as integer hundredths so
/// rounded values compare exactly.
pub fn to_hundredths(x: f64) -> i64 {
    (x * 100.0).round_ties_even() as i64
}

pub fn round_half_even_2dp(x: f64) -> f64 {
    to_hundredths(x) as f64 / 100.0
}

/// Ranks with 1 for the largest value; tied values share the average of
/// the positions they span.
pub fn rank_descending(values: &[i64]) -> Vec<f64> {
    let k = values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].cmp(&values[a]));
    let mut ranks = vec![0.0; k];
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j + 1 < k && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// One comparison cell, as written to `cells.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub dataset: String,
    pub method: String,
    /// None when the test labels were single-class.
    pub auc: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
}

/// AUC results for every dataset crossed with every method.
#[derive(Debug, Clone)]
pub struct PerformanceTable {
    pub dataset_ids: Vec<String>,
    pub projects: Vec<String>,
    pub method_ids: Vec<String>,
    /// Row-major: `auc[dataset][method]`.
    pub auc: Vec<Vec<Option<f64>>>,
    pub cells: Vec<CellRecord>,
}

impl PerformanceTable {
    pub fn n_datasets(&self) -> usize {
        self.dataset_ids.len()
    }

    pub fn n_methods(&self) -> usize {
        self.method_ids.len()
    }

    pub fn method_index(&self, id: &str) -> Option<usize> {
        self.method_ids.iter().position(|m| m == id)
    }

    pub fn dataset_index(&self, id: &str) -> Option<usize> {
        self.dataset_ids.iter().position(|d| d == id)
    }

    /// Rounded AUC in integer hundredths.
    pub fn rounded(&self) -> Vec<Vec<Option<i64>>> {
        self.auc
            .iter()
            .map(|row| row.iter().map(|c| c.map(to_hundredths)).collect())
            .collect()
    }

    /// Indexes of rows where every method produced a defined AUC. Only
    /// these rows participate in ranking and statistics.
    pub fn complete_rows(&self) -> Vec<usize> {
        (0..self.auc.len())
            .filter(|&i| self.auc[i].iter().all(Option::is_some))
            .collect()
    }

    /// Per-row average ranks over methods (None for incomplete rows).
    pub fn ranks(&self) -> Vec<Option<Vec<f64>>> {
        self.rounded()
            .iter()
            .map(|row| {
                let vals: Option<Vec<i64>> = row.iter().copied().collect();
                vals.map(|v| rank_descending(&v))
            })
            .collect()
    }

    /// Rank matrix restricted to complete rows.
    fn complete_ranks(&self) -> Vec<Vec<f64>> {
        self.ranks().into_iter().flatten().collect()
    }

    /// Rebuilds a table from flat cell records (e.g. a parsed `cells.csv`).
    /// Row and column order follow first appearance.
    pub fn from_cells(cells: Vec<CellRecord>) -> Result<Self> {
        let mut dataset_ids: Vec<String> = Vec::new();
        let mut method_ids: Vec<String> = Vec::new();
        for c in &cells {
            if !dataset_ids.contains(&c.dataset) {
                dataset_ids.push(c.dataset.clone());
            }
            if !method_ids.contains(&c.method) {
                method_ids.push(c.method.clone());
            }
        }
        let mut auc = vec![vec![None; method_ids.len()]; dataset_ids.len()];
        let mut filled = vec![vec![false; method_ids.len()]; dataset_ids.len()];
        for c in &cells {
            let i = dataset_ids.iter().position(|d| d == &c.dataset).unwrap();
            let j = method_ids.iter().position(|m| m == &c.method).unwrap();
            if filled[i][j] {
                return Err(Error::Data(format!(
                    "duplicate cell for dataset {} and method {}",
                    c.dataset, c.method
                )));
            }
            filled[i][j] = true;
            auc[i][j] = c.auc;
        }
        for (i, row) in filled.iter().enumerate() {
            if let Some(j) = row.iter().position(|&f| !f) {
                return Err(Error::Data(format!(
                    "missing cell for dataset {} and method {}",
                    dataset_ids[i], method_ids[j]
                )));
            }
        }
        // Projects are recovered from ids only when needed; default to the
        // id prefix before the last '-'.
        let projects = dataset_ids
            .iter()
            .map(|id| id.rsplit_once('-').map_or(id.clone(), |(p, _)| p.to_string()))
            .collect();
        Ok(Self {
            dataset_ids,
            projects,
            method_ids,
            auc,
            cells,
        })
    }
}

/// Strict leave-one-project-out evaluation of `methods` over `datasets`:
/// each dataset is scored by models that never saw any version of its
/// project. Datasets whose labels are single-class yield undefined cells.
pub fn cploo(
    datasets: &[DefectDataset],
    methods: &[CpdpMethod],
    seed: u64,
) -> Result<PerformanceTable> {
    if methods.is_empty() {
        return Err(Error::Config("no methods to evaluate".into()));
    }
    let projects: std::collections::BTreeSet<&str> =
        datasets.iter().map(|d| d.project.as_str()).collect();
    if projects.len() < 2 {
        return Err(Error::Config(
            "cross-project evaluation needs at least two projects".into(),
        ));
    }

    let degenerate: Vec<bool> = datasets
        .iter()
        .map(|d| {
            let single = d.defective_count() == 0 || d.defective_count() == d.len();
            if single {
                log::warn!("dataset {} has single-class labels; auc undefined", d.id());
            }
            single
        })
        .collect();

    let grid: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|i| (0..methods.len()).map(move |j| (i, j)))
        .collect();
    let cells: Vec<CellRecord> = grid
        .into_par_iter()
        .map(|(i, j)| -> Result<CellRecord> {
            let target = &datasets[i];
            let method = &methods[j];
            if degenerate[i] {
                return Ok(CellRecord {
                    dataset: target.id(),
                    method: method.id(),
                    auc: None,
                    seed: crate::rng::derive_seed(
                        seed,
                        &["method", &method.id(), "dataset", &target.id()],
                    ),
                    wall_ms: 0,
                });
            }
            let pool = build_pool(datasets, target)?;
            let run = run_method(method, target, &pool, seed)?;
            let value = auc(&run.scores, &target.labels)?;
            Ok(CellRecord {
                dataset: target.id(),
                method: method.id(),
                auc: Some(value),
                seed: run.seed,
                wall_ms: run.wall.as_millis() as u64,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut auc_matrix = vec![vec![None; methods.len()]; datasets.len()];
    for (flat, cell) in cells.iter().enumerate() {
        auc_matrix[flat / methods.len()][flat % methods.len()] = cell.auc;
    }
    Ok(PerformanceTable {
        dataset_ids: datasets.iter().map(|d| d.id()).collect(),
        projects: datasets.iter().map(|d| d.project.clone()).collect(),
        method_ids: methods.iter().map(|m| m.id()).collect(),
        auc: auc_matrix,
        cells,
    })
}

#[derive(Debug, Clone)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Complete dataset rows used.
    pub n: usize,
    pub k: usize,
}

/// Friedman rank test over the complete rows of the table, with the
/// standard tie correction. A fully tied table yields statistic 0, p 1.
pub fn friedman(table: &PerformanceTable) -> Result<FriedmanResult> {
    let ranks = table.complete_ranks();
    let n = ranks.len();
    let k = table.n_methods();
    if k < 2 {
        return Err(Error::Config("friedman needs at least two methods".into()));
    }
    if n < 2 {
        return Err(Error::Config(format!(
            "friedman needs at least two complete dataset rows, found {n}"
        )));
    }

    let nf = n as f64;
    let kf = k as f64;
    let mut col_sums = vec![0.0; k];
    for row in &ranks {
        for (j, &r) in row.iter().enumerate() {
            col_sums[j] += r;
        }
    }
    let numerator: f64 = 12.0
        * col_sums
            .iter()
            .map(|&s| {
                let d = s - nf * (kf + 1.0) / 2.0;
                d * d
            })
            .sum::<f64>();

    // Tie correction: sum of (t^3 - t) over tie groups of every row.
    let mut tie_sum = 0.0;
    for row in &ranks {
        let mut sorted = row.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ranks"));
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_sum += t * t * t - t;
            i = j + 1;
        }
    }
    let denominator = nf * kf * (kf + 1.0) - tie_sum / (kf - 1.0);

    let df = k - 1;
    let (statistic, p_value) = if denominator <= 1e-9 || numerator == 0.0 {
        (0.0, 1.0)
    } else {
        let stat = numerator / denominator;
        let chi = ChiSquared::new(df as f64).expect("df >= 1");
        (stat, 1.0 - chi.cdf(stat))
    };
    Ok(FriedmanResult {
        statistic,
        df,
        p_value,
        n,
        k,
    })
}

#[derive(Debug, Clone)]
pub struct PosthocResult {
    /// Least significant difference between rank sums.
    pub threshold: f64,
    pub rank_sums: Vec<f64>,
    /// `significant[i][j]` is true when methods i and j differ.
    pub significant: Vec<Vec<bool>>,
    /// Compact letter per method: methods sharing a letter do not differ.
    pub letters: Vec<String>,
}

fn letter(index: usize) -> String {
    let mut s = String::new();
    let mut i = index;
    loop {
        s.insert(0, (b'a' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s
}

/// Fisher-LSD style pairwise comparison on Friedman rank sums: two methods
/// differ when their rank sums differ by more than
/// `t(1 - alpha/2, (n-1)(k-1)) * sqrt(2n * SSE / ((n-1)(k-1)))`, where SSE
/// is the error sum of squares of the rank table. Returns None when the
/// guarding Friedman test is not significant at `alpha`.
pub fn fisher_lsd(table: &PerformanceTable, alpha: f64) -> Result<Option<PosthocResult>> {
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let fr = friedman(table)?;
    if fr.p_value > alpha {
        return Ok(None);
    }
    let ranks = table.complete_ranks();
    let n = ranks.len() as f64;
    let k = table.n_methods() as f64;

    let mut rank_sums = vec![0.0; table.n_methods()];
    let mut a2 = 0.0;
    for row in &ranks {
        for (j, &r) in row.iter().enumerate() {
            rank_sums[j] += r;
            a2 += r * r;
        }
    }
    let b2 = rank_sums.iter().map(|&s| s * s).sum::<f64>() / n;
    let sse = (a2 - b2).max(0.0);
    let df = (n - 1.0) * (k - 1.0);

    let threshold = if sse <= 1e-12 {
        // The rank table is perfectly consistent: any difference counts.
        0.0
    } else {
        let t = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        t.inverse_cdf(1.0 - alpha / 2.0) * (2.0 * n * sse / df).sqrt()
    };

    let kk = table.n_methods();
    let mut significant = vec![vec![false; kk]; kk];
    for i in 0..kk {
        for j in 0..kk {
            significant[i][j] = i != j && (rank_sums[i] - rank_sums[j]).abs() > threshold;
        }
    }

    // Compact letters: sort by rank sum ascending (best first). Because the
    // threshold is a single constant, non-significance is an interval in
    // that order; each maximal interval gets one letter.
    let mut order: Vec<usize> = (0..kk).collect();
    order.sort_by(|&a, &b| {
        rank_sums[a]
            .partial_cmp(&rank_sums[b])
            .expect("finite rank sums")
            .then(table.method_ids[a].cmp(&table.method_ids[b]))
    });
    let mut letters = vec![String::new(); kk];
    let mut next_letter = 0usize;
    let mut prev_end = 0usize; // one past the end of the previous interval
    for start in 0..kk {
        let mut end = start;
        while end + 1 < kk
            && rank_sums[order[end + 1]] - rank_sums[order[start]] <= threshold
        {
            end += 1;
        }
        if start > 0 && end < prev_end {
            continue; // contained in an earlier interval
        }
        if start == 0 || end >= prev_end {
            let l = letter(next_letter);
            next_letter += 1;
            for &idx in &order[start..=end] {
                letters[idx].push_str(&l);
            }
            prev_end = end + 1;
        }
    }

    Ok(Some(PosthocResult {
        threshold,
        rank_sums,
        significant,
        letters,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_rank: f64,
    pub sd_rank: f64,
    pub mean_auc: f64,
    pub sd_auc: f64,
}

/// Per-method mean rank and AUC over the complete rows, sorted by mean
/// rank (best first), ties by method id.
pub fn summarize(table: &PerformanceTable) -> Result<Vec<MethodSummary>> {
    let rows = table.complete_rows();
    if rows.is_empty() {
        return Err(Error::Data(
            "no complete dataset rows: every dataset has an undefined cell".into(),
        ));
    }
    let ranks = table.complete_ranks();
    let mut out = Vec::with_capacity(table.n_methods());
    for j in 0..table.n_methods() {
        let method_ranks: Vec<f64> = ranks.iter().map(|r| r[j]).collect();
        let aucs: Vec<f64> = rows
            .iter()
            .map(|&i| table.auc[i][j].expect("complete row"))
            .collect();
        out.push(MethodSummary {
            method: table.method_ids[j].clone(),
            mean_rank: mean(&method_ranks),
            sd_rank: sample_sd(&method_ranks),
            mean_auc: mean(&aucs),
            sd_auc: sample_sd(&aucs),
        });
    }
    out.sort_by(|a, b| {
        a.mean_rank
            .partial_cmp(&b.mean_rank)
            .expect("finite mean ranks")
            .then(a.method.cmp(&b.method))
    });
    Ok(out)
}
