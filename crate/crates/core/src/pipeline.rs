//! End-to-end runs: the 31-method comparison, statistics over a finished
//! cell table, meta-feature extraction, the recommender evaluation, and
//! single-dataset recommendation.
//!
//! All artifacts are plain CSV or Markdown. `cells.csv` is byte-identical
//! across runs with the same manifest and seed: the AUC column is written
//! with fixed six-decimal formatting and the wall-time column is recorded
//! as zero (measured times vary run to run; they are logged instead).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::{load_csv, load_manifest, log_transform, DefectDataset};
use crate::evaluation::{
    cploo, fisher_lsd, friedman, summarize, CellRecord, PerformanceTable,
};
use crate::metafeatures::{extract, ms_dist_names, ms_uns_names, MetaSetKind};
use crate::metalearner::{
    best_first_wrapper, meta_cploo, recommend, train_meta, MetaCplooReport, DEFAULT_LABELS,
};
use crate::rng::derive_seed;
use crate::transfer::CpdpMethod;
use crate::{Error, Result};

/// Options shared by the pipeline entry points.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Method ids to run; `None` means all 31.
    pub methods: Option<Vec<String>>,
    pub meta_set: MetaSetKind,
    pub alpha: f64,
    /// Worker threads; 0 keeps the library default.
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            out_dir: out_dir.into(),
            seed: 1,
            methods: None,
            meta_set: MetaSetKind::Dist,
            alpha: 0.05,
            jobs: 0,
        }
    }
}

/// Runs `f` inside a rayon pool sized to `jobs` (0 = default).
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(f)
}

/// Parses `--methods` values; `None` selects the full set.
pub fn resolve_methods(spec: Option<&[String]>) -> Result<Vec<CpdpMethod>> {
    let Some(ids) = spec else {
        return Ok(CpdpMethod::all());
    };
    if ids.is_empty() {
        return Err(Error::Config("method list must not be empty".into()));
    }
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let m = CpdpMethod::parse(id)?;
        if out.contains(&m) {
            return Err(Error::Config(format!("method {id} listed twice")));
        }
        out.push(m);
    }
    Ok(out)
}

fn format_auc(auc: Option<f64>) -> String {
    match auc {
        Some(v) => format!("{v:.6}"),
        None => String::new(),
    }
}

/// Writes the per-cell table. The wall_ms column is always zero so that
/// equal seeds produce byte-identical files.
pub fn write_cells_csv(path: &Path, cells: &[CellRecord]) -> Result<()> {
    let mut out = String::from("dataset,method,auc,seed,wall_ms\n");
    for c in cells {
        writeln!(out, "{},{},{},{},0", c.dataset, c.method, format_auc(c.auc), c.seed)
            .expect("string write");
        if c.wall_ms > 0 {
            log::debug!("{} x {} took {} ms", c.dataset, c.method, c.wall_ms);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a cell table written by `write_cells_csv`.
pub fn load_cells_csv(path: &Path) -> Result<Vec<CellRecord>> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Schema {
            path: shown.clone(),
            message: format!("cannot open: {e}"),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema {
            path: shown.clone(),
            message: e.to_string(),
        })?
        .clone();
    let expected = ["dataset", "method", "auc", "seed", "wall_ms"];
    let actual: Vec<&str> = headers.iter().collect();
    if actual != expected {
        return Err(Error::Schema {
            path: shown,
            message: format!("expected columns {expected:?}, found {actual:?}"),
        });
    }
    let mut cells = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            path: shown.clone(),
            row,
            message: e.to_string(),
        })?;
        let field = |j: usize| record.get(j).unwrap_or("").trim().to_string();
        let auc_text = field(2);
        let auc = if auc_text.is_empty() {
            None
        } else {
            Some(auc_text.parse::<f64>().map_err(|e| Error::Parse {
                path: shown.clone(),
                row,
                message: format!("auc: {e}"),
            })?)
        };
        let seed = field(3).parse::<u64>().map_err(|e| Error::Parse {
            path: shown.clone(),
            row,
            message: format!("seed: {e}"),
        })?;
        let wall_ms = field(4).parse::<u64>().map_err(|e| Error::Parse {
            path: shown.clone(),
            row,
            message: format!("wall_ms: {e}"),
        })?;
        cells.push(CellRecord {
            dataset: field(0),
            method: field(1),
            auc,
            seed,
            wall_ms,
        });
    }
    Ok(cells)
}

fn write_summary_csv(path: &Path, table: &PerformanceTable) -> Result<()> {
    let mut out = String::from("method,mean_rank,sd_rank,mean_auc,sd_auc\n");
    for s in summarize(table)? {
        writeln!(
            out,
            "{},{:.4},{:.4},{:.6},{:.6}",
            s.method, s.mean_rank, s.sd_rank, s.mean_auc, s.sd_auc
        )
        .expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

fn stats_markdown(table: &PerformanceTable, alpha: f64) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# Method comparison").expect("string write");
    writeln!(out).expect("string write");
    let complete = table.complete_rows().len();
    writeln!(
        out,
        "{} datasets ({} with a defined AUC for every method), {} methods.",
        table.n_datasets(),
        complete,
        table.n_methods()
    )
    .expect("string write");
    writeln!(out).expect("string write");

    if table.n_methods() < 2 {
        writeln!(out, "Only one method: no comparison to run.").expect("string write");
        return Ok(out);
    }

    let fr = friedman(table)?;
    writeln!(out, "## Friedman test").expect("string write");
    writeln!(out).expect("string write");
    writeln!(
        out,
        "chi-squared = {:.4}, df = {}, p = {:.6}",
        fr.statistic, fr.df, fr.p_value
    )
    .expect("string write");
    writeln!(out).expect("string write");

    let posthoc = fisher_lsd(table, alpha)?;
    match &posthoc {
        None => {
            writeln!(
                out,
                "p > {alpha}: no evidence the methods differ; post-hoc comparison skipped."
            )
            .expect("string write");
        }
        Some(ph) => {
            writeln!(out, "## Post-hoc comparison (alpha = {alpha})").expect("string write");
            writeln!(out).expect("string write");
            writeln!(
                out,
                "Least significant rank-sum difference: {:.4}.",
                ph.threshold
            )
            .expect("string write");
            writeln!(out, "Methods sharing a letter are indistinguishable.").expect("string write");
        }
    }
    writeln!(out).expect("string write");
    writeln!(out, "| method | mean rank | mean AUC | group |").expect("string write");
    writeln!(out, "|---|---|---|---|").expect("string write");
    let summaries = summarize(table)?;
    for s in &summaries {
        let group = match &posthoc {
            Some(ph) => {
                let j = table.method_index(&s.method).expect("summary method");
                ph.letters[j].clone()
            }
            None => "-".to_string(),
        };
        writeln!(
            out,
            "| {} | {:.3} | {:.4} | {} |",
            s.method, s.mean_rank, s.mean_auc, group
        )
        .expect("string write");
    }
    Ok(out)
}

/// Artifacts produced by `run_compare`.
#[derive(Debug, Clone)]
pub struct CompareArtifacts {
    pub table: PerformanceTable,
    pub cells_path: PathBuf,
    pub summary_path: PathBuf,
    pub stats_path: PathBuf,
}

/// Full comparison: loads the manifest, log-transforms features, runs each
/// requested method on each dataset under leave-one-project-out, and
/// writes `cells.csv`, `summary.csv`, and `stats.md`.
pub fn run_compare(cfg: &RunConfig) -> Result<CompareArtifacts> {
    let datasets = load_manifest(&cfg.manifest)?;
    let transformed = datasets
        .iter()
        .map(log_transform)
        .collect::<Result<Vec<_>>>()?;
    let methods = resolve_methods(cfg.methods.as_deref())?;
    log::info!(
        "comparing {} methods on {} datasets",
        methods.len(),
        transformed.len()
    );
    let table = with_pool(cfg.jobs, || cploo(&transformed, &methods, cfg.seed))?;

    fs::create_dir_all(&cfg.out_dir)?;
    let cells_path = cfg.out_dir.join("cells.csv");
    let summary_path = cfg.out_dir.join("summary.csv");
    let stats_path = cfg.out_dir.join("stats.md");
    write_cells_csv(&cells_path, &table.cells)?;
    write_summary_csv(&summary_path, &table)?;
    fs::write(&stats_path, stats_markdown(&table, cfg.alpha)?)?;
    Ok(CompareArtifacts {
        table,
        cells_path,
        summary_path,
        stats_path,
    })
}

/// Recomputes `stats.md` from an existing cell table.
pub fn run_stats(cells_path: &Path, out_path: &Path, alpha: f64) -> Result<()> {
    let cells = load_cells_csv(cells_path)?;
    let table = PerformanceTable::from_cells(cells)?;
    fs::write(out_path, stats_markdown(&table, alpha)?)?;
    Ok(())
}

/// Extracts the chosen meta-feature set for every manifest dataset into
/// `features_<set>.csv`. Features describe the raw metric values, so no
/// log transform is applied.
pub fn run_extract(cfg: &RunConfig) -> Result<PathBuf> {
    let datasets = load_manifest(&cfg.manifest)?;
    let names = match cfg.meta_set {
        MetaSetKind::Dist => ms_dist_names(),
        MetaSetKind::Uns => ms_uns_names(),
    };
    let mut out = String::from("dataset");
    for n in &names {
        write!(out, ",{n}").expect("string write");
    }
    out.push('\n');
    for d in &datasets {
        let id = d.id();
        let fv = extract(d, cfg.meta_set, derive_seed(cfg.seed, &["metafeatures", &id]))?;
        write!(out, "{id}").expect("string write");
        for v in &fv.values {
            write!(out, ",{v:.6}").expect("string write");
        }
        out.push('\n');
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg
        .out_dir
        .join(format!("features_{}.csv", cfg.meta_set.id()));
    fs::write(&path, out)?;
    Ok(path)
}

/// Keeps only datasets whose AUC is defined for every label method.
fn complete_label_table(
    table: PerformanceTable,
    labels: &[String],
) -> Result<PerformanceTable> {
    let cols: Vec<usize> = labels
        .iter()
        .map(|l| {
            table.method_index(l).ok_or_else(|| {
                Error::Config(format!(
                    "cell table lacks method {l}; rerun the comparison with it included"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let keep: Vec<usize> = (0..table.n_datasets())
        .filter(|&i| cols.iter().all(|&j| table.auc[i][j].is_some()))
        .collect();
    for i in 0..table.n_datasets() {
        if !keep.contains(&i) {
            log::warn!(
                "dataset {} dropped from meta-learning: undefined AUC for a label method",
                table.dataset_ids[i]
            );
        }
    }
    if keep.len() < 2 {
        return Err(Error::Data(
            "fewer than two datasets have defined AUCs for all label methods".into(),
        ));
    }
    let cells = table
        .cells
        .iter()
        .filter(|c| {
            keep.iter()
                .any(|&i| table.dataset_ids[i] == c.dataset)
        })
        .cloned()
        .collect();
    PerformanceTable::from_cells(cells)
}

/// Artifacts produced by `run_meta`.
#[derive(Debug, Clone)]
pub struct MetaArtifacts {
    pub report_accuracy: f64,
    pub majority_accuracy: f64,
    pub model_path: PathBuf,
    pub subsets_path: PathBuf,
    pub recommendations_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Builds and evaluates the recommender. Reuses `cells.csv` from the
/// output directory when present; otherwise runs the four label methods.
pub fn run_meta(cfg: &RunConfig) -> Result<MetaArtifacts> {
    let datasets = load_manifest(&cfg.manifest)?;
    let labels: Vec<String> = DEFAULT_LABELS.iter().map(|s| s.to_string()).collect();

    fs::create_dir_all(&cfg.out_dir)?;
    let cells_path = cfg.out_dir.join("cells.csv");
    let table = if cells_path.exists() {
        log::info!("reusing {}", cells_path.display());
        PerformanceTable::from_cells(load_cells_csv(&cells_path)?)?
    } else {
        let transformed = datasets
            .iter()
            .map(log_transform)
            .collect::<Result<Vec<_>>>()?;
        let methods = labels
            .iter()
            .map(|l| CpdpMethod::parse(l))
            .collect::<Result<Vec<_>>>()?;
        log::info!("no cell table found; running the {} label methods", methods.len());
        let table = with_pool(cfg.jobs, || cploo(&transformed, &methods, cfg.seed))?;
        write_cells_csv(&cells_path, &table.cells)?;
        table
    };
    let table = complete_label_table(table, &labels)?;

    let kept: Vec<DefectDataset> = table
        .dataset_ids
        .iter()
        .map(|id| {
            datasets
                .iter()
                .find(|d| &d.id() == id)
                .cloned()
                .ok_or_else(|| Error::Config(format!("cell table dataset {id} not in manifest")))
        })
        .collect::<Result<Vec<_>>>()?;

    let report = with_pool(cfg.jobs, || {
        meta_cploo(&kept, &table, cfg.meta_set, &labels, cfg.seed)
    })?;

    let subsets_path = cfg.out_dir.join("meta_subsets.csv");
    let recommendations_path = cfg.out_dir.join("meta_recommendations.csv");
    let summary_path = cfg.out_dir.join("meta_summary.md");
    let model_path = cfg.out_dir.join("meta_model.json");

    write_meta_subsets(&subsets_path, &report)?;
    write_meta_recommendations(&recommendations_path, &report)?;
    fs::write(&summary_path, meta_summary_markdown(&report, &table, &labels)?)?;

    // Final model: wrapper and training on every example.
    let wrapper = with_pool(cfg.jobs, || {
        best_first_wrapper(&report.md, derive_seed(cfg.seed, &["final-wrapper"]))
    })?;
    let mut model = train_meta(
        &report.md,
        &wrapper.subset,
        derive_seed(cfg.seed, &["final-model"]),
    )?;
    model.meta_set = cfg.meta_set;
    model.extraction_seed = cfg.seed;
    crate::metalearner::save_meta_model(&model_path, &model)?;
    log::info!(
        "final model uses {} features, estimated accuracy {:.3}",
        model.subset.len(),
        wrapper.accuracy
    );

    Ok(MetaArtifacts {
        report_accuracy: report.eval.accuracy,
        majority_accuracy: report.eval.majority_accuracy,
        model_path,
        subsets_path,
        recommendations_path,
        summary_path,
    })
}

fn write_meta_subsets(path: &Path, report: &MetaCplooReport) -> Result<()> {
    let mut out = String::from("project,train_versions,subset,est_accuracy,majority_accuracy\n");
    for f in &report.eval.folds {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4}",
            f.project,
            f.train_ids.len(),
            f.subset.join("+"),
            f.estimated_accuracy,
            f.majority_accuracy
        )
        .expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_meta_recommendations(path: &Path, report: &MetaCplooReport) -> Result<()> {
    let mut out = String::from("dataset,recommended,correct,majority_correct,recommended_auc,random_auc");
    for l in &report.md.label_universe {
        write!(out, ",conf_{l}").expect("string write");
    }
    out.push('\n');
    for (i, o) in report.eval.outcomes.iter().enumerate() {
        write!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            o.dataset_id,
            o.recommended,
            o.correct,
            o.majority_correct,
            report.recommended_auc[i],
            report.random_auc[i]
        )
        .expect("string write");
        for c in &o.confidences {
            write!(out, ",{c:.4}").expect("string write");
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Mean rank of each selection strategy (recommender, each label method,
/// random choice) over the evaluated versions.
fn strategy_ranks(
    report: &MetaCplooReport,
    table: &PerformanceTable,
    labels: &[String],
) -> Result<Vec<(String, f64, f64)>> {
    use crate::evaluation::{rank_descending, to_hundredths};
    let cols: Vec<usize> = labels
        .iter()
        .map(|l| table.method_index(l).expect("label method in table"))
        .collect();
    let mut names = vec!["recommended".to_string()];
    names.extend(labels.iter().cloned());
    names.push("random".to_string());
    let mut rank_sums = vec![0.0; names.len()];
    let mut auc_sums = vec![0.0; names.len()];
    let mut n = 0usize;
    for (i, o) in report.eval.outcomes.iter().enumerate() {
        let row = table.dataset_index(&o.dataset_id).expect("outcome dataset");
        let mut values = vec![report.recommended_auc[i]];
        for &j in &cols {
            values.push(table.auc[row][j].expect("complete label row"));
        }
        values.push(report.random_auc[i]);
        let rounded: Vec<i64> = values.iter().map(|&v| to_hundredths(v)).collect();
        let ranks = rank_descending(&rounded);
        for (s, (&r, &v)) in ranks.iter().zip(&values).enumerate() {
            rank_sums[s] += r;
            auc_sums[s] += v;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Data("no evaluated versions".into()));
    }
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(s, name)| (name, rank_sums[s] / n as f64, auc_sums[s] / n as f64))
        .collect())
}

fn meta_summary_markdown(
    report: &MetaCplooReport,
    table: &PerformanceTable,
    labels: &[String],
) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# Method recommendation").expect("string write");
    writeln!(out).expect("string write");
    writeln!(
        out,
        "{} versions across {} projects; labels: {}.",
        report.md.examples.len(),
        report.md.projects().len(),
        labels.join(", ")
    )
    .expect("string write");
    writeln!(out).expect("string write");
    writeln!(
        out,
        "Recommendation accuracy (leave-one-project-out): {:.3} (one-error {:.3}).",
        report.eval.accuracy, report.eval.one_error
    )
    .expect("string write");
    writeln!(
        out,
        "Majority baseline ({}) accuracy: {:.3}.",
        report.global_majority, report.eval.majority_accuracy
    )
    .expect("string write");
    writeln!(out).expect("string write");

    writeln!(out, "## Strategy comparison").expect("string write");
    writeln!(out).expect("string write");
    writeln!(
        out,
        "AUC per version when following each strategy; rank 1 is best."
    )
    .expect("string write");
    writeln!(out).expect("string write");
    writeln!(out, "| strategy | mean rank | mean AUC |").expect("string write");
    writeln!(out, "|---|---|---|").expect("string write");
    let mut rows = strategy_ranks(report, table, labels)?;
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    for (name, rank, auc) in rows {
        writeln!(out, "| {name} | {rank:.3} | {auc:.4} |").expect("string write");
    }
    writeln!(out).expect("string write");

    writeln!(out, "## Per-fold feature subsets").expect("string write");
    writeln!(out).expect("string write");
    for f in &report.eval.folds {
        writeln!(
            out,
            "- {}: {} (estimated accuracy {:.3})",
            f.project,
            f.subset.join(", "),
            f.estimated_accuracy
        )
        .expect("string write");
    }
    Ok(out)
}

/// A recommendation for one dataset.
#[derive(Debug, Clone)]
pub struct Recommendation {
    pub dataset_id: String,
    pub label: String,
    pub universe: Vec<String>,
    pub confidences: Vec<f64>,
}

/// Derives project and version from a dataset file name such as
/// `ant-1.7.csv`.
pub fn dataset_id_from_path(path: &Path) -> (String, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".to_string());
    match stem.rsplit_once('-') {
        Some((p, v)) if !p.is_empty() && !v.is_empty() => (p.to_string(), v.to_string()),
        _ => (stem, "0".to_string()),
    }
}

/// Loads a saved model and recommends a method for one dataset CSV.
pub fn run_recommend(model_path: &Path, target_csv: &Path) -> Result<Recommendation> {
    let model = crate::metalearner::load_meta_model(model_path)?;
    let (project, version) = dataset_id_from_path(target_csv);
    let dataset = load_csv(target_csv, &project, &version)?;
    let id = dataset.id();
    let fv = extract(
        &dataset,
        model.meta_set,
        derive_seed(model.extraction_seed, &["metafeatures", &id]),
    )?;
    let (label, confidences) = recommend(&model, &fv)?;
    Ok(Recommendation {
        dataset_id: id,
        label,
        universe: model.label_universe.clone(),
        confidences,
    })
}
