//! Data model: the fixed 20-metric schema, dataset loading, the natural-log
//! preprocessing step, and cross-project training pools.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Object-oriented code metrics, in canonical column order. Every dataset
/// row stores exactly these attributes in exactly this order.
pub const METRIC_NAMES: [&str; 20] = [
    "wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3", "loc", "dam", "moa",
    "mfa", "cam", "ic", "cbm", "amc", "max_cc", "avg_cc",
];

pub const METRIC_COUNT: usize = METRIC_NAMES.len();

/// Name of the defect-count column in input CSV files.
pub const BUG_COLUMN: &str = "bug";

/// One released version of a project: a metric matrix plus defect counts.
#[derive(Debug, Clone)]
pub struct DefectDataset {
    pub project: String,
    pub version: String,
    /// n rows, each with `METRIC_COUNT` values in schema order.
    pub rows: Vec<Vec<f64>>,
    pub bug_counts: Vec<u32>,
    /// `labels[i]` is true exactly when `bug_counts[i] > 0`.
    pub labels: Vec<bool>,
}

impl DefectDataset {
    pub fn new(
        project: impl Into<String>,
        version: impl Into<String>,
        rows: Vec<Vec<f64>>,
        bug_counts: Vec<u32>,
    ) -> Result<Self> {
        let project = project.into();
        let version = version.into();
        if rows.len() != bug_counts.len() {
            return Err(Error::Data(format!(
                "dataset {project}-{version}: {} rows but {} bug counts",
                rows.len(),
                bug_counts.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != METRIC_COUNT {
                return Err(Error::Data(format!(
                    "dataset {project}-{version}: row {i} has {} values, expected {METRIC_COUNT}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "dataset {project}-{version}: non-finite value in row {i}, column {}",
                    METRIC_NAMES[j]
                )));
            }
        }
        let labels = bug_counts.iter().map(|&c| c > 0).collect();
        Ok(Self {
            project,
            version,
            rows,
            bug_counts,
            labels,
        })
    }

    /// Unique dataset identifier, e.g. `ant-1.3`.
    pub fn id(&self) -> String {
        format!("{}-{}", self.project, self.version)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn defective_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn defect_rate(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.defective_count() as f64 / self.len() as f64
        }
    }
}

/// Applies `x -> ln(1 + x)` to every metric cell. Raw object-oriented
/// metrics are heavily right-skewed; models train on the damped scale.
/// Negative inputs are rejected.
pub fn log_transform(d: &DefectDataset) -> Result<DefectDataset> {
    let mut rows = Vec::with_capacity(d.rows.len());
    for (i, row) in d.rows.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, &v) in row.iter().enumerate() {
            if v < 0.0 {
                return Err(Error::Data(format!(
                    "dataset {}: negative value {v} in row {i}, column {}; \
                     log preprocessing requires non-negative metrics",
                    d.id(),
                    METRIC_NAMES[j]
                )));
            }
            out.push((1.0 + v).ln());
        }
        rows.push(out);
    }
    DefectDataset::new(d.project.clone(), d.version.clone(), rows, d.bug_counts.clone())
}

/// Every version of every project other than the target project.
/// Strict cross-project evaluation: no version of the target project may
/// contribute training data.
#[derive(Debug)]
pub struct CrossProjectPool<'a> {
    pub datasets: Vec<&'a DefectDataset>,
    pub target_project: String,
}

impl CrossProjectPool<'_> {
    pub fn total_rows(&self) -> usize {
        self.datasets.iter().map(|d| d.len()).sum()
    }

    /// Concatenates all pool datasets in pool order.
    pub fn concat(&self) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rows = Vec::with_capacity(self.total_rows());
        let mut labels = Vec::with_capacity(self.total_rows());
        for d in &self.datasets {
            rows.extend(d.rows.iter().cloned());
            labels.extend(d.labels.iter().copied());
        }
        (rows, labels)
    }
}

/// Builds the training pool for `target`: all datasets whose project differs
/// from the target project, in input order.
pub fn build_pool<'a>(
    all: &'a [DefectDataset],
    target: &DefectDataset,
) -> Result<CrossProjectPool<'a>> {
    if !all.iter().any(|d| d.id() == target.id()) {
        return Err(Error::Config(format!(
            "target dataset {} is not part of the loaded collection",
            target.id()
        )));
    }
    let datasets: Vec<&DefectDataset> = all
        .iter()
        .filter(|d| d.project != target.project)
        .collect();
    if datasets.is_empty() {
        return Err(Error::Config(format!(
            "no cross-project training data: every dataset belongs to project {}",
            target.project
        )));
    }
    Ok(CrossProjectPool {
        datasets,
        target_project: target.project.clone(),
    })
}

/// One line of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub project: String,
    pub version: String,
}

/// Parses manifest text: one `path project version` triple per line,
/// whitespace separated, `#` starts a comment. Relative paths are resolved
/// against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path, origin: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: origin.to_string(),
                row: lineno + 1,
                message: format!(
                    "expected `path project version`, found {} field(s)",
                    fields.len()
                ),
            });
        }
        let mut path = PathBuf::from(fields[0]);
        if path.is_relative() {
            path = base_dir.join(path);
        }
        let entry = ManifestEntry {
            path,
            project: fields[1].to_string(),
            version: fields[2].to_string(),
        };
        if !seen.insert((entry.project.clone(), entry.version.clone())) {
            return Err(Error::Config(format!(
                "manifest {origin}: duplicate dataset {}-{}",
                entry.project, entry.version
            )));
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::Config(format!("manifest {origin}: no datasets listed")));
    }
    Ok(entries)
}

/// Loads every dataset listed in a manifest file.
pub fn load_manifest(manifest: &Path) -> Result<Vec<DefectDataset>> {
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::Config(format!(
        "cannot read manifest {}: {e}",
        manifest.display()
    )))?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let entries = parse_manifest(&text, base, &manifest.display().to_string())?;
    entries
        .iter()
        .map(|e| load_csv(&e.path, &e.project, &e.version))
        .collect()
}

fn parse_bug_cell(cell: &str) -> Option<u32> {
    let t = cell.trim();
    if t.eq_ignore_ascii_case("true") {
        return Some(1);
    }
    if t.eq_ignore_ascii_case("false") {
        return Some(0);
    }
    if let Ok(v) = t.parse::<u32>() {
        return Some(v);
    }
    // Some exports write counts as floats ("2.0").
    if let Ok(v) = t.parse::<f64>() {
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            return Some(v as u32);
        }
    }
    None
}

/// Loads one dataset from CSV. The header must contain all metric columns
/// and a `bug` column; identifier and other extra columns are ignored.
pub fn load_csv(path: &Path, project: &str, version: &str) -> Result<DefectDataset> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Schema {
            path: shown.clone(),
            message: format!("cannot open: {e}"),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema {
            path: shown.clone(),
            message: format!("cannot read header: {e}"),
        })?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();

    let mut metric_cols = Vec::with_capacity(METRIC_COUNT);
    for name in METRIC_NAMES {
        match headers.iter().position(|h| h == name) {
            Some(idx) => metric_cols.push(idx),
            None => {
                return Err(Error::Schema {
                    path: shown,
                    message: format!("missing metric column `{name}`"),
                })
            }
        }
    }
    let bug_col = headers
        .iter()
        .position(|h| h == BUG_COLUMN)
        .ok_or_else(|| Error::Schema {
            path: shown.clone(),
            message: format!("missing `{BUG_COLUMN}` column"),
        })?;

    let used: BTreeSet<usize> = metric_cols.iter().copied().chain([bug_col]).collect();
    let ignored: Vec<&str> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !used.contains(i))
        .map(|(_, h)| h.as_str())
        .collect();
    if !ignored.is_empty() {
        log::warn!("{shown}: ignoring column(s) {}", ignored.join(", "));
    }

    let mut rows = Vec::new();
    let mut bug_counts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: shown.clone(),
            row: i + 1,
            message: e.to_string(),
        })?;
        let mut row = Vec::with_capacity(METRIC_COUNT);
        for (&col, name) in metric_cols.iter().zip(METRIC_NAMES) {
            let cell = record.get(col).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: shown.clone(),
                row: i + 1,
                message: format!("column `{name}`: `{cell}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: shown.clone(),
                    row: i + 1,
                    message: format!("column `{name}`: non-finite value"),
                });
            }
            row.push(value);
        }
        let bug_cell = record.get(bug_col).unwrap_or("");
        let bugs = parse_bug_cell(bug_cell).ok_or_else(|| Error::Parse {
            path: shown.clone(),
            row: i + 1,
            message: format!("column `{BUG_COLUMN}`: `{bug_cell}` is not a defect count"),
        })?;
        rows.push(row);
        bug_counts.push(bugs);
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{shown}: dataset has no rows")));
    }
    DefectDataset::new(project, version, rows, bug_counts)
}
