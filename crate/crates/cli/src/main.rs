//! Command-line front end for the cross-project defect prediction toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpdp::metafeatures::MetaSetKind;
use cpdp::pipeline::{
    run_compare, run_extract, run_meta, run_recommend, run_stats, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "cpdp",
    version,
    about = "Cross-project defect prediction: method comparison and recommendation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Manifest listing dataset CSVs (`project version path` per line).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for result files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed for every randomized step.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = automatic).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method on every dataset and write cells.csv, summary.csv,
    /// and stats.md.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated method ids (default: all 31).
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Significance level for the post-hoc comparison.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Evaluate the method recommender and train a final model.
    Meta {
        #[command(flatten)]
        common: CommonArgs,
        /// Meta-feature set to use.
        #[arg(long, default_value = "dist", value_parser = parse_meta_set)]
        meta_set: MetaSetKind,
    },
    /// Write the meta-feature values of every manifest dataset.
    ExtractFeatures {
        #[command(flatten)]
        common: CommonArgs,
        /// Meta-feature set to use.
        #[arg(long, default_value = "dist", value_parser = parse_meta_set)]
        meta_set: MetaSetKind,
    },
    /// Recommend a method for a single dataset CSV.
    Recommend {
        /// Trained model produced by `cpdp meta`.
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV named like `project-version.csv`.
        #[arg(long)]
        target: PathBuf,
    },
    /// Recompute stats.md from an existing cells.csv.
    Stats {
        /// Cell table written by `cpdp compare`.
        #[arg(long)]
        cells: PathBuf,
        /// Output Markdown path.
        #[arg(long, default_value = "stats.md")]
        out: PathBuf,
        /// Significance level for the post-hoc comparison.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

fn parse_meta_set(s: &str) -> Result<MetaSetKind, String> {
    MetaSetKind::parse(s).map_err(|e| e.to_string())
}

fn config(common: CommonArgs) -> RunConfig {
    let mut cfg = RunConfig::new(common.manifest, common.out);
    cfg.seed = common.seed;
    cfg.jobs = common.jobs;
    cfg
}

fn run(cli: Cli) -> cpdp::Result<()> {
    match cli.command {
        Command::Compare {
            common,
            methods,
            alpha,
        } => {
            let mut cfg = config(common);
            cfg.methods = methods;
            cfg.alpha = alpha;
            let artifacts = run_compare(&cfg)?;
            println!("wrote {}", artifacts.cells_path.display());
            println!("wrote {}", artifacts.summary_path.display());
            println!("wrote {}", artifacts.stats_path.display());
        }
        Command::Meta { common, meta_set } => {
            let mut cfg = config(common);
            cfg.meta_set = meta_set;
            let artifacts = run_meta(&cfg)?;
            println!(
                "recommendation accuracy {:.3} (majority baseline {:.3})",
                artifacts.report_accuracy, artifacts.majority_accuracy
            );
            println!("wrote {}", artifacts.subsets_path.display());
            println!("wrote {}", artifacts.recommendations_path.display());
            println!("wrote {}", artifacts.summary_path.display());
            println!("wrote {}", artifacts.model_path.display());
        }
        Command::ExtractFeatures { common, meta_set } => {
            let mut cfg = config(common);
            cfg.meta_set = meta_set;
            let path = run_extract(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Recommend { model, target } => {
            let rec = run_recommend(&model, &target)?;
            println!("{}: use {}", rec.dataset_id, rec.label);
            for (label, conf) in rec.universe.iter().zip(&rec.confidences) {
                println!("  {label}: {conf:.4}");
            }
        }
        Command::Stats { cells, out, alpha } => {
            run_stats(&cells, &out, alpha)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
