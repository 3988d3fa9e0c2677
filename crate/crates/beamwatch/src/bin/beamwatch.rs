//! Thin CLI over the library's command layer. All logic lives in
//! `beamwatch::commands`; see the crate examples for programmatic use.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use beamwatch::commands;
use beamwatch::config::ExperimentConfig;
use beamwatch::pipeline::DetectorKind;

#[derive(Parser)]
#[command(name = "beamwatch", version, about = "Window-level anomaly detection for beam-intensity time series")]
struct Cli {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Experiment-wide seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Dotted config overrides, e.g. --set detector.tau=0.2.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the labeled synthetic corpus.
    Generate {
        /// Corpus output directory.
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
    },
    /// Split the corpus and fit detectors on the development runs.
    Train {
        /// Corpus directory (from `generate`).
        #[arg(long, default_value = "corpus")]
        corpus: PathBuf,
        /// Model output directory.
        #[arg(long, default_value = "models")]
        out: PathBuf,
        /// Detectors to fit (if-raw, pca-if, ae-if); default all.
        #[arg(long)]
        detector: Vec<DetectorKindArg>,
    },
    /// Score a run CSV (or a directory of them) with a saved model.
    Detect {
        /// Saved model bundle (model_<kind>.json).
        #[arg(long)]
        model: PathBuf,
        /// Input run CSV or directory of CSVs.
        #[arg(long)]
        input: PathBuf,
        /// Verdict CSV output path.
        #[arg(long, default_value = "verdicts.csv")]
        out: PathBuf,
    },
    /// Evaluate saved models on the held-out test runs.
    Evaluate {
        #[arg(long, default_value = "corpus")]
        corpus: PathBuf,
        #[arg(long, default_value = "models")]
        models: PathBuf,
        /// Evaluation output directory.
        #[arg(long, default_value = "eval")]
        out: PathBuf,
    },
    /// Render the evaluation outputs as a markdown report.
    Report {
        /// Evaluation directory (from `evaluate`).
        #[arg(long, default_value = "eval")]
        eval: PathBuf,
        /// Report output path; printed to stdout as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Newtype so clap can parse detector kinds via FromStr.
#[derive(Clone)]
struct DetectorKindArg(DetectorKind);

impl std::str::FromStr for DetectorKindArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<DetectorKind>()
            .map(DetectorKindArg)
            .map_err(|e| e.to_string())
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut overrides = cli.set.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;

    match cli.command {
        Command::Generate { out } => {
            let manifest = commands::cmd_generate(&cfg, &out)?;
            let windows: usize = manifest.runs.iter().map(|r| r.windows).sum();
            let global: usize = manifest.runs.iter().map(|r| r.global_windows).sum();
            let subtle: usize = manifest.runs.iter().map(|r| r.subtle_windows).sum();
            println!(
                "generated {} runs ({} windows: {} global, {} subtle) into {}",
                manifest.runs.len(),
                windows,
                global,
                subtle,
                out.display()
            );
        }
        Command::Train { corpus, out, detector } => {
            let kinds: Vec<DetectorKind> = if detector.is_empty() {
                DetectorKind::ALL.to_vec()
            } else {
                detector.iter().map(|d| d.0).collect()
            };
            let plan = commands::cmd_train(&cfg, &corpus, &out, &kinds)?;
            println!(
                "fitted {} detector(s) on {} dev runs ({} held out) into {}",
                kinds.len(),
                plan.dev_run_ids.len(),
                plan.test_run_ids.len(),
                out.display()
            );
        }
        Command::Detect { model, input, out } => {
            let verdicts = commands::cmd_detect(&model, &input, &out)?;
            let anomalous = verdicts.iter().filter(|v| v.label == 1).count();
            println!(
                "scored {} windows ({} anomalous) into {}",
                verdicts.len(),
                anomalous,
                out.display()
            );
        }
        Command::Evaluate { corpus, models, out } => {
            let doc = commands::cmd_evaluate(&cfg, &corpus, &models, &out)?;
            for r in &doc.reports {
                println!(
                    "{}: precision {:.2}, recall {:.2}, F1 {:.2}, AUC-PR {:.2}",
                    r.method, r.averaged.precision, r.averaged.recall, r.averaged.f1, r.auc_pr
                );
            }
            println!("wrote evaluation outputs to {}", out.display());
        }
        Command::Report { eval, out } => {
            let text = commands::cmd_report(&eval, out.as_deref())?;
            print!("{text}");
        }
    }
    Ok(())
}
