//! The complete comparison experiment: generate the corpus, split at run
//! level, fit IF-raw / PCA-IF / AE-IF on the development runs, evaluate on
//! the held-out test runs, and print the report.
//!
//! Usage: `cargo run --release --example full_experiment [work_dir]`
//!
//! Pass a config through the environment, e.g.
//! `BEAMWATCH_GENERATOR__N_RUNS=10 cargo run --release --example full_experiment`.

use std::path::PathBuf;
use std::time::Instant;

use beamwatch::commands;
use beamwatch::config::ExperimentConfig;
use beamwatch::pipeline::DetectorKind;

fn main() -> anyhow::Result<()> {
    let work: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/experiment".into())
        .into();
    let cfg = ExperimentConfig::load(None, &[])?;
    let corpus = work.join("corpus");
    let models = work.join("models");
    let eval = work.join("eval");

    let t = Instant::now();
    let manifest = commands::cmd_generate(&cfg, &corpus)?;
    println!("generated {} runs in {:.1?}", manifest.runs.len(), t.elapsed());

    let t = Instant::now();
    let plan = commands::cmd_train(&cfg, &corpus, &models, &DetectorKind::ALL)?;
    println!(
        "fitted 3 detectors on {} dev runs ({} test) in {:.1?}",
        plan.dev_run_ids.len(),
        plan.test_run_ids.len(),
        t.elapsed()
    );

    let t = Instant::now();
    commands::cmd_evaluate(&cfg, &corpus, &models, &eval)?;
    println!("evaluated in {:.1?}\n", t.elapsed());

    let report = commands::cmd_report(&eval, Some(&eval.join("report.md")))?;
    print!("{report}");
    println!("\nartifacts in {}", work.display());
    Ok(())
}
