//! Generates the labeled synthetic beam-intensity corpus and prints the
//! per-run anomaly inventory.
//!
//! Usage: `cargo run --release --example generate_corpus [out_dir]`

use std::path::PathBuf;

use beamwatch::commands;
use beamwatch::config::ExperimentConfig;

fn main() -> anyhow::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/corpus".into())
        .into();
    let cfg = ExperimentConfig::default().normalized();
    let manifest = commands::cmd_generate(&cfg, &out)?;

    println!("corpus written to {}\n", out.display());
    println!("{:<10} {:>8} {:>8} {:>8} {:>8}", "run", "samples", "windows", "global", "subtle");
    for r in &manifest.runs {
        println!(
            "{:<10} {:>8} {:>8} {:>8} {:>8}",
            r.id, r.samples, r.windows, r.global_windows, r.subtle_windows
        );
    }
    let windows: usize = manifest.runs.iter().map(|r| r.windows).sum();
    let global: usize = manifest.runs.iter().map(|r| r.global_windows).sum();
    let subtle: usize = manifest.runs.iter().map(|r| r.subtle_windows).sum();
    println!(
        "\ntotal: {} windows, {:.2}% global, {:.2}% subtle",
        windows,
        100.0 * global as f64 / windows as f64,
        100.0 * subtle as f64 / windows as f64
    );
    Ok(())
}
