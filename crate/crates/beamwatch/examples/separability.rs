//! Measures how far subtle anomalies sit from the normal population in each
//! feature space (standardized raw window, PCA reduction, 1-D MCE) on a
//! freshly generated corpus.
//!
//! Usage: `cargo run --release --example separability`

use beamwatch::config::ExperimentConfig;
use beamwatch::metrics;
use beamwatch::pipeline::{self, DetectorKind};
use beamwatch::series::segment;
use beamwatch::synth::{self, GeneratorConfig};

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig {
        generator: GeneratorConfig {
            n_runs: 6,
            run_length_s: 12_000,
            ..GeneratorConfig::default()
        },
        ..ExperimentConfig::default()
    }
    .normalized();

    let runs = synth::generate_corpus(&cfg.generator)?;
    let mut windows = Vec::new();
    for r in &runs {
        let mut ws = segment(r, cfg.detector.window)?;
        synth::classify_windows(&mut ws, &cfg.generator.anomaly);
        windows.extend(ws);
    }
    let labels: Vec<_> = windows.iter().map(|w| w.label.unwrap()).collect();

    let mut spaces = Vec::new();
    for (kind, name) in [
        (DetectorKind::IfRaw, "raw"),
        (DetectorKind::PcaIf, "pca"),
        (DetectorKind::AeIf, "mce"),
    ] {
        let det = pipeline::fit_detector(kind, &windows, &cfg.detector)?;
        let feats = windows
            .iter()
            .map(|w| det.feature_map(w))
            .collect::<Result<Vec<_>, _>>()?;
        spaces.push((name.to_string(), feats));
    }

    let report = metrics::separability(&spaces, &labels)?;
    println!("median normalized distance of subtle anomalies from normal:\n");
    for s in &report.spaces {
        println!("{:<5} {:>10.3}   ({} instances)", s.space, s.median, s.distances.len());
    }
    Ok(())
}
