//! Unsupervised anomaly detection for univariate sensor time series.
//!
//! `beamwatch` implements three detectors over non-overlapping windows of a
//! 1 Hz intensity signal and a harness to compare them:
//!
//! - **IF-raw** — an isolation forest fitted directly on standardized windows,
//! - **PCA-IF** — an isolation forest on PCA-reduced windows,
//! - **AE-IF** — an isolation forest on the one-dimensional Mean Cubic Error
//!   (MCE) of windows reconstructed by an autoencoder trained on normal data
//!   only.
//!
//! A labeled synthetic generator ([`synth`]) stands in for real beam data and
//! injects both *global* anomalies (samples leaving an expert interval
//! `[s_low, s_high]`) and *subtle* ones (all samples inside the interval but
//! with within-window variability above `alpha`).
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example generate_corpus
//! cargo run --release --example isolate_outliers
//! cargo run --release --example reconstruction_features
//! cargo run --release --example full_experiment
//! cargo run --release --example separability
//! ```
//!
//! or drive everything through the `beamwatch` binary
//! (`generate` / `train` / `detect` / `evaluate` / `report`).

pub mod autoencoder;
pub mod commands;
pub mod config;
pub mod error;
pub mod forest;
pub mod metrics;
pub mod pca;
pub mod pipeline;
pub mod series;
pub mod synth;

pub use error::Error;

/// Stable 64-bit stream derivation: hashes a base seed and a salt so every
/// stage (generation, training, splitting, ...) gets an independent RNG
/// stream from one top-level seed. FNV-1a; never change the constants, model
/// bundles and corpora on disk depend on them.
pub fn derive_seed(base: u64, salt: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in base.to_le_bytes().iter().chain(salt.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
