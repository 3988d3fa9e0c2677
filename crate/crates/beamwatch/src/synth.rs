//! Labeled synthetic beam-intensity generator.
//!
//! Stands in for an unavailable production corpus: each run is a slowly
//! drifting baseline plus Gaussian noise, with anomaly segments injected at
//! window granularity. Global anomalies push at least one sample outside the
//! expert interval `[s_low, s_high]` (dropout to near zero, transient spike,
//! linear sag crossing `s_low`); subtle anomalies stay inside the interval
//! but raise within-window variability above `alpha` (bounded oscillation).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::series::{Run, Window, WindowLabel};

/// Within-window variability measure used by the subtle-anomaly rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variability {
    /// Peak-to-peak range (max - min). The default: `alpha` is stated in
    /// intensity units.
    #[default]
    Range,
    /// Population standard deviation.
    StdDev,
}

/// Expert thresholds and injection rates for the anomaly taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnomalySpec {
    pub s_low: f64,
    pub s_high: f64,
    /// Subtle-variability bound, in intensity units.
    pub alpha: f64,
    /// Fraction of windows carrying global anomalies.
    pub global_rate: f64,
    /// Fraction of windows carrying subtle anomalies.
    pub subtle_rate: f64,
    pub variability: Variability,
}

impl Default for AnomalySpec {
    fn default() -> Self {
        AnomalySpec {
            s_low: 90.0,
            s_high: 110.0,
            alpha: 5.0,
            global_rate: 0.05,
            subtle_rate: 0.05,
            variability: Variability::Range,
        }
    }
}

impl AnomalySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_low < self.s_high) {
            return Err(Error::InvalidConfig(format!(
                "s_low ({}) must be < s_high ({})",
                self.s_low, self.s_high
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig("alpha must be > 0".into()));
        }
        for (name, r) in [("global_rate", self.global_rate), ("subtle_rate", self.subtle_rate)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1), got {r}")));
            }
        }
        if self.global_rate + self.subtle_rate >= 1.0 {
            return Err(Error::InvalidConfig(
                "global_rate + subtle_rate must be < 1".into(),
            ));
        }
        Ok(())
    }

    fn variability_of(&self, values: &[f64]) -> f64 {
        match self.variability {
            Variability::Range => {
                let mut mn = f64::INFINITY;
                let mut mx = f64::NEG_INFINITY;
                for &v in values {
                    mn = mn.min(v);
                    mx = mx.max(v);
                }
                mx - mn
            }
            Variability::StdDev => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
            }
        }
    }
}

/// Corpus-level generator settings. `seed` and `window` are normally filled
/// in from the experiment-wide values by the CLI layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_runs: usize,
    /// Run duration in seconds; samples are emitted at 1 Hz.
    pub run_length_s: usize,
    pub baseline: f64,
    /// Gaussian noise scale of normal operation.
    pub noise_std: f64,
    /// Amplitude of the slow baseline drift; 0 disables it.
    pub drift_amplitude: f64,
    pub drift_period_s: f64,
    /// Peak amplitude of the benign fast ripple present in normal operation
    /// (same period band as subtle anomalies but small enough that window
    /// variability stays below `alpha`); 0 disables it.
    pub ripple_amplitude: f64,
    /// Fixed period of the benign ripple — a plant characteristic, identical
    /// across runs.
    pub ripple_period_s: f64,
    pub seed: u64,
    /// Window length used to align injected segments and express rates.
    pub window: usize,
    pub anomaly: AnomalySpec,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_runs: 25,
            run_length_s: 50_000,
            baseline: 100.0,
            noise_std: 0.3,
            drift_amplitude: 3.5,
            drift_period_s: 6000.0,
            ripple_amplitude: 1.5,
            ripple_period_s: 7.3,
            seed: 42,
            window: 6,
            anomaly: AnomalySpec::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.anomaly.validate()?;
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("n_runs must be >= 1".into()));
        }
        if self.window < 2 {
            return Err(Error::InvalidConfig("window must be >= 2".into()));
        }
        if self.run_length_s < self.window {
            return Err(Error::InvalidConfig(
                "run_length_s must be at least one window".into(),
            ));
        }
        if !(self.noise_std > 0.0) {
            return Err(Error::InvalidConfig("noise_std must be > 0".into()));
        }
        if self.drift_amplitude < 0.0 || !(self.drift_period_s > 0.0) {
            return Err(Error::InvalidConfig("invalid drift settings".into()));
        }
        if self.ripple_amplitude < 0.0 || !(self.ripple_period_s > 0.0) {
            return Err(Error::InvalidConfig("invalid ripple settings".into()));
        }
        // The benign ripple must not push a normal window's variability over
        // the subtle bound (2 * peak amplitude plus noise headroom).
        if 2.0 * self.ripple_amplitude + 5.0 * self.noise_std > self.anomaly.alpha {
            return Err(Error::InvalidConfig(
                "ripple_amplitude too large: normal windows would exceed alpha".into(),
            ));
        }
        let a = &self.anomaly;
        if self.baseline <= a.s_low || self.baseline >= a.s_high {
            return Err(Error::InvalidConfig(
                "baseline must lie strictly inside [s_low, s_high]".into(),
            ));
        }
        Ok(())
    }
}

/// Value-based window classification: global if any sample leaves
/// `[s_low, s_high]`, else subtle if the within-window variability exceeds
/// `alpha`, else normal.
pub fn label_window(values: &[f64], spec: &AnomalySpec) -> WindowLabel {
    if values.iter().any(|&v| v < spec.s_low || v > spec.s_high) {
        WindowLabel::Global
    } else if spec.variability_of(values) > spec.alpha {
        WindowLabel::Subtle
    } else {
        WindowLabel::Normal
    }
}

/// Refines sample-derived window labels into the global/subtle taxonomy.
///
/// Ground-truth `Normal` windows are kept as-is; `Anomalous` windows are
/// classified by [`label_window`]. A perturbed window whose values happen to
/// be indistinguishable from normal stays `Anomalous`.
pub fn classify_windows(windows: &mut [Window], spec: &AnomalySpec) {
    for w in windows {
        if w.label == Some(WindowLabel::Anomalous) {
            match label_window(&w.values, spec) {
                WindowLabel::Normal => {}
                cls => w.label = Some(cls),
            }
        }
    }
}

/// Per-run anomaly inventory recorded in the corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInventory {
    pub id: String,
    pub samples: usize,
    pub windows: usize,
    pub global_windows: usize,
    pub subtle_windows: usize,
}

/// Corpus manifest: the full generator config plus what was injected where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub config: GeneratorConfig,
    pub runs: Vec<RunInventory>,
}

impl CorpusManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Free,
    Global,
    Subtle,
}

/// Generates the corpus. Deterministic for a fixed seed; each run draws its
/// own RNG stream from `(seed, run index)` so runs are independent.
pub fn generate_corpus(cfg: &GeneratorConfig) -> Result<Vec<Run>> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.n_runs);
    for i in 0..cfg.n_runs {
        runs.push(generate_run(cfg, i));
    }
    Ok(runs)
}

/// Generates the corpus together with its manifest.
pub fn generate_corpus_with_manifest(cfg: &GeneratorConfig) -> Result<(Vec<Run>, CorpusManifest)> {
    let runs = generate_corpus(cfg)?;
    let inventories = runs
        .iter()
        .map(|r| inventory_of(r, cfg))
        .collect::<Vec<_>>();
    Ok((
        runs,
        CorpusManifest {
            config: cfg.clone(),
            runs: inventories,
        },
    ))
}

fn inventory_of(run: &Run, cfg: &GeneratorConfig) -> RunInventory {
    let mut windows = crate::series::segment(run, cfg.window).expect("valid window length");
    classify_windows(&mut windows, &cfg.anomaly);
    let global = windows
        .iter()
        .filter(|w| matches!(w.label, Some(WindowLabel::Global) | Some(WindowLabel::Anomalous)))
        .count();
    let subtle = windows
        .iter()
        .filter(|w| w.label == Some(WindowLabel::Subtle))
        .count();
    RunInventory {
        id: run.id.clone(),
        samples: run.len(),
        windows: windows.len(),
        global_windows: global,
        subtle_windows: subtle,
    }
}

fn generate_run(cfg: &GeneratorConfig, index: usize) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("synth/run/{index}")));
    let n = cfg.run_length_s;
    let k = cfg.window;
    let n_w = n / k;
    let spec = &cfg.anomaly;

    // Base signal: baseline + slow two-tone drift + benign amplitude-
    // modulated ripple + white noise. The ripple shares the subtle-anomaly
    // period band but its peak amplitude keeps window variability below
    // alpha, so oscillation per se is normal operation.
    let phi1 = rng.gen_range(0.0..std::f64::consts::TAU);
    let phi2 = rng.gen_range(0.0..std::f64::consts::TAU);
    let w1 = std::f64::consts::TAU / cfg.drift_period_s;
    let w2 = std::f64::consts::TAU / (cfg.drift_period_s * 0.37);
    let ripple_phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let env_phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let w_r = std::f64::consts::TAU / cfg.ripple_period_s;
    let w_env = std::f64::consts::TAU / (cfg.drift_period_s / 3.0);
    let mut values: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            let drift = cfg.drift_amplitude * (0.7 * (w1 * t + phi1).sin() + 0.3 * (w2 * t + phi2).sin());
            let ripple =
                cfg.ripple_amplitude * (w_env * t + env_phase).sin().abs() * (w_r * t + ripple_phase).sin();
            cfg.baseline + drift + ripple + gaussian(&mut rng, cfg.noise_std)
        })
        .collect();
    let mut labels = vec![false; n];
    let mut slots = vec![Slot::Free; n_w];

    let target_global = (spec.global_rate * n_w as f64).round() as usize;
    let target_subtle = (spec.subtle_rate * n_w as f64).round() as usize;

    inject_global(cfg, &mut rng, &mut values, &mut labels, &mut slots, target_global);
    inject_subtle(cfg, &mut rng, &mut values, &mut labels, &mut slots, target_subtle);

    // Normal windows must stay inside the expert interval; any violator is
    // relabeled global-anomalous at its violating samples.
    for (w, slot) in slots.iter().enumerate() {
        if *slot != Slot::Free {
            continue;
        }
        for t in w * k..(w + 1) * k {
            if values[t] < spec.s_low || values[t] > spec.s_high {
                labels[t] = true;
            }
        }
    }

    let timestamps: Vec<f64> = (0..n).map(|t| t as f64).collect();
    Run::new(format!("run_{index:02}"), timestamps, values, Some(labels))
        .expect("generated run is well formed")
}

fn gaussian(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    // Box-Muller; two uniforms per sample keeps the stream layout simple.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    std * (-2.0 * u1.ln()).sqrt() * u2.cos()
}

/// Finds a contiguous stretch of free window slots. Falls back to the
/// largest free gap when random placement keeps colliding.
fn place(rng: &mut ChaCha8Rng, slots: &[Slot], want: usize) -> Option<(usize, usize)> {
    let n_w = slots.len();
    if want == 0 || n_w == 0 {
        return None;
    }
    let want = want.min(n_w);
    for _ in 0..200 {
        let start = rng.gen_range(0..n_w);
        if start + want <= n_w && slots[start..start + want].iter().all(|s| *s == Slot::Free) {
            return Some((start, want));
        }
    }
    // Largest free gap.
    let mut best: Option<(usize, usize)> = None;
    let mut gap_start = 0usize;
    let mut gap_len = 0usize;
    for (i, s) in slots.iter().enumerate() {
        if *s == Slot::Free {
            if gap_len == 0 {
                gap_start = i;
            }
            gap_len += 1;
        } else {
            if gap_len > best.map_or(0, |b| b.1) {
                best = Some((gap_start, gap_len));
            }
            gap_len = 0;
        }
    }
    if gap_len > best.map_or(0, |b| b.1) {
        best = Some((gap_start, gap_len));
    }
    best.map(|(s, l)| (s, l.min(want)))
}

fn inject_global(
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    values: &mut [f64],
    labels: &mut [bool],
    slots: &mut [Slot],
    target: usize,
) {
    let k = cfg.window;
    let spec = &cfg.anomaly;
    let mut remaining = target;
    while remaining > 0 {
        let template = rng.gen_range(0..3u32);
        let dur_s = match template {
            0 => rng.gen_range(10.0..600.0), // dropout
            1 => k as f64,                   // spike: one window
            _ => rng.gen_range(30.0..300.0), // sag
        };
        let dur_w = ((dur_s / k as f64).round() as usize).clamp(1, remaining);
        let Some((start_w, dur_w)) = place(rng, slots, dur_w) else {
            break;
        };
        for s in &mut slots[start_w..start_w + dur_w] {
            *s = Slot::Global;
        }
        remaining -= dur_w;
        let (lo, hi) = (start_w * k, (start_w + dur_w) * k);
        match template {
            0 => {
                // Full dropout to near zero.
                let level = rng.gen_range(0.0..1.0);
                for t in lo..hi {
                    values[t] = (level + gaussian(rng, 0.1)).max(0.0);
                    labels[t] = true;
                }
            }
            1 => {
                // Transient spike above s_high, 1-5 s inside the window.
                let len = rng.gen_range(1..=5.min(k));
                let off = rng.gen_range(0..=k - len);
                for t in lo + off..lo + off + len {
                    values[t] = spec.s_high + rng.gen_range(2.0..15.0) + gaussian(rng, 0.2);
                    labels[t] = true;
                }
            }
            _ => {
                // Linear sag crossing s_low and recovering.
                let trough = spec.s_low - rng.gen_range(2.0..12.0);
                let depth = cfg.baseline - trough;
                let m = (hi - lo) as f64;
                for t in lo..hi {
                    let u = (t - lo) as f64 / (m - 1.0).max(1.0);
                    values[t] -= depth * (1.0 - (2.0 * u - 1.0).abs());
                    labels[t] = true;
                }
            }
        }
    }
}

fn inject_subtle(
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    values: &mut [f64],
    labels: &mut [bool],
    slots: &mut [Slot],
    target: usize,
) {
    let k = cfg.window;
    let spec = &cfg.anomaly;
    let mut remaining = target;
    while remaining > 0 {
        let dur_s = rng.gen_range(k as f64..10.0 * k as f64);
        let dur_w = ((dur_s / k as f64).round() as usize).clamp(1, remaining);
        let Some((start_w, dur_w)) = place(rng, slots, dur_w) else {
            break;
        };
        for s in &mut slots[start_w..start_w + dur_w] {
            *s = Slot::Subtle;
        }
        remaining -= dur_w;

        // The segment settles on the nominal baseline (losing drift and
        // ripple), then takes one of two subtle shapes. Either way the
        // peak-to-peak range exceeds alpha while every sample stays inside
        // the normal marginal envelope: only within-window structure is off.
        let (lo, hi) = (start_w * k, (start_w + dur_w) * k);
        for t in lo..hi {
            values[t] = cfg.baseline + gaussian(rng, cfg.noise_std);
            labels[t] = true;
        }
        let margin = (spec.s_high - spec.s_low) * 0.02;
        if rng.gen_range(0..2u32) == 0 {
            // Variant A: per-window asymmetric transient — two samples flick
            // in opposite directions with unequal amplitudes.
            for w in 0..dur_w {
                let ws = lo + w * k;
                let total = rng.gen_range(1.05 * spec.alpha..1.3 * spec.alpha);
                let split = rng.gen_range(0.28..0.42);
                let sign = if rng.gen_range(0..2u32) == 0 { 1.0 } else { -1.0 };
                let p_small = rng.gen_range(0..k);
                let p_big = (p_small + rng.gen_range(1..k)) % k;
                // Overwrite (not add): noise on the transient samples could
                // otherwise shrink the range back under alpha.
                values[ws + p_small] = cfg.baseline + sign * split * total;
                values[ws + p_big] = cfg.baseline - sign * (1.0 - split) * total;
                for j in 0..k {
                    values[ws + j] =
                        values[ws + j].clamp(spec.s_low + margin, spec.s_high - margin);
                }
            }
        } else {
            // Variant B: resonant over-amplitude ripple — same period as the
            // benign ripple but with a swing past alpha, and phase-locked to
            // the window grid (the injection mechanism latches onto the
            // sampling clock). Per-window amplitude varies; the shape does
            // not.
            let period = cfg.ripple_period_s;
            let phase = 0.7;
            for w in 0..dur_w {
                let ws = w * k;
                let amplitude = rng.gen_range(0.52 * spec.alpha..0.62 * spec.alpha);
                let mut pert: Vec<f64> = (0..k)
                    .map(|j| {
                        amplitude * (std::f64::consts::TAU * j as f64 / period + phase).sin()
                    })
                    .collect();
                let lo_p = pert.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi_p = pert.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if hi_p - lo_p <= spec.alpha * 1.05 {
                    // Stretch the swing about its window mean so the range
                    // clears alpha without pushing the offset outward.
                    let f = spec.alpha * 1.08 / (hi_p - lo_p).max(1e-9);
                    let mean = pert.iter().sum::<f64>() / k as f64;
                    for p in &mut pert {
                        *p = mean + f * (*p - mean);
                    }
                }
                // A one-sided hiccup rides on the swing: one sample near the
                // window's mean level jumps part-way across. It cannot move
                // the window extremes, so the range guarantee stands.
                let mean = pert.iter().sum::<f64>() / k as f64;
                let p_kick = (0..k)
                    .min_by(|&a, &b| {
                        (pert[a] - mean).abs().total_cmp(&(pert[b] - mean).abs())
                    })
                    .unwrap();
                let kick = rng.gen_range(0.40 * spec.alpha..0.50 * spec.alpha);
                let sign = if rng.gen_range(0..2u32) == 0 { 1.0 } else { -1.0 };
                pert[p_kick] = mean + sign * kick;
                for (j, p) in pert.iter().enumerate() {
                    let t = lo + ws + j;
                    // Overwrite the noise: the rescaled swing guarantees the
                    // range, noise could cancel part of it back under alpha.
                    values[t] =
                        (cfg.baseline + p).clamp(spec.s_low + margin, spec.s_high - margin);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::segment;

    fn small_cfg() -> GeneratorConfig {
        GeneratorConfig {
            n_runs: 2,
            run_length_s: 3000,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn label_window_threshold_violation_is_global() {
        let spec = AnomalySpec::default();
        let label = label_window(&[95.0, 95.0, 95.0, 95.0, 95.0, 120.0], &spec);
        assert_eq!(label, WindowLabel::Global);
    }

    #[test]
    fn label_window_flat_midpoint_is_normal() {
        let spec = AnomalySpec::default();
        let mid = (spec.s_low + spec.s_high) / 2.0;
        assert_eq!(label_window(&[mid; 6], &spec), WindowLabel::Normal);
    }

    #[test]
    fn label_window_high_range_inside_interval_is_subtle() {
        let spec = AnomalySpec::default();
        // range = 2 * alpha, all values inside the interval
        let vals = [100.0 - spec.alpha, 100.0 + spec.alpha, 100.0, 100.0, 100.0, 100.0];
        assert_eq!(label_window(&vals, &spec), WindowLabel::Subtle);
    }

    #[test]
    fn label_window_shift_invariant() {
        let spec = AnomalySpec::default();
        let vals = [95.0, 104.0, 97.0, 101.0, 99.0, 100.0];
        let shifted: Vec<f64> = vals.iter().map(|v| v + 37.5).collect();
        let spec2 = AnomalySpec {
            s_low: spec.s_low + 37.5,
            s_high: spec.s_high + 37.5,
            ..spec.clone()
        };
        assert_eq!(label_window(&vals, &spec), label_window(&shifted, &spec2));
    }

    #[test]
    fn no_injection_means_all_normal_inside_interval() {
        let cfg = GeneratorConfig {
            anomaly: AnomalySpec {
                global_rate: 0.0,
                subtle_rate: 0.0,
                ..AnomalySpec::default()
            },
            ..small_cfg()
        };
        let runs = generate_corpus(&cfg).unwrap();
        for r in &runs {
            assert!(r.labels.as_ref().unwrap().iter().all(|&l| !l));
            assert!(r
                .values
                .iter()
                .all(|&v| v >= cfg.anomaly.s_low && v <= cfg.anomaly.s_high));
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let cfg = small_cfg();
        assert_eq!(generate_corpus(&cfg).unwrap(), generate_corpus(&cfg).unwrap());
    }

    #[test]
    fn injection_rates_are_close_to_target() {
        // ~10,000 windows across the corpus at k=6.
        let cfg = GeneratorConfig {
            n_runs: 4,
            run_length_s: 15_000,
            ..GeneratorConfig::default()
        };
        let (runs, manifest) = generate_corpus_with_manifest(&cfg).unwrap();
        let total_w: usize = manifest.runs.iter().map(|r| r.windows).sum();
        let global: usize = manifest.runs.iter().map(|r| r.global_windows).sum();
        let subtle: usize = manifest.runs.iter().map(|r| r.subtle_windows).sum();
        let gr = global as f64 / total_w as f64;
        let sr = subtle as f64 / total_w as f64;
        assert!((gr - 0.05).abs() <= 0.001, "global rate {gr}");
        assert!((sr - 0.05).abs() <= 0.001, "subtle rate {sr}");
        assert_eq!(runs.len(), 4);
    }

    #[test]
    fn subtle_windows_satisfy_taxonomy() {
        let cfg = small_cfg();
        let runs = generate_corpus(&cfg).unwrap();
        let spec = &cfg.anomaly;
        let mut seen_subtle = 0;
        for r in &runs {
            let mut ws = segment(r, cfg.window).unwrap();
            classify_windows(&mut ws, spec);
            for w in &ws {
                if w.label == Some(WindowLabel::Subtle) {
                    seen_subtle += 1;
                    assert!(w.values.iter().all(|&v| v >= spec.s_low && v <= spec.s_high));
                    assert_eq!(label_window(&w.values, spec), WindowLabel::Subtle);
                }
            }
        }
        assert!(seen_subtle > 0, "corpus should contain subtle windows");
    }

    #[test]
    fn global_labels_are_consistent_with_interval_violations() {
        let cfg = small_cfg();
        let runs = generate_corpus(&cfg).unwrap();
        let spec = &cfg.anomaly;
        let k = cfg.window;
        for r in &runs {
            let labels = r.labels.as_ref().unwrap();
            let n_w = r.len() / k;
            for w in 0..n_w {
                let vals = &r.values[w * k..(w + 1) * k];
                if label_window(vals, spec) == WindowLabel::Global {
                    // A window that violates the interval must be ground-truth anomalous.
                    assert!(labels[w * k..(w + 1) * k].iter().any(|&l| l));
                }
            }
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = small_cfg();
        cfg.anomaly.s_low = 120.0;
        assert!(generate_corpus(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.anomaly.global_rate = 0.7;
        cfg.anomaly.subtle_rate = 0.5;
        assert!(generate_corpus(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.n_runs = 0;
        assert!(generate_corpus(&cfg).is_err());
    }
}
