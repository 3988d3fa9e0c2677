//! The five experiment stages behind the CLI subcommands; each is a plain
//! function so the runnable examples can drive them too.
//!
//! On-disk layout:
//!
//! - corpus dir: `runs/run_XX.csv` + `manifest.json`
//! - model dir:  `split_plan.json` + `model_<kind>.json`
//! - eval dir:   `evaluation.json`, `detection_metrics.csv`, `separability.csv`,
//!   `pr_curve_<kind>.csv`, and `report.md` from the report stage

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::{self, EvaluationReport, SeparabilityReport};
use crate::pipeline::{self, DetectorBundle, DetectorKind, SplitPlan};
use crate::series::{self, Run, Window};
use crate::synth::{self, AnomalySpec, CorpusManifest};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUNS_SUBDIR: &str = "runs";
pub const SPLIT_FILE: &str = "split_plan.json";
pub const EVALUATION_FILE: &str = "evaluation.json";

pub fn model_file(kind: DetectorKind) -> String {
    format!("model_{kind}.json")
}

/// Generates the labeled synthetic corpus into `out_dir`.
pub fn cmd_generate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<CorpusManifest> {
    let runs_dir = out_dir.join(RUNS_SUBDIR);
    std::fs::create_dir_all(&runs_dir)
        .map_err(|e| Error::io(runs_dir.display().to_string(), e))?;
    let (runs, manifest) = synth::generate_corpus_with_manifest(&cfg.generator)?;
    for run in &runs {
        series::write_run_csv(&runs_dir.join(format!("{}.csv", run.id)), run)?;
    }
    manifest.write(&out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Reads every `runs/*.csv` under `corpus_dir` (sorted by file name) plus
/// the manifest when present.
pub fn load_corpus(corpus_dir: &Path) -> Result<(Vec<Run>, Option<CorpusManifest>)> {
    let runs_dir = corpus_dir.join(RUNS_SUBDIR);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&runs_dir)
        .map_err(|e| Error::io(runs_dir.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyInput);
    }
    let runs = paths
        .iter()
        .map(|p| series::read_run_csv(p))
        .collect::<Result<Vec<_>>>()?;
    let manifest_path = corpus_dir.join(MANIFEST_FILE);
    let manifest = if manifest_path.exists() {
        Some(CorpusManifest::read(&manifest_path)?)
    } else {
        None
    };
    Ok((runs, manifest))
}

/// Segments labeled runs into windows, refining the sample-derived labels
/// into the global/subtle taxonomy.
pub fn windows_of(runs: &[&Run], window: usize, spec: &AnomalySpec) -> Result<Vec<Window>> {
    let mut out = Vec::new();
    for run in runs {
        let mut ws = series::segment(run, window)?;
        synth::classify_windows(&mut ws, spec);
        out.extend(ws);
    }
    Ok(out)
}

fn select<'a>(runs: &'a [Run], ids: &[String]) -> Vec<&'a Run> {
    runs.iter().filter(|r| ids.contains(&r.id)).collect()
}

/// The anomaly spec to judge windows by: the one recorded in the corpus
/// manifest when available, otherwise the configured one.
fn effective_spec<'a>(cfg: &'a ExperimentConfig, manifest: Option<&'a CorpusManifest>) -> &'a AnomalySpec {
    manifest.map_or(&cfg.generator.anomaly, |m| &m.config.anomaly)
}

/// Splits the corpus at run level, fits each requested detector on all dev
/// runs, and writes the bundles plus the split plan into `model_dir`.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    corpus_dir: &Path,
    model_dir: &Path,
    kinds: &[DetectorKind],
) -> Result<SplitPlan> {
    std::fs::create_dir_all(model_dir)
        .map_err(|e| Error::io(model_dir.display().to_string(), e))?;
    let (runs, manifest) = load_corpus(corpus_dir)?;
    let ids: Vec<String> = runs.iter().map(|r| r.id.clone()).collect();
    let plan = pipeline::make_split(&ids, cfg.detector.seed)?;
    let spec = effective_spec(cfg, manifest.as_ref());
    let dev = select(&runs, &plan.dev_run_ids);
    let train_windows = windows_of(&dev, cfg.detector.window, spec)?;
    for &kind in kinds {
        let detector = pipeline::fit_detector(kind, &train_windows, &cfg.detector)?;
        let bundle = DetectorBundle {
            kind,
            config: cfg.detector.clone(),
            detector,
        };
        bundle.write(&model_dir.join(model_file(kind)))?;
    }
    plan.write(&model_dir.join(SPLIT_FILE))?;
    Ok(plan)
}

/// One verdict row of the detect output CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub run_id: String,
    pub window_start_index: usize,
    pub score: f64,
    pub f_value: f64,
    /// Predicted label: 1 = anomalous.
    pub label: u8,
}

/// Scores one run CSV (or every `*.csv` in a directory) with a saved model
/// and writes `run_id,window_start_index,score,f_value,label`. Runs shorter
/// than one window contribute no rows.
pub fn cmd_detect(model_path: &Path, input: &Path, out_path: &Path) -> Result<Vec<Verdict>> {
    let bundle = DetectorBundle::read(model_path)?;
    let mut paths: Vec<PathBuf> = if input.is_dir() {
        std::fs::read_dir(input)
            .map_err(|e| Error::io(input.display().to_string(), e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect()
    } else {
        vec![input.to_path_buf()]
    };
    paths.sort();
    let window = bundle.config.window;
    let mut verdicts = Vec::new();
    for p in &paths {
        let run = series::read_run_csv(p)?;
        let windows = series::segment(&run, window)?;
        let decisions = bundle.detector.detect(&windows)?;
        for (w, d) in windows.iter().zip(&decisions) {
            verdicts.push(Verdict {
                run_id: run.id.clone(),
                window_start_index: w.start_index,
                score: d.score,
                f_value: d.f_value,
                label: u8::from(d.anomalous),
            });
        }
    }
    let ps = out_path.display().to_string();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(out_path).map_err(|e| Error::io(&ps, e))?,
    );
    (|| -> std::io::Result<()> {
        writeln!(f, "run_id,window_start_index,score,f_value,label")?;
        for v in &verdicts {
            writeln!(
                f,
                "{},{},{},{},{}",
                v.run_id, v.window_start_index, v.score, v.f_value, v.label
            )?;
        }
        f.flush()
    })()
    .map_err(|e| Error::io(&ps, e))?;
    Ok(verdicts)
}

/// Everything the evaluation stage produces, serialized as one JSON
/// document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub reports: Vec<EvaluationReport>,
    pub separability: Option<SeparabilityReport>,
}

impl EvaluationDocument {
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

/// Evaluates every saved model on the held-out test runs: per-run and
/// averaged detection metrics, pooled AUC-PR with PR curves, and the
/// feature-space separability of subtle anomalies.
pub fn cmd_evaluate(
    cfg: &ExperimentConfig,
    corpus_dir: &Path,
    model_dir: &Path,
    out_dir: &Path,
) -> Result<EvaluationDocument> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let (runs, manifest) = load_corpus(corpus_dir)?;
    let plan = SplitPlan::read(&model_dir.join(SPLIT_FILE))?;
    let spec = effective_spec(cfg, manifest.as_ref());
    let test = select(&runs, &plan.test_run_ids);
    if test.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut detectors = Vec::new();
    for kind in DetectorKind::ALL {
        let path = model_dir.join(model_file(kind));
        if path.exists() {
            detectors.push(DetectorBundle::read(&path)?.detector);
        }
    }
    if detectors.is_empty() {
        return Err(Error::NothingToFit);
    }

    let reports = metrics::detection_report(&detectors, &runs_owned(&test), cfg.detector.window, Some(spec))?;
    metrics::write_detection_csv(&out_dir.join("detection_metrics.csv"), &reports)?;
    for r in &reports {
        let (scores, labels): (Vec<f64>, Vec<bool>) = r.pooled.iter().copied().unzip();
        let curve = metrics::pr_curve(&scores, &labels)?;
        metrics::write_pr_curve_csv(&out_dir.join(format!("pr_curve_{}.csv", r.method)), &curve)?;
    }

    // Separability of subtle anomalies: one feature space per detector
    // (standardized raw / PCA-reduced / MCE), over all test windows.
    let test_windows = windows_of(&test, cfg.detector.window, spec)?;
    let labels: Vec<series::WindowLabel> = test_windows
        .iter()
        .map(|w| w.label.expect("generated corpus is labeled"))
        .collect();
    let mut spaces = Vec::new();
    for det in &detectors {
        let feats = test_windows
            .iter()
            .map(|w| det.feature_map(w))
            .collect::<Result<Vec<_>>>()?;
        let name = match det.kind {
            DetectorKind::IfRaw => "raw",
            DetectorKind::PcaIf => "pca",
            DetectorKind::AeIf => "mce",
        };
        spaces.push((name.to_string(), feats));
    }
    let separability = match metrics::separability(&spaces, &labels) {
        Ok(rep) => {
            metrics::write_separability_csv(&out_dir.join("separability.csv"), &rep)?;
            Some(rep)
        }
        Err(Error::NoSubtleAnomalies) => None,
        Err(e) => return Err(e),
    };

    let doc = EvaluationDocument {
        reports,
        separability,
    };
    doc.write(&out_dir.join(EVALUATION_FILE))?;
    Ok(doc)
}

fn runs_owned(test: &[&Run]) -> Vec<Run> {
    test.iter().map(|r| (*r).clone()).collect()
}

/// Renders the evaluation document as a markdown report, optionally writing
/// it next to the evaluation outputs.
pub fn cmd_report(eval_dir: &Path, out_path: Option<&Path>) -> Result<String> {
    let doc = EvaluationDocument::read(&eval_dir.join(EVALUATION_FILE))?;
    let mut s = String::new();
    s.push_str("# Detection results\n\n");
    s.push_str("Metrics are averaged over held-out test runs; AUC-PR is pooled over all test windows.\n\n");
    s.push_str("| method | precision | recall | F1 | AUC-PR | subtle recall |\n");
    s.push_str("|---|---|---|---|---|---|\n");
    for r in &doc.reports {
        let subtle = r
            .subtle_recall
            .map_or("n/a".to_string(), |v| format!("{v:.2}"));
        s.push_str(&format!(
            "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {} |\n",
            r.method,
            r.averaged.precision,
            r.averaged.recall,
            r.averaged.f1,
            r.auc_pr,
            subtle
        ));
    }
    if let Some(sep) = &doc.separability {
        s.push_str("\n# Subtle-anomaly separability\n\n");
        s.push_str("Median normalized distance of subtle-anomaly windows from the normal population, per feature space.\n\n");
        s.push_str("| space | median distance | instances |\n|---|---|---|\n");
        for sp in &sep.spaces {
            s.push_str(&format!(
                "| {} | {:.3} | {} |\n",
                sp.space,
                sp.median,
                sp.distances.len()
            ));
        }
    }
    if let Some(p) = out_path {
        std::fs::write(p, &s).map_err(|e| Error::io(p.display().to_string(), e))?;
    }
    Ok(s)
}
