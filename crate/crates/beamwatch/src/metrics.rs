//! Confusion-matrix metrics, average-precision AUC-PR, per-run averaging and
//! the feature-space separability analysis for subtle anomalies.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{DetectorKind, FittedDetector};
use crate::series::{Run, WindowLabel};
use crate::synth::AnomalySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// Standard confusion counts with the anomaly as the positive class.
pub fn confusion(predictions: &[bool], labels: &[bool]) -> Result<Confusion> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Precision, recall and F1; zero-denominator cases return 0 so run
/// averaging stays total.
pub fn prf1(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    (precision, recall, f1_from_pr(precision, recall))
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_from_pr(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Average precision over a descending-score ranking, with equal scores
/// entering as one tie group: `AP = Σ precision_at_group · Δrecall`.
pub fn auc_pr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut ap = 0.0;
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut group_tp = 0usize;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                group_tp += 1;
            }
            j += 1;
        }
        seen += j - i;
        tp += group_tp;
        if group_tp > 0 {
            let precision = tp as f64 / seen as f64;
            ap += precision * group_tp as f64 / positives as f64;
        }
        i = j;
    }
    Ok(ap)
}

/// Precision/recall pairs at each distinct score threshold (descending), for
/// external plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<PrPoint>> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let mut out = Vec::new();
    let mut tp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let mut j = i;
        while j < order.len() && scores[order[j]] == threshold {
            if labels[order[j]] {
                tp += 1;
            }
            j += 1;
        }
        out.push(PrPoint {
            threshold,
            recall: tp as f64 / positives as f64,
            precision: tp as f64 / j as f64,
        });
        i = j;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Detection performance of one method: per-run metrics, their mean across
/// runs, pooled AUC-PR, and the subtle-only recall diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: DetectorKind,
    pub per_run: Vec<RunMetrics>,
    pub averaged: AveragedMetrics,
    pub auc_pr: f64,
    /// Recall restricted to subtle-anomaly windows; absent when the test set
    /// carries no classified subtle windows.
    pub subtle_recall: Option<f64>,
    /// Pooled per-window (score, positive) pairs retained for PR-curve
    /// emission.
    #[serde(skip)]
    pub pooled: Vec<(f64, bool)>,
}

/// Evaluates each fitted detector on the labeled test runs. Metrics are
/// computed per run and then averaged across runs (not from pooled counts);
/// AUC-PR is computed on the pooled per-window scores.
pub fn detection_report(
    detectors: &[FittedDetector],
    test_runs: &[Run],
    window: usize,
    spec: Option<&AnomalySpec>,
) -> Result<Vec<EvaluationReport>> {
    let mut out = Vec::with_capacity(detectors.len());
    for det in detectors {
        let mut per_run = Vec::with_capacity(test_runs.len());
        let mut pooled: Vec<(f64, bool)> = Vec::new();
        let mut subtle_total = 0usize;
        let mut subtle_hit = 0usize;
        for run in test_runs {
            let mut windows = crate::series::segment(run, window)?;
            if let Some(s) = spec {
                crate::synth::classify_windows(&mut windows, s);
            }
            let labels: Vec<bool> = windows
                .iter()
                .map(|w| {
                    w.label
                        .map(|l| l.is_anomalous())
                        .ok_or_else(|| Error::InvalidConfig("test runs must be labeled".into()))
                })
                .collect::<Result<_>>()?;
            let verdicts = det.detect(&windows)?;
            let preds: Vec<bool> = verdicts.iter().map(|v| v.anomalous).collect();
            for (v, &l) in verdicts.iter().zip(&labels) {
                pooled.push((v.score, l));
            }
            for (w, v) in windows.iter().zip(&verdicts) {
                if w.label == Some(WindowLabel::Subtle) {
                    subtle_total += 1;
                    if v.anomalous {
                        subtle_hit += 1;
                    }
                }
            }
            let c = confusion(&preds, &labels)?;
            let (precision, recall, f1) = prf1(c.tp, c.fp, c.fn_);
            per_run.push(RunMetrics {
                run_id: run.id.clone(),
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                tn: c.tn,
                precision,
                recall,
                f1,
            });
        }
        let n = per_run.len().max(1) as f64;
        let averaged = AveragedMetrics {
            precision: per_run.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: per_run.iter().map(|r| r.recall).sum::<f64>() / n,
            f1: per_run.iter().map(|r| r.f1).sum::<f64>() / n,
        };
        let (scores, labels): (Vec<f64>, Vec<bool>) = pooled.iter().copied().unzip();
        let auc = auc_pr(&scores, &labels)?;
        out.push(EvaluationReport {
            method: det.kind,
            per_run,
            averaged,
            auc_pr: auc,
            subtle_recall: (subtle_total > 0).then(|| subtle_hit as f64 / subtle_total as f64),
            pooled,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSeparability {
    pub space: String,
    pub distances: Vec<f64>,
    pub median: f64,
}

/// Relative distances of subtle-anomaly instances from the normal mean, per
/// feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub spaces: Vec<SpaceSeparability>,
}

/// For each feature space: z-normalize every subtle-anomaly feature vector
/// per dimension by the normal-feature mean and standard deviation, then
/// take the Euclidean norm divided by sqrt(dim) so spaces of different
/// dimensionality are comparable.
pub fn separability(
    spaces: &[(String, Vec<Vec<f64>>)],
    labels: &[WindowLabel],
) -> Result<SeparabilityReport> {
    if !labels.contains(&WindowLabel::Subtle) {
        return Err(Error::NoSubtleAnomalies);
    }
    let mut out = Vec::with_capacity(spaces.len());
    for (name, feats) in spaces {
        if feats.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: feats.len(),
            });
        }
        let dim = feats.first().map_or(0, |f| f.len());
        let normal: Vec<&Vec<f64>> = feats
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == WindowLabel::Normal)
            .map(|(f, _)| f)
            .collect();
        if normal.is_empty() {
            return Err(Error::NothingToFit);
        }
        let n = normal.len() as f64;
        let mut mean = vec![0.0; dim];
        for f in &normal {
            for (m, v) in mean.iter_mut().zip(*f) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut std = vec![0.0; dim];
        for f in &normal {
            for ((s, v), m) in std.iter_mut().zip(*f).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut std {
            *s = (*s / n).sqrt().max(crate::series::STD_FLOOR);
        }
        let mut distances = Vec::new();
        for (f, l) in feats.iter().zip(labels) {
            if *l == WindowLabel::Subtle {
                let sq: f64 = f
                    .iter()
                    .zip(&mean)
                    .zip(&std)
                    .map(|((v, m), s)| ((v - m) / s).powi(2))
                    .sum();
                distances.push((sq / dim as f64).sqrt());
            }
        }
        let med = median(&distances);
        out.push(SpaceSeparability {
            space: name.clone(),
            distances,
            median: med,
        });
    }
    Ok(SeparabilityReport { spaces: out })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// One row per run per method.
pub fn write_detection_csv(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let p = path.display().to_string();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&p, e))?,
    );
    (|| -> std::io::Result<()> {
        writeln!(f, "method,run_id,tp,fp,fn,tn,precision,recall,f1")?;
        for r in reports {
            for m in &r.per_run {
                writeln!(
                    f,
                    "{},{},{},{},{},{},{},{},{}",
                    r.method, m.run_id, m.tp, m.fp, m.fn_, m.tn, m.precision, m.recall, m.f1
                )?;
            }
        }
        f.flush()
    })()
    .map_err(|e| Error::io(&p, e))
}

/// One distance per row per space.
pub fn write_separability_csv(path: &Path, report: &SeparabilityReport) -> Result<()> {
    let p = path.display().to_string();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&p, e))?,
    );
    (|| -> std::io::Result<()> {
        writeln!(f, "space,distance")?;
        for s in &report.spaces {
            for d in &s.distances {
                writeln!(f, "{},{}", s.space, d)?;
            }
        }
        f.flush()
    })()
    .map_err(|e| Error::io(&p, e))
}

pub fn write_pr_curve_csv(path: &Path, points: &[PrPoint]) -> Result<()> {
    let p = path.display().to_string();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&p, e))?,
    );
    (|| -> std::io::Result<()> {
        writeln!(f, "threshold,recall,precision")?;
        for pt in points {
            writeln!(f, "{},{},{}", pt.threshold, pt.recall, pt.precision)?;
        }
        f.flush()
    })()
    .map_err(|e| Error::io(&p, e))
}
