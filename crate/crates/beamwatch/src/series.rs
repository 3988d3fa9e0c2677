//! Time-series ingestion, 1 Hz resampling, non-overlapping windowing and
//! per-dimension standardization — the preprocessing front-end shared by all
//! detector pipelines.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to zero-variance dimensions so the transform stays total.
pub const STD_FLOOR: f64 = 1e-12;

/// One univariate acquisition: a value per timestamp, with optional
/// per-sample ground truth (`true` = anomalous).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub id: String,
    /// Sample times in seconds, strictly increasing.
    pub timestamps: Vec<f64>,
    pub values: Vec<f64>,
    pub labels: Option<Vec<bool>>,
}

impl Run {
    pub fn new(
        id: impl Into<String>,
        timestamps: Vec<f64>,
        values: Vec<f64>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        let id = id.into();
        if timestamps.len() != values.len() {
            return Err(Error::InvalidRun {
                id,
                reason: format!(
                    "timestamps ({}) and values ({}) differ in length",
                    timestamps.len(),
                    values.len()
                ),
            });
        }
        if let Some(l) = &labels {
            if l.len() != values.len() {
                return Err(Error::InvalidRun {
                    id,
                    reason: format!(
                        "labels ({}) and values ({}) differ in length",
                        l.len(),
                        values.len()
                    ),
                });
            }
        }
        if timestamps.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidRun {
                id,
                reason: "timestamps not strictly increasing".into(),
            });
        }
        Ok(Run {
            id,
            timestamps,
            values,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Window-level ground truth.
///
/// `Anomalous` marks a window containing perturbed samples that has not (or
/// cannot) be classified into the global/subtle taxonomy; value-based
/// classification against an [`crate::synth::AnomalySpec`] refines it to
/// [`WindowLabel::Global`] or [`WindowLabel::Subtle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowLabel {
    Normal,
    Anomalous,
    Global,
    Subtle,
}

impl WindowLabel {
    pub fn is_anomalous(self) -> bool {
        !matches!(self, WindowLabel::Normal)
    }
}

/// A fixed-length vector of `k` consecutive samples, the unit of detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub values: Vec<f64>,
    pub run_id: String,
    /// Offset of the first sample in the source run; a multiple of `k`.
    pub start_index: usize,
    pub label: Option<WindowLabel>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-dimension zero-mean / unit-variance transform fitted on a window set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per dimension across all
    /// windows. Zero-variance dimensions are clamped to [`STD_FLOOR`].
    pub fn fit(windows: &[Window]) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::NothingToFit);
        }
        let k = windows[0].len();
        for w in windows {
            if w.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: w.len(),
                });
            }
        }
        let n = windows.len() as f64;
        let mut means = vec![0.0; k];
        for w in windows {
            for (m, v) in means.iter_mut().zip(&w.values) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; k];
        for w in windows {
            for ((s, v), m) in vars.iter_mut().zip(&w.values).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| (v / n).sqrt().max(STD_FLOOR))
            .collect();
        Ok(Standardizer { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// `out_j = (x_j - mean_j) / std_j`.
    pub fn transform(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn inverse_transform(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| v * s + m)
            .collect())
    }

    /// Standardizes a window in place, keeping its metadata.
    pub fn transform_window(&self, w: &Window) -> Result<Window> {
        Ok(Window {
            values: self.transform(&w.values)?,
            run_id: w.run_id.clone(),
            start_index: w.start_index,
            label: w.label,
        })
    }
}

/// Resamples a run to exactly one sample per whole second over its time span.
///
/// Each output sample is the mean of the input samples falling in that
/// second; seconds with no contributing samples carry the previous value
/// forward. An output second is labeled anomalous iff any contributing input
/// sample is. Idempotent on already-1 Hz input.
pub fn resample_1hz(run: &Run) -> Result<Run> {
    if run.is_empty() {
        return Err(Error::EmptyInput);
    }
    let first = run.timestamps[0].floor() as i64;
    let last = run.timestamps[run.len() - 1].floor() as i64;
    let n_out = (last - first + 1) as usize;

    let mut timestamps = Vec::with_capacity(n_out);
    let mut values = Vec::with_capacity(n_out);
    let mut labels = run.labels.as_ref().map(|_| Vec::with_capacity(n_out));

    let mut i = 0;
    let mut prev = run.values[0];
    for sec in first..=last {
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut any_anom = false;
        while i < run.len() && (run.timestamps[i].floor() as i64) == sec {
            sum += run.values[i];
            if let Some(l) = &run.labels {
                any_anom |= l[i];
            }
            count += 1;
            i += 1;
        }
        let v = if count > 0 { sum / count as f64 } else { prev };
        prev = v;
        timestamps.push(sec as f64);
        values.push(v);
        if let Some(ls) = &mut labels {
            ls.push(any_anom);
        }
    }
    Run::new(run.id.clone(), timestamps, values, labels)
}

/// Segments a run into non-overlapping windows of length `k`; trailing
/// remainder samples are dropped. A window is labeled
/// [`WindowLabel::Anomalous`] when any of its samples is labeled anomalous.
///
/// A run shorter than `k` yields an empty list.
pub fn segment(run: &Run, k: usize) -> Result<Vec<Window>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "window length must be >= 2, got {k}"
        )));
    }
    let n_windows = run.len() / k;
    let mut out = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let start = w * k;
        let label = run.labels.as_ref().map(|l| {
            if l[start..start + k].iter().any(|&a| a) {
                WindowLabel::Anomalous
            } else {
                WindowLabel::Normal
            }
        });
        out.push(Window {
            values: run.values[start..start + k].to_vec(),
            run_id: run.id.clone(),
            start_index: start,
            label,
        });
    }
    Ok(out)
}

/// Reads a run from `timestamp,value[,label]` CSV; the run id is the file
/// stem.
pub fn read_run_csv(path: &Path) -> Result<Run> {
    let p = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::CsvSchema {
        path: p.clone(),
        reason: e.to_string(),
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::CsvSchema {
            path: p.clone(),
            reason: e.to_string(),
        })?
        .clone();
    let has_labels = match headers.len() {
        2 => false,
        3 => true,
        n => {
            return Err(Error::CsvSchema {
                path: p,
                reason: format!("expected 2 or 3 columns, got {n}"),
            })
        }
    };
    if headers.get(0) != Some("timestamp") || headers.get(1) != Some("value") {
        return Err(Error::CsvSchema {
            path: p,
            reason: format!("expected header `timestamp,value[,label]`, got `{headers:?}`"),
        });
    }

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut labels = if has_labels { Some(Vec::new()) } else { None };
    for (lineno, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::CsvSchema {
            path: p.clone(),
            reason: e.to_string(),
        })?;
        let parse = |idx: usize, what: &str| -> Result<f64> {
            rec.get(idx)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::CsvSchema {
                    path: p.clone(),
                    reason: format!("row {}: bad {what}", lineno + 2),
                })
        };
        timestamps.push(parse(0, "timestamp")?);
        values.push(parse(1, "value")?);
        if let Some(ls) = &mut labels {
            let raw = rec.get(2).unwrap_or("");
            let l = match raw {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(Error::CsvSchema {
                        path: p.clone(),
                        reason: format!("row {}: label must be 0 or 1, got `{raw}`", lineno + 2),
                    })
                }
            };
            ls.push(l);
        }
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Run::new(id, timestamps, values, labels)
}

/// Writes a run in the CSV ingestion format. Output is deterministic for a
/// given run.
pub fn write_run_csv(path: &Path, run: &Run) -> Result<()> {
    let p = path.display().to_string();
    let file = std::fs::File::create(path).map_err(|e| Error::io(&p, e))?;
    let mut out = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        if run.labels.is_some() {
            writeln!(out, "timestamp,value,label")?;
        } else {
            writeln!(out, "timestamp,value")?;
        }
        for i in 0..run.len() {
            match &run.labels {
                Some(l) => writeln!(
                    out,
                    "{},{},{}",
                    run.timestamps[i],
                    run.values[i],
                    u8::from(l[i])
                )?,
                None => writeln!(out, "{},{}", run.timestamps[i], run.values[i])?,
            }
        }
        out.flush()
    })();
    res.map_err(|e| Error::io(&p, e))
}
