//! Principal component analysis for the PCA-IF reference pipeline:
//! eigendecomposition of the population covariance of standardized windows.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Window;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal basis, one row per component, ordered by decreasing
    /// explained variance. The largest-magnitude coordinate of each
    /// component is positive (deterministic sign convention).
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

/// Eigendecomposition of the mean-centered population covariance; retains
/// the top `n_components` eigenvectors.
pub fn fit_pca(windows: &[Window], n_components: usize) -> Result<PcaModel> {
    if windows.is_empty() {
        return Err(Error::NothingToFit);
    }
    let k = windows[0].len();
    if n_components < 1 || n_components > k {
        return Err(Error::InvalidConfig(format!(
            "n_components must be in 1..={k}, got {n_components}"
        )));
    }
    if windows.len() < n_components + 1 {
        return Err(Error::TooFewSamples {
            needed: n_components + 1,
            got: windows.len(),
        });
    }
    for w in windows {
        if w.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: w.len(),
            });
        }
    }

    let n = windows.len() as f64;
    let mut mean = vec![0.0; k];
    for w in windows {
        for (m, v) in mean.iter_mut().zip(&w.values) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }

    let mut cov = DMatrix::<f64>::zeros(k, k);
    for w in windows {
        let c: Vec<f64> = w.values.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..k {
            for j in i..k {
                cov[(i, j)] += c[i] * c[j];
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            cov[(i, j)] /= n;
            cov[(j, i)] = cov[(i, j)];
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });

    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    for &col in order.iter().take(n_components) {
        let mut comp: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
        // Sign convention: largest-magnitude coordinate positive.
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if comp[lead] < 0.0 {
            for c in &mut comp {
                *c = -*c;
            }
        }
        components.push(comp);
        explained_variance.push(eig.eigenvalues[col].max(0.0));
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

/// Smallest component count whose cumulative explained variance reaches
/// `coverage` of the total (alternative selector to a fixed count).
pub fn components_for_coverage(windows: &[Window], coverage: f64) -> Result<usize> {
    let k = windows.first().map(|w| w.len()).ok_or(Error::NothingToFit)?;
    let full = fit_pca(windows, k)?;
    let total: f64 = full.explained_variance.iter().sum();
    if total <= 0.0 {
        return Ok(1);
    }
    let mut acc = 0.0;
    for (i, v) in full.explained_variance.iter().enumerate() {
        acc += v;
        if acc / total >= coverage {
            return Ok(i + 1);
        }
    }
    Ok(k)
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// `components . (x - mean)`.
    pub fn transform(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: values.len(),
            });
        }
        let centered: Vec<f64> = values.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(&centered).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `components^T . y + mean`.
    pub fn inverse_transform(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        if reduced.len() != self.n_components() {
            return Err(Error::DimensionMismatch {
                expected: self.n_components(),
                got: reduced.len(),
            });
        }
        let mut out = self.mean.clone();
        for (y, comp) in reduced.iter().zip(&self.components) {
            for (o, c) in out.iter_mut().zip(comp) {
                *o += y * c;
            }
        }
        Ok(out)
    }
}
