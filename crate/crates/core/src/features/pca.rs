use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Retain {
    /// Keep exactly this many components.
    Components(usize),
    /// Keep the fewest components whose eigenvalues sum to this fraction of
    /// the total variance.
    Fraction(f64),
}

impl Default for Retain {
    fn default() -> Self {
        Retain::Fraction(0.9)
    }
}

/// Principal axes of a training set. Serializes as
/// `{"mean": [...], "components": [[...], ...], "eigenvalues": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` rows of length `d`, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
}

/// Sample covariance (n - 1 denominator) of the rows of `data`.
pub fn covariance(data: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let n = data.len();
    let d = data[0].len();
    let mut mean = vec![0.0; d];
    for row in data {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| data[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    (mean, cov)
}

pub fn pca_fit(data: &[Vec<f64>], retain: Retain) -> Result<PcaModel> {
    let n = data.len();
    if n < 2 {
        return Err(Error::size(format!("PCA needs at least 2 samples, got {n}")));
    }
    let d = data[0].len();
    if d == 0 || data.iter().any(|r| r.len() != d) {
        return Err(Error::size("PCA rows must be non-empty and equal length"));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("PCA input has non-finite values".into()));
    }
    let max_k = (n - 1).min(d);
    let (mean, cov) = covariance(data);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();

    let k = match retain {
        Retain::Components(k) => {
            if k == 0 || k > max_k {
                return Err(Error::config(format!(
                    "cannot retain {k} components (allowed 1..={max_k})"
                )));
            }
            k
        }
        Retain::Fraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config(format!("variance fraction {f} not in (0, 1]")));
            }
            let total: f64 = values.iter().sum();
            let mut acc = 0.0;
            let mut k = values.len();
            for (i, v) in values.iter().enumerate() {
                acc += v;
                if acc >= f * total {
                    k = i + 1;
                    break;
                }
            }
            k.clamp(1, max_k)
        }
    };

    let components = order[..k]
        .iter()
        .map(|&i| {
            let col = eig.eigenvectors.column(i);
            // Sign convention: largest-magnitude entry positive.
            let pivot = col
                .iter()
                .copied()
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            let s = if pivot < 0.0 { -1.0 } else { 1.0 };
            col.iter().map(|v| v * s).collect()
        })
        .collect();
    Ok(PcaModel {
        mean,
        components,
        eigenvalues: values[..k].to_vec(),
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::size(format!(
                "PCA expects {} features, got {}",
                self.dim(),
                v.len()
            )));
        }
        Ok(self
            .components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(v.iter().zip(&self.mean))
                    .map(|(w, (x, m))| w * (x - m))
                    .sum()
            })
            .collect())
    }

    pub fn back_project(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        if reduced.len() != self.n_components() {
            return Err(Error::size("reduced vector length does not match PCA model"));
        }
        let mut out = self.mean.clone();
        for (c, r) in self.components.iter().zip(reduced) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += r * w;
            }
        }
        Ok(out)
    }
}

pub fn pca_project(model: &PcaModel, v: &[f64]) -> Result<Vec<f64>> {
    model.project(v)
}

/// Per-feature z-scoring fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &[Vec<f64>]) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::size("standardizer needs at least 2 samples"));
        }
        let d = data[0].len();
        let mut mean = vec![0.0; d];
        for row in data {
            if row.len() != d {
                return Err(Error::size("rows differ in length"));
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for row in data {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        // Constant features pass through centered but unscaled.
        let scale = var
            .iter()
            .map(|s| {
                let sd = (s / (n as f64 - 1.0)).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.mean.len() {
            return Err(Error::size(format!(
                "standardizer expects {} features, got {}",
                self.mean.len(),
                v.len()
            )));
        }
        Ok(v.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }
}
