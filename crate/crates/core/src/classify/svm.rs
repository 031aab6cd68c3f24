//! Soft-margin SVM trained by sequential minimal optimization with
//! second-order working-set selection.

use serde::{Deserialize, Serialize};

use super::{sign_of, Classifier, LabeledSet, Prediction, Trainer};
use crate::error::{Error, Result};
use crate::preprocess::Label;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    /// `exp(-gamma * |x - y|^2)`
    Gaussian { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Gaussian { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Kernel::Gaussian { gamma } = *self {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::config(format!("gaussian gamma must be positive, got {gamma}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// Label-signed multipliers `y_i * alpha_i`.
    pub alphas: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn decision(&self, v: &[f64]) -> Result<f64> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != v.len() {
                return Err(Error::size(format!(
                    "SVM expects {} features, got {}",
                    sv.len(),
                    v.len()
                )));
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, v))
            .sum::<f64>()
            + self.bias)
    }

    /// Weight vector of a linear-kernel model.
    pub fn weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let d = self.support_vectors.first()?.len();
        let mut w = vec![0.0; d];
        for (sv, a) in self.support_vectors.iter().zip(&self.alphas) {
            for (wi, x) in w.iter_mut().zip(sv) {
                *wi += a * x;
            }
        }
        Some(w)
    }
}

impl Classifier for SvmModel {
    fn predict(&self, v: &[f64]) -> Result<Prediction> {
        svm_predict(self, v)
    }

    fn target_score(&self, v: &[f64]) -> Result<f64> {
        self.decision(v)
    }
}

pub fn svm_predict(model: &SvmModel, v: &[f64]) -> Result<Prediction> {
    let score = model.decision(v)?;
    let label = if score > 0.0 {
        Label::Target
    } else {
        Label::Nontarget
    };
    Ok(Prediction { label, score })
}

/// Dual solution over the full training set, before support vectors are
/// extracted. Exposed for KKT diagnostics.
#[derive(Debug, Clone)]
pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
}

pub(crate) fn solve_dual(
    data: &LabeledSet,
    kernel: Kernel,
    c: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DualSolution> {
    let x = data.vectors();
    let y: Vec<f64> = data.labels().iter().map(|&l| sign_of(l)).collect();
    let n = x.len();

    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    loop {
        // i: maximal violator from the "up" set.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                    let a = if a > 0.0 { a } else { TAU };
                    let obj = -(b * b) / a;
                    if obj < best {
                        best = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if gmax - gmin < tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::Training(format!(
                "SMO did not converge in {max_iter} iterations (violation {})",
                gmax - gmin
            )));
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Offset: average over free multipliers, else midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(DualSolution {
        alpha,
        bias: -rho,
    })
}

pub const DEFAULT_MAX_ITER: usize = 1_000_000;

pub fn svm_train(data: &LabeledSet, kernel: Kernel, c: f64, tol: f64) -> Result<SvmModel> {
    kernel.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::config(format!("C must be positive, got {c}")));
    }
    if !(tol > 0.0) {
        return Err(Error::config(format!("tolerance must be positive, got {tol}")));
    }
    data.require_both_classes()?;
    let sol = solve_dual(data, kernel, c, tol, DEFAULT_MAX_ITER)?;
    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(data.vectors()[t].clone());
            alphas.push(a * sign_of(data.labels()[t]));
        }
    }
    Ok(SvmModel {
        kernel,
        c,
        support_vectors,
        alphas,
        bias: sol.bias,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub kernel: KernelKind,
    /// Gaussian width; `None` means `1 / (n_features * feature variance)`,
    /// which is `1 / n_features` on unit-variance inputs.
    pub gamma: Option<f64>,
    pub c: f64,
    pub tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Gaussian,
            gamma: None,
            c: 1.0,
            tol: 1e-3,
        }
    }
}

impl SvmConfig {
    pub fn kernel_for(&self, data: &LabeledSet) -> Kernel {
        match self.kernel {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Gaussian => Kernel::Gaussian {
                gamma: self.gamma.unwrap_or_else(|| default_gamma(data)),
            },
        }
    }
}

/// `1 / (d * v)` with `v` the mean per-feature variance; `1 / d` when the
/// data has no spread.
pub fn default_gamma(data: &LabeledSet) -> f64 {
    let d = data.dim().max(1);
    let n = data.len() as f64;
    let mut var = 0.0;
    for j in 0..data.dim() {
        let mean = data.vectors().iter().map(|v| v[j]).sum::<f64>() / n;
        var += data.vectors().iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / n;
    }
    let v = var / d as f64;
    if v > 0.0 && v.is_finite() {
        1.0 / (d as f64 * v)
    } else {
        1.0 / d as f64
    }
}

impl Trainer for SvmConfig {
    type Model = SvmModel;

    fn fit(&self, data: &LabeledSet) -> Result<SvmModel> {
        svm_train(data, self.kernel_for(data), self.c, self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> LabeledSet {
        LabeledSet::new(
            vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            vec![Label::Nontarget, Label::Target],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_two_point_margin() {
        let m = svm_train(&two_points(), Kernel::Linear, 1e3, 1e-6).unwrap();
        assert_eq!(m.support_vectors.len(), 2);
        let w = m.weights().unwrap();
        assert!((w[0] - 1.0).abs() < 1e-9 && w[1].abs() < 1e-12);
        assert!(m.bias.abs() < 1e-9);
        assert!(m.decision(&[0.0, 3.0]).unwrap().abs() < 1e-9);
        assert!((m.decision(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-5);
        assert!(m.alphas.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn single_class_and_bad_params_rejected() {
        let one = LabeledSet::new(vec![vec![0.0], vec![1.0]], vec![Label::Target; 2]).unwrap();
        assert!(matches!(
            svm_train(&one, Kernel::Linear, 1.0, 1e-3),
            Err(Error::Training(_))
        ));
        assert!(svm_train(&two_points(), Kernel::Linear, 0.0, 1e-3).is_err());
        assert!(svm_train(&two_points(), Kernel::Gaussian { gamma: -1.0 }, 1.0, 1e-3).is_err());
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let m = svm_train(&two_points(), Kernel::Linear, 1.0, 1e-3).unwrap();
        assert!(matches!(svm_predict(&m, &[1.0]), Err(Error::Size(_))));
    }

    #[test]
    fn xor_with_gaussian_kernel() {
        let data = LabeledSet::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![Label::Target, Label::Target, Label::Nontarget, Label::Nontarget],
        )
        .unwrap();
        let m = svm_train(&data, Kernel::Gaussian { gamma: 1.0 }, 10.0, 1e-3).unwrap();
        for (v, l) in data.vectors().iter().zip(data.labels()) {
            assert_eq!(svm_predict(&m, v).unwrap().label, *l);
        }
    }
}
