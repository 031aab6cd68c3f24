#![allow(dead_code)]

use std::f64::consts::PI;

use bciarm_core::arm::{RobotParams, RobotState};
use bciarm_core::classify::{LabeledSet, SvmModel};
use bciarm_core::preprocess::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn sign(label: Label) -> f64 {
    if label == Label::Target {
        1.0
    } else {
        -1.0
    }
}

/// Two Gaussian blobs centred at `±separation / 2` along every axis.
pub fn blobs(seed: u64, n: usize, dim: usize, separation: f64) -> LabeledSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Target } else { Label::Nontarget };
        let c = sign(label) * separation / 2.0;
        vectors.push((0..dim).map(|_| c + gaussian(&mut rng)).collect());
        labels.push(label);
    }
    LabeledSet::new(vectors, labels).unwrap()
}

/// Random points with random labels; `target_share` of them targets.
pub fn random_set(seed: u64, n: usize, dim: usize, target_share: f64) -> LabeledSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..n).map(|_| (0..dim).map(|_| gaussian(&mut rng)).collect()).collect();
    let mut labels: Vec<Label> = (0..n)
        .map(|_| if rng.random_bool(target_share) { Label::Target } else { Label::Nontarget })
        .collect();
    labels[0] = Label::Target;
    labels[1] = Label::Nontarget;
    LabeledSet::new(vectors, labels).unwrap()
}

/// Largest KKT violation of an SVM over its training set, measured on
/// `y f(x)` against the margin.
pub fn kkt_residual(model: &SvmModel, data: &LabeledSet) -> f64 {
    let c = model.c;
    let mut worst = 0.0f64;
    for (x, &label) in data.vectors().iter().zip(data.labels()) {
        let alpha = model
            .support_vectors
            .iter()
            .position(|sv| sv == x)
            .map_or(0.0, |j| model.alphas[j].abs());
        let yf = sign(label) * model.decision(x).unwrap();
        let r = if alpha <= 0.0 {
            (1.0 - yf).max(0.0)
        } else if alpha >= c * (1.0 - 1e-12) {
            (yf - 1.0).max(0.0)
        } else {
            (yf - 1.0).abs()
        };
        worst = worst.max(r);
    }
    worst
}

/// Majority vote of the `k` nearest points by an all-pairs distance scan;
/// equal distances go to the lower index.
pub fn brute_knn(data: &LabeledSet, k: usize, v: &[f64]) -> (Label, f64) {
    let mut d: Vec<(f64, usize)> = data
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, x)| (x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let targets = d[..k].iter().filter(|&&(_, i)| data.labels()[i] == Label::Target).count();
    if 2 * targets > k {
        (Label::Target, targets as f64 / k as f64)
    } else {
        (Label::Nontarget, (k - targets) as f64 / k as f64)
    }
}

/// Smallest signed distance of the data to the hyperplane `w.x + b = 0`.
pub fn geometric_margin(data: &LabeledSet, w: &[f64], b: f64) -> f64 {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    data.vectors()
        .iter()
        .zip(data.labels())
        .map(|(x, &l)| sign(l) * (x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b) / norm)
        .fold(f64::INFINITY, f64::min)
}

pub fn tone(f: f64, fs: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
}

pub fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

pub fn peak_frequency(x: &[f64], fs: f64) -> f64 {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = (1..n / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap();
    k as f64 * fs / n as f64
}

/// Strict local extrema and sign changes, counted directly.
pub fn imf_counts(x: &[f64]) -> (usize, usize) {
    let extrema = x
        .windows(3)
        .filter(|w| (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]))
        .count();
    let nz: Vec<f64> = x.iter().copied().filter(|v| *v != 0.0).collect();
    let crossings = nz.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    (extrema, crossings)
}

/// Analog Butterworth band-pass magnitude after bilinear prewarping.
pub fn butterworth_oracle(f: f64, low: f64, high: f64, order: usize, fs: f64) -> f64 {
    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let (wl, wh, w) = (warp(low), warp(high), warp(f));
    let x = (w * w - wl * wh) / (w * (wh - wl));
    1.0 / (1.0 + x.powi(2 * order as i32)).sqrt()
}

/// Cyclic Jacobi rotations on a symmetric matrix; returns eigenvalues and
/// eigenvectors as columns.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

pub fn correlated_data(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix: Vec<Vec<f64>> = (0..d).map(|_| noise(&mut rng, d)).collect();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|j| gaussian(&mut rng) * (d - j) as f64).collect();
            (0..d).map(|i| (0..d).map(|j| mix[i][j] * z[j]).sum::<f64>() + 3.0).collect()
        })
        .collect()
}

pub fn oracle_covariance(data: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, d) = (data.len(), data[0].len());
    let mean: Vec<f64> = (0..d).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| data.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

/// Number of components reaching `fraction` of the oracle spectrum.
pub fn oracle_retained(sorted_vals: &[f64], fraction: f64) -> usize {
    let total: f64 = sorted_vals.iter().sum();
    let mut acc = 0.0;
    sorted_vals
        .iter()
        .position(|v| {
            acc += v;
            acc >= fraction * total
        })
        .unwrap()
        + 1
}

/// Kinetic plus potential energy of a 2R arm from the textbook closed forms.
/// Potential is measured from the arm hanging straight down.
pub fn oracle_energy(p: &RobotParams, s: &RobotState) -> f64 {
    let (t1, t2) = (s.theta[0], s.theta[1]);
    let (w1, w2) = (s.theta_dot[0], s.theta_dot[1]);
    let m11 = p.m1 * p.lc1.powi(2) + p.i1 + p.m2 * (p.l1.powi(2) + p.lc2.powi(2) + 2.0 * p.l1 * p.lc2 * t2.cos()) + p.i2;
    let m12 = p.m2 * (p.lc2.powi(2) + p.l1 * p.lc2 * t2.cos()) + p.i2;
    let m22 = p.m2 * p.lc2.powi(2) + p.i2;
    let kinetic = 0.5 * (m11 * w1 * w1 + 2.0 * m12 * w1 * w2 + m22 * w2 * w2);
    let y1 = p.lc1 * t1.sin();
    let y2 = p.l1 * t1.sin() + p.lc2 * (t1 + t2).sin();
    let potential = p.gravity * (p.m1 * (y1 + p.lc1) + p.m2 * (y2 + p.l1 + p.lc2));
    kinetic + potential
}
