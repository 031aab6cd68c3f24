//! Empirical mode decomposition by cubic-spline envelope sifting.

use serde::{Deserialize, Serialize};

use super::spline::CubicSpline;
use crate::error::{Error, Result};

/// Number of mirrored extrema added beyond each end of the signal.
const MIRRORED_EXTREMA: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmdConfig {
    pub max_imfs: usize,
    /// Sifting continues until `sum(m^2) / sum(h^2)` between successive
    /// candidates falls below this value.
    pub sift_sd_threshold: f64,
    /// Maximum |envelope mean| allowed in an accepted IMF, as a fraction of
    /// the IMF's peak magnitude.
    pub envelope_mean_tolerance: f64,
    pub max_sift_iterations: usize,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            max_imfs: 6,
            sift_sd_threshold: 0.25,
            envelope_mean_tolerance: 0.05,
            max_sift_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImfDecomposition {
    /// Highest-frequency mode first.
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

impl ImfDecomposition {
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extrema {
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
}

impl Extrema {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }
}

/// Interior local extrema. A flat run counts once, at its middle.
pub fn local_extrema(x: &[f64]) -> Extrema {
    let mut ext = Extrema::default();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        let (before, after) = (x[i - 1], x[j + 1]);
        if x[i] > before && x[i] > after {
            ext.maxima.push((i + j) / 2);
        } else if x[i] < before && x[i] < after {
            ext.minima.push((i + j) / 2);
        }
        i = j + 1;
    }
    ext
}

/// Sign changes, ignoring samples that are exactly zero.
pub fn zero_crossings(x: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in x {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

/// Knot set for one envelope: the interior extrema, the end samples when
/// they are extrema of the even-symmetric extension, and the first/last
/// extrema mirrored about each end.
fn envelope_knots(x: &[f64], interior: &[usize], upper: bool) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let beats = |a: f64, b: f64| if upper { a > b } else { a < b };
    let mut t: Vec<f64> = Vec::with_capacity(interior.len() + 2 * MIRRORED_EXTREMA + 2);
    let mut v: Vec<f64> = Vec::with_capacity(t.capacity());

    for &i in interior.iter().take(MIRRORED_EXTREMA).rev() {
        t.push(-(i as f64));
        v.push(x[i]);
    }
    if beats(x[0], x[1]) {
        t.push(0.0);
        v.push(x[0]);
    }
    for &i in interior {
        t.push(i as f64);
        v.push(x[i]);
    }
    if beats(x[n - 1], x[n - 2]) {
        t.push((n - 1) as f64);
        v.push(x[n - 1]);
    }
    let right = 2.0 * (n - 1) as f64;
    for &i in interior.iter().rev().take(MIRRORED_EXTREMA) {
        t.push(right - i as f64);
        v.push(x[i]);
    }
    (t, v)
}

/// Mean of the upper and lower cubic-spline envelopes, or `None` when the
/// signal lacks an interior maximum or minimum.
pub fn envelope_mean(x: &[f64]) -> Option<Vec<f64>> {
    let ext = local_extrema(x);
    envelope_mean_with(x, &ext)
}

fn envelope_mean_with(x: &[f64], ext: &Extrema) -> Option<Vec<f64>> {
    if ext.maxima.is_empty() || ext.minima.is_empty() {
        return None;
    }
    let (tu, vu) = envelope_knots(x, &ext.maxima, true);
    let (tl, vl) = envelope_knots(x, &ext.minima, false);
    let upper = CubicSpline::new(tu, vu).eval_grid(x.len());
    let lower = CubicSpline::new(tl, vl).eval_grid(x.len());
    Some(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect())
}

fn peak_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn counts_balanced(x: &[f64], ext: &Extrema) -> bool {
    (ext.count() as i64 - zero_crossings(x) as i64).abs() <= 1
}

/// Check both IMF conditions: extrema and zero-crossing counts differ by at
/// most one, and the envelope mean stays within `tolerance` of the peak.
pub fn is_imf(x: &[f64], tolerance: f64) -> bool {
    let ext = local_extrema(x);
    if !counts_balanced(x, &ext) {
        return false;
    }
    match envelope_mean_with(x, &ext) {
        Some(m) => peak_abs(&m) <= tolerance * peak_abs(x),
        None => true,
    }
}

pub fn emd(signal: &[f64], max_imfs: usize, sift_sd_threshold: f64) -> Result<ImfDecomposition> {
    emd_with(
        signal,
        &EmdConfig {
            max_imfs,
            sift_sd_threshold,
            ..Default::default()
        },
    )
}

pub fn emd_with(signal: &[f64], cfg: &EmdConfig) -> Result<ImfDecomposition> {
    if signal.len() < 8 {
        return Err(Error::size(format!(
            "EMD needs at least 8 samples, got {}",
            signal.len()
        )));
    }
    if cfg.max_imfs == 0 {
        return Err(Error::config("max_imfs must be at least 1"));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("EMD input has non-finite samples".into()));
    }

    let mut imfs = Vec::new();
    let mut residual = signal.to_vec();
    while imfs.len() < cfg.max_imfs {
        let ext = local_extrema(&residual);
        if ext.maxima.is_empty() || ext.minima.is_empty() {
            break;
        }
        let imf = sift(&residual, cfg);
        if imf.iter().all(|&v| v == 0.0) {
            break;
        }
        for (r, v) in residual.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
    }
    Ok(ImfDecomposition { imfs, residual })
}

fn sift(x: &[f64], cfg: &EmdConfig) -> Vec<f64> {
    let mut h = x.to_vec();
    for _ in 0..cfg.max_sift_iterations {
        let ext = local_extrema(&h);
        let Some(mean) = envelope_mean_with(&h, &ext) else {
            break;
        };
        let energy: f64 = h.iter().map(|v| v * v).sum();
        if energy == 0.0 {
            break;
        }
        let sd = mean.iter().map(|v| v * v).sum::<f64>() / energy;
        if sd < cfg.sift_sd_threshold
            && counts_balanced(&h, &ext)
            && peak_abs(&mean) <= cfg.envelope_mean_tolerance * peak_abs(&h)
        {
            break;
        }
        for (v, m) in h.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    h
}
