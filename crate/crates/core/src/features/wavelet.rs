//! Semi-orthogonal quadratic B-spline wavelets (Chui-Wang) with periodic
//! boundaries. Each level splits the current spline-space coefficients into
//! their orthogonal projection onto the next coarser spline space and the
//! complementary wavelet component. The dual filters are not finite, so the
//! split is carried out on the DFT grid.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Two-scale mask of the quadratic B-spline, `(1 + z^-1)^3 / 4`.
const REFINE: [f64; 4] = [0.25, 0.75, 0.75, 0.25];

/// Gram symbol of integer-shifted quadratic B-splines. The coefficients are
/// the quintic B-spline at the integers.
fn gram(w: f64) -> f64 {
    (66.0 + 52.0 * w.cos() + 2.0 * (2.0 * w).cos()) / 120.0
}

fn refine(w: f64) -> Complex<f64> {
    REFINE
        .iter()
        .enumerate()
        .map(|(n, &h)| Complex::from_polar(h, -(n as f64) * w))
        .sum()
}

/// Unscaled wavelet mask; orthogonal to the coarse space under the Gram
/// product.
fn wavelet_raw(w: f64) -> Complex<f64> {
    Complex::from_polar(gram(w + PI), -w) * refine(w + PI).conj()
}

/// Scale giving wavelets the same L2 norm as scaling functions on one level.
fn wavelet_scale() -> f64 {
    const GRID: usize = 64;
    let (mut phi, mut psi) = (0.0, 0.0);
    for i in 0..GRID {
        let w = 2.0 * PI * i as f64 / GRID as f64;
        phi += refine(w).norm_sqr() * gram(w);
        psi += wavelet_raw(w).norm_sqr() * gram(w);
    }
    (phi / psi).sqrt()
}

struct Bank {
    planner: FftPlanner<f64>,
    scale: f64,
}

impl Bank {
    fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            scale: wavelet_scale(),
        }
    }

    fn wavelet(&self, w: f64) -> Complex<f64> {
        wavelet_raw(w) * self.scale
    }

    fn spectrum(&mut self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.planner.plan_fft_forward(buf.len()).process(&mut buf);
        buf
    }

    fn signal(&mut self, mut buf: Vec<Complex<f64>>) -> Vec<f64> {
        let n = buf.len();
        self.planner.plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|c| c.re / n as f64).collect()
    }

    fn analysis_step(&mut self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let m = n / 2;
        let spec = self.spectrum(x);
        let mut approx = vec![Complex::new(0.0, 0.0); m];
        let mut detail = vec![Complex::new(0.0, 0.0); m];
        for k in 0..m {
            let w = 2.0 * PI * k as f64 / n as f64;
            let bins = [(w, spec[k]), (w + PI, spec[k + m])];
            let inner: Complex<f64> = bins
                .iter()
                .map(|&(w, c)| refine(w).conj() * gram(w) * c)
                .sum();
            let a = inner / (4.0 * gram(2.0 * w));
            let (mut num, mut den) = (Complex::new(0.0, 0.0), 0.0);
            for &(w, c) in &bins {
                let g = self.wavelet(w);
                num += g.conj() * (c - refine(w) * a);
                den += g.norm_sqr();
            }
            approx[k] = a;
            detail[k] = if den > 0.0 { num / den } else { Complex::new(0.0, 0.0) };
        }
        (self.signal(approx), self.signal(detail))
    }

    fn synthesis_step(&mut self, approx: &[f64], detail: &[f64]) -> Vec<f64> {
        let m = approx.len();
        let n = 2 * m;
        let (a, d) = (self.spectrum(approx), self.spectrum(detail));
        let fine = (0..n)
            .map(|k| {
                let w = 2.0 * PI * k as f64 / n as f64;
                refine(w) * a[k % m] + self.wavelet(w) * d[k % m]
            })
            .collect();
        self.signal(fine)
    }
}

/// Upper edge of the delta band; theta spans one octave above it.
pub const DELTA_EDGE_HZ: f64 = 4.0;

/// Number of levels so that the deepest approximation covers `[0, ~4]` Hz
/// and the deepest detail `[~4, ~8]` Hz.
pub fn wavelet_levels(fs: f64) -> Result<usize> {
    if !(fs >= 32.0) {
        return Err(Error::config(format!(
            "sample rate {fs} Hz too low to resolve delta and theta bands (need >= 32 Hz)"
        )));
    }
    Ok((fs / (2.0 * DELTA_EDGE_HZ)).log2().round() as usize)
}

/// Length after zero-padding to a multiple of `2^levels`.
pub fn padded_len(n: usize, levels: usize) -> usize {
    let block = 1usize << levels;
    n.div_ceil(block).max(1) * block
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    /// Details from the finest level (1) to the coarsest.
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
    /// Unpadded input length.
    pub len: usize,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        let mut bank = Bank::new();
        let mut x = self.approx.clone();
        for d in self.details.iter().rev() {
            x = bank.synthesis_step(&x, d);
        }
        x.truncate(self.len);
        x
    }
}

pub fn wavedec(signal: &[f64], levels: usize) -> WaveletDecomposition {
    let mut x = signal.to_vec();
    x.resize(padded_len(signal.len(), levels), 0.0);
    let mut bank = Bank::new();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = bank.analysis_step(&x);
        details.push(d);
        x = a;
    }
    WaveletDecomposition {
        details,
        approx: x,
        len: signal.len(),
    }
}

/// Delta coefficients (deepest approximation) and theta coefficients
/// (deepest detail).
pub fn wavelet_bands(signal: &[f64], fs: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let levels = wavelet_levels(fs)?;
    if signal.is_empty() {
        return Err(Error::size("wavelet decomposition of an empty signal"));
    }
    let mut dec = wavedec(signal, levels);
    let theta = dec.details.pop().unwrap_or_default();
    Ok((dec.approx, theta))
}

/// Coefficient count per band for a signal of `n` samples at `fs`.
pub fn band_len(n: usize, fs: f64) -> Result<usize> {
    let levels = wavelet_levels(fs)?;
    Ok(padded_len(n, levels) >> levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_follow_sample_rate() {
        assert_eq!(wavelet_levels(512.0).unwrap(), 6);
        assert_eq!(wavelet_levels(500.0).unwrap(), 6);
        assert_eq!(wavelet_levels(32.0).unwrap(), 2);
        assert!(wavelet_levels(31.0).is_err());
        assert_eq!(band_len(300, 500.0).unwrap(), 5);
    }

    #[test]
    fn perfect_reconstruction() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let dec = wavedec(&x, 5);
        let y = dec.reconstruct();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn zero_signal_zero_coefficients() {
        let (d, t) = wavelet_bands(&[0.0; 300], 500.0).unwrap();
        assert!(d.iter().chain(&t).all(|&v| v == 0.0));
    }

    #[test]
    fn constant_has_no_detail() {
        let dec = wavedec(&[2.0; 64], 3);
        assert!(dec.details.iter().flatten().all(|v| v.abs() < 1e-12));
    }
}
