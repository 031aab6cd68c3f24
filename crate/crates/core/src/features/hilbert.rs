//! Analytic signal and Hilbert-Huang instantaneous amplitude/frequency.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Number of values returned by [`hht_features`].
pub const HHT_FEATURES: usize = 5;
/// Fraction trimmed from each end before computing statistics.
const EDGE_TRIM: f64 = 0.1;

/// FFT construction: keep DC (and Nyquist), double positive frequencies,
/// zero negative ones. The real part is the input itself.
pub fn analytic_signal(signal: &[f64]) -> Result<Vec<Complex<f64>>> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::size(format!(
            "analytic signal needs at least 4 samples, got {n}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, bin) in buf.iter_mut().enumerate() {
        let w = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *bin *= w;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf
        .iter()
        .zip(signal)
        .map(|(c, &x)| Complex::new(x, c.im / n as f64))
        .collect())
}

fn unwrap_phase(phase: &mut [f64]) {
    let Some(&first) = phase.first() else {
        return;
    };
    let (mut prev_raw, mut acc) = (first, first);
    for p in phase.iter_mut().skip(1) {
        let raw = *p;
        let mut d = raw - prev_raw;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        acc += d;
        *p = acc;
        prev_raw = raw;
    }
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Summary of the first IMF: mean, std and max of the instantaneous
/// amplitude, then mean and std of the instantaneous frequency (Hz), all over
/// the interior 80% of samples.
pub fn hht_features(imf1: &[f64], fs: f64) -> Result<Vec<f64>> {
    let n = imf1.len();
    if n < 8 {
        return Err(Error::size(format!("HHT needs at least 8 samples, got {n}")));
    }
    if imf1.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; HHT_FEATURES]);
    }
    let z = analytic_signal(imf1)?;
    let amplitude: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    let mut phase: Vec<f64> = z.iter().map(|c| c.arg()).collect();
    unwrap_phase(&mut phase);

    let trim = ((n as f64 * EDGE_TRIM).floor() as usize).max(1);
    let (lo, hi) = (trim, n - trim);
    let freq: Vec<f64> = (lo..hi)
        .map(|i| (phase[i + 1] - phase[i - 1]) / 2.0 * fs / (2.0 * PI))
        .collect();
    let amp = &amplitude[lo..hi];
    let (a_mean, a_std) = mean_std(amp);
    let a_max = amp.iter().fold(f64::MIN, |m, &v| m.max(v));
    let (f_mean, f_std) = mean_std(&freq);
    Ok(vec![a_mean, a_std, a_max, f_mean, f_std])
}
