//! Butterworth band-pass design and zero-phase (forward-backward) filtering.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterDesign {
    Butterworth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSpec {
    pub low_cut: f64,
    pub high_cut: f64,
    /// Order of the low-pass prototype; the band-pass has twice as many poles.
    pub order: usize,
    pub design: FilterDesign,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            low_cut: 1.0,
            high_cut: 15.0,
            order: 4,
            design: FilterDesign::Butterworth,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::config(format!("invalid sample rate {fs}")));
        }
        if !(self.low_cut > 0.0 && self.low_cut < self.high_cut && self.high_cut < fs / 2.0) {
            return Err(Error::config(format!(
                "band {}-{} Hz must satisfy 0 < low < high < {} Hz",
                self.low_cut,
                self.high_cut,
                fs / 2.0
            )));
        }
        if self.order == 0 {
            return Err(Error::config("filter order must be at least 1"));
        }
        Ok(())
    }
}

/// One second-order section, `b0 + b1 z^-1 + b2 z^-2 / 1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex<f64>) -> Complex<f64> {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2])
            / (Complex::new(1.0, 0.0) + z_inv * self.a[0] + z2 * self.a[1])
    }

    fn run(&self, x: &mut [f64]) {
        // transposed direct form II
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * y + s2;
            s2 = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandpassFilter {
    sections: Vec<Biquad>,
    fs: f64,
    pad: usize,
}

impl BandpassFilter {
    pub fn design(fs: f64, spec: &FilterSpec) -> Result<Self> {
        spec.validate(fs)?;
        let n = spec.order;
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (wl, wh) = (warp(spec.low_cut), warp(spec.high_cut));
        let bw = wh - wl;
        let w0_sq = wl * wh;
        let two_fs = Complex::new(2.0 * fs, 0.0);

        let mut upper = Vec::new();
        let mut real = Vec::new();
        for k in 1..=n {
            let theta = PI * (2 * k + n - 1) as f64 / (2 * n) as f64;
            let proto = Complex::from_polar(1.0, theta);
            let a = proto * (bw / 2.0);
            let d = (a * a - w0_sq).sqrt();
            for s in [a + d, a - d] {
                let z = (two_fs + s) / (two_fs - s);
                if z.im > 1e-12 {
                    upper.push(z);
                } else if z.im.abs() <= 1e-12 {
                    real.push(z.re);
                }
            }
        }
        let mut sections: Vec<Biquad> = upper
            .iter()
            .map(|p| Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-2.0 * p.re, p.norm_sqr()],
            })
            .collect();
        real.sort_by(f64::total_cmp);
        for pair in real.chunks(2) {
            let (p1, p2) = (pair[0], *pair.get(1).unwrap_or(&0.0));
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-(p1 + p2), p1 * p2],
            });
        }
        debug_assert_eq!(sections.len(), n);

        let mut filter = Self {
            sections,
            fs,
            pad: ((3.0 * fs / spec.low_cut).ceil() as usize).max(1),
        };
        // Unit gain at the bilinear image of the analog center frequency.
        let center = fs / PI * (w0_sq.sqrt() / (2.0 * fs)).atan();
        let g = 1.0 / filter.magnitude(center);
        for b in filter.sections[0].b.iter_mut() {
            *b *= g;
        }
        Ok(filter)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Magnitude of the single-pass frequency response at `freq` Hz.
    pub fn magnitude(&self, freq: f64) -> f64 {
        let z_inv = Complex::from_polar(1.0, -2.0 * PI * freq / self.fs);
        self.sections
            .iter()
            .fold(Complex::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
            .norm()
    }

    /// Single forward pass from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y);
        }
        y
    }

    /// Zero-phase filtering: odd-reflection padding at both ends, then a
    /// forward and a backward pass.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = self.pad.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let mut y = self.filter(&ext);
        y.reverse();
        let mut y = self.filter(&y);
        y.reverse();
        y[pad..pad + n].to_vec()
    }
}

/// Zero-phase Butterworth band-pass of one channel.
pub fn bandpass(signal: &[f64], fs: f64, spec: &FilterSpec) -> Result<Vec<f64>> {
    Ok(BandpassFilter::design(fs, spec)?.filtfilt(signal))
}

/// Remove the least-squares line from a signal.
pub fn detrend(signal: &[f64]) -> Result<Vec<f64>> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::size(format!("detrend needs at least 2 samples, got {n}")));
    }
    let t_mean = (n - 1) as f64 / 2.0;
    let y_mean = signal.iter().sum::<f64>() / n as f64;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (i, &y) in signal.iter().enumerate() {
        let t = i as f64 - t_mean;
        sty += t * (y - y_mean);
        stt += t * t;
    }
    let slope = sty / stt;
    Ok(signal
        .iter()
        .enumerate()
        .map(|(i, &y)| y - y_mean - slope * (i as f64 - t_mean))
        .collect())
}
