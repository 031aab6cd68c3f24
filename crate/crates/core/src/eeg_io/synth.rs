//! Parametric P300 subject used in place of a human participant.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{RawRecording, StimulusEvent, DEFAULT_CHANNELS, NUM_BULBS, ROUND_PAUSE_MS, SOA_MS};
use crate::error::{Error, Result};

/// Silence before the first and after the last round.
const PAD_MS: f64 = 1000.0;
/// FWHM to Gaussian standard deviation.
const FWHM_PER_SIGMA: f64 = 2.355;
/// The bump is cut to zero beyond this many standard deviations.
const BUMP_SUPPORT_SIGMAS: f64 = 4.0;
const MIN_SAMPLE_RATE: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseColor {
    White,
    Pink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSubjectConfig {
    /// Peak of the P300 deflection, µV.
    pub p300_amplitude: f64,
    /// Center of the deflection after flash onset, ms.
    pub p300_latency: f64,
    /// Full width at half maximum, ms.
    pub p300_width: f64,
    /// Background noise standard deviation per channel, µV.
    pub noise_std: f64,
    pub noise_color: NoiseColor,
    /// Zero-based channel indices that carry the P300.
    pub responsive_channels: Vec<usize>,
    pub n_channels: usize,
    pub rng_seed: u64,
    /// One attended bulb (1-4) per decision.
    pub intended_bulbs: Vec<u8>,
    pub rounds_per_decision: usize,
}

impl Default for SyntheticSubjectConfig {
    fn default() -> Self {
        Self {
            p300_amplitude: 5.0,
            p300_latency: 300.0,
            p300_width: 100.0,
            noise_std: 2.0,
            noise_color: NoiseColor::Pink,
            responsive_channels: vec![2, 3, 4, 5, 6, 7],
            n_channels: DEFAULT_CHANNELS,
            rng_seed: 1,
            intended_bulbs: vec![1, 3, 2, 4],
            rounds_per_decision: 5,
        }
    }
}

impl SyntheticSubjectConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(250.0..=500.0).contains(&self.p300_latency) {
            return bad(format!(
                "p300_latency {} ms outside [250, 500] ms",
                self.p300_latency
            ));
        }
        if !(self.p300_width > 0.0 && self.p300_width.is_finite()) {
            return bad(format!("p300_width must be positive, got {}", self.p300_width));
        }
        if !(self.p300_amplitude.is_finite() && self.p300_amplitude >= 0.0) {
            return bad(format!("invalid p300_amplitude {}", self.p300_amplitude));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad(format!("invalid noise_std {}", self.noise_std));
        }
        if self.n_channels == 0 {
            return bad("n_channels must be at least 1".into());
        }
        if let Some(c) = self.responsive_channels.iter().find(|&&c| c >= self.n_channels) {
            return bad(format!("responsive channel {c} out of range"));
        }
        if self.rounds_per_decision == 0 {
            return bad("rounds_per_decision must be at least 1".into());
        }
        if self.intended_bulbs.is_empty() {
            return bad("intended_bulbs is empty".into());
        }
        if let Some(b) = self
            .intended_bulbs
            .iter()
            .find(|&&b| b == 0 || b as usize > NUM_BULBS)
        {
            return bad(format!("intended bulb {b} not in 1..=4"));
        }
        Ok(())
    }

    /// The P300 template value `ms` milliseconds after a target onset.
    pub fn template_at(&self, ms: f64) -> f64 {
        let sigma = self.p300_width / FWHM_PER_SIGMA;
        let d = ms - self.p300_latency;
        if d.abs() > BUMP_SUPPORT_SIGMAS * sigma {
            0.0
        } else {
            self.p300_amplitude * (-0.5 * (d / sigma).powi(2)).exp()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSession {
    pub recording: RawRecording,
    /// Ground truth, one bulb per decision block.
    pub intended: Vec<u8>,
    /// Every flash the generator emitted, in order.
    pub events: Vec<StimulusEvent>,
}

/// Generate a recording of a simulated subject attending `intended_bulbs`.
pub fn synth_session(config: &SyntheticSubjectConfig, sample_rate: f64) -> Result<SyntheticSession> {
    config.validate()?;
    if !(sample_rate >= MIN_SAMPLE_RATE) {
        return Err(Error::config(format!(
            "sample rate {sample_rate} Hz cannot represent the 15 Hz band (need >= {MIN_SAMPLE_RATE} Hz)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let n_rounds = config.intended_bulbs.len() * config.rounds_per_decision;
    let round_ms = NUM_BULBS as f64 * SOA_MS + ROUND_PAUSE_MS;
    let total_ms = 2.0 * PAD_MS + n_rounds as f64 * round_ms;
    let n_samples = (total_ms * 1e-3 * sample_rate).round() as usize;
    let to_sample = |ms: f64| (ms * 1e-3 * sample_rate).round() as usize;

    let mut trigger = vec![0u8; n_samples];
    let mut events = Vec::with_capacity(n_rounds * NUM_BULBS);
    let mut targets = Vec::new();
    for round in 0..n_rounds {
        let attended = config.intended_bulbs[round / config.rounds_per_decision];
        let mut order: Vec<u8> = (1..=NUM_BULBS as u8).collect();
        order.shuffle(&mut rng);
        let start_ms = PAD_MS + round as f64 * round_ms;
        for (slot, &bulb) in order.iter().enumerate() {
            let onset = to_sample(start_ms + slot as f64 * SOA_MS);
            trigger[onset] = bulb;
            events.push(StimulusEvent {
                onset_sample: onset,
                bulb,
                round_index: round,
            });
            if bulb == attended {
                targets.push(onset);
            }
        }
    }

    let mut channels = Vec::with_capacity(config.n_channels);
    for _ in 0..config.n_channels {
        channels.push(background_noise(
            n_samples,
            sample_rate,
            config.noise_std,
            config.noise_color,
            &mut rng,
        ));
    }

    let sigma_ms = config.p300_width / FWHM_PER_SIGMA;
    let reach = ((config.p300_latency + BUMP_SUPPORT_SIGMAS * sigma_ms) * 1e-3 * sample_rate)
        .ceil() as usize;
    for &onset in &targets {
        for k in 0..=reach {
            let idx = onset + k;
            if idx >= n_samples {
                break;
            }
            let value = config.template_at(k as f64 * 1e3 / sample_rate);
            if value == 0.0 {
                continue;
            }
            for &ch in &config.responsive_channels {
                channels[ch][idx] += value;
            }
        }
    }

    let recording = RawRecording::with_uniform_time(sample_rate, channels, trigger)?;
    Ok(SyntheticSession {
        recording,
        intended: config.intended_bulbs.clone(),
        events,
    })
}

fn background_noise(
    n: usize,
    sample_rate: f64,
    std: f64,
    color: NoiseColor,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut white: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    if std == 0.0 {
        return vec![0.0; n];
    }
    if color == NoiseColor::Pink {
        white = shape_pink(&white, sample_rate);
    }
    let mean = white.iter().sum::<f64>() / n as f64;
    let sd = (white.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let scale = if sd > 0.0 { std / sd } else { 0.0 };
    white.iter().map(|x| (x - mean) * scale).collect()
}

/// Shape white noise to a 1/f power spectrum (1/sqrt(f) magnitude).
fn shape_pink(white: &[f64], sample_rate: f64) -> Vec<f64> {
    let n = white.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = white.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex::new(0.0, 0.0);
    for (k, bin) in buf.iter_mut().enumerate().skip(1) {
        let f = k.min(n - k) as f64 * sample_rate / n as f64;
        *bin /= f.sqrt();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eeg_io::segment_rounds;

    fn quiet(latency: f64) -> SyntheticSubjectConfig {
        SyntheticSubjectConfig {
            noise_std: 0.0,
            p300_latency: latency,
            intended_bulbs: vec![2, 4],
            rounds_per_decision: 3,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_target_peaks_at_latency() {
        let cfg = quiet(300.0);
        let session = synth_session(&cfg, 500.0).unwrap();
        let rec = &session.recording;
        let ch = rec.channel(cfg.responsive_channels[0]);
        for ev in session.events.iter().filter(|e| e.round_index < 3 && e.bulb == 2) {
            let window = &ch[ev.onset_sample..ev.onset_sample + 300];
            let (argmax, peak) = window
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
            assert!((argmax as i64 - 150).abs() <= 1, "peak at sample {argmax}");
            assert!((peak - 5.0).abs() < 1e-9);
        }
        // unresponsive channels stay flat
        assert!(rec.channel(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_recording() {
        let cfg = SyntheticSubjectConfig::default();
        let a = synth_session(&cfg, 500.0).unwrap();
        let b = synth_session(&cfg, 500.0).unwrap();
        assert_eq!(a.recording, b.recording);
        let other = SyntheticSubjectConfig {
            rng_seed: 2,
            ..cfg
        };
        assert_ne!(synth_session(&other, 500.0).unwrap().recording, a.recording);
    }

    #[test]
    fn events_match_segmentation_and_spacing() {
        let cfg = SyntheticSubjectConfig::default();
        let session = synth_session(&cfg, 500.0).unwrap();
        let recovered = segment_rounds(&session.recording).unwrap();
        assert_eq!(recovered, session.events);
        assert_eq!(
            recovered.last().unwrap().round_index + 1,
            cfg.rounds_per_decision * cfg.intended_bulbs.len()
        );
        for round in recovered.chunks(NUM_BULBS) {
            for w in round.windows(2) {
                let gap = (w[1].onset_sample - w[0].onset_sample) as f64 / 500.0 * 1e3;
                assert!((gap - SOA_MS).abs() <= 2.0);
            }
        }
    }

    #[test]
    fn noise_has_requested_std() {
        let cfg = SyntheticSubjectConfig {
            p300_amplitude: 0.0,
            ..Default::default()
        };
        let rec = synth_session(&cfg, 500.0).unwrap().recording;
        for ch in rec.channels() {
            let n = ch.len() as f64;
            let mean = ch.iter().sum::<f64>() / n;
            let sd = (ch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!((sd - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn config_errors() {
        assert!(synth_session(&SyntheticSubjectConfig::default(), 59.0).is_err());
        let late = SyntheticSubjectConfig {
            p300_latency: 550.0,
            ..Default::default()
        };
        assert!(matches!(synth_session(&late, 500.0), Err(Error::Config(_))));
        let empty = SyntheticSubjectConfig {
            intended_bulbs: vec![],
            ..Default::default()
        };
        assert!(synth_session(&empty, 500.0).is_err());
    }
}
