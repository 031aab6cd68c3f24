use serde::{Deserialize, Serialize};

use crate::eeg_io::{RawRecording, StimulusEvent, NUM_BULBS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Target,
    Nontarget,
    Unknown,
}

impl Label {
    pub fn from_intent(bulb: u8, intended: u8) -> Self {
        if bulb == intended {
            Label::Target
        } else {
            Label::Nontarget
        }
    }
}

/// Stimulus-locked window, `n_channels × n_epoch_samples` µV.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub samples: Vec<Vec<f64>>,
    pub bulb: u8,
    pub round_index: usize,
    pub label: Label,
}

impl Epoch {
    pub fn peak_abs(&self) -> f64 {
        self.samples
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedEpoch {
    pub samples: Vec<Vec<f64>>,
    pub bulb: u8,
    pub n_averaged: usize,
    pub label: Label,
}

impl AveragedEpoch {
    pub fn n_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }
}

pub fn epoch_len(sample_rate: f64, window_ms: f64) -> usize {
    (window_ms * 1e-3 * sample_rate).round() as usize
}

/// Cut one window per event. Labels start as `Unknown`.
pub fn extract_epochs(
    rec: &RawRecording,
    events: &[StimulusEvent],
    window_ms: f64,
) -> Result<Vec<Epoch>> {
    let len = epoch_len(rec.sample_rate(), window_ms);
    if len == 0 {
        return Err(Error::config(format!("epoch window {window_ms} ms is empty")));
    }
    events
        .iter()
        .enumerate()
        .map(|(i, ev)| {
            let end = ev.onset_sample + len;
            if end > rec.n_samples() {
                return Err(Error::Boundary {
                    event: i,
                    onset: ev.onset_sample,
                });
            }
            Ok(Epoch {
                samples: rec
                    .channels()
                    .iter()
                    .map(|c| c[ev.onset_sample..end].to_vec())
                    .collect(),
                bulb: ev.bulb,
                round_index: ev.round_index,
                label: Label::Unknown,
            })
        })
        .collect()
}

/// Drop every epoch with any sample whose magnitude exceeds `amp_threshold`.
/// Returns the survivors and the indices of the rejected epochs.
pub fn reject_artifacts(epochs: &[Epoch], amp_threshold: f64) -> (Vec<Epoch>, Vec<usize>) {
    let mut kept = Vec::with_capacity(epochs.len());
    let mut rejected = Vec::new();
    for (i, e) in epochs.iter().enumerate() {
        if e.peak_abs() > amp_threshold {
            rejected.push(i);
        } else {
            kept.push(e.clone());
        }
    }
    (kept, rejected)
}

/// Average the epochs of one decision block per bulb, returning bulbs 1-4 in
/// order. `block` only tags the error.
pub fn average_epochs(epochs: &[Epoch], block: usize) -> Result<Vec<AveragedEpoch>> {
    (1..=NUM_BULBS as u8)
        .map(|bulb| {
            let group: Vec<&Epoch> = epochs.iter().filter(|e| e.bulb == bulb).collect();
            let first = group
                .first()
                .ok_or(Error::InsufficientData { block, bulb })?;
            let (n_ch, n_s) = (first.samples.len(), first.samples[0].len());
            let mut sum = vec![vec![0.0; n_s]; n_ch];
            for e in &group {
                if e.samples.len() != n_ch || e.samples.iter().any(|c| c.len() != n_s) {
                    return Err(Error::size("epochs in one block differ in shape"));
                }
                for (acc, ch) in sum.iter_mut().zip(&e.samples) {
                    for (a, v) in acc.iter_mut().zip(ch) {
                        *a += v;
                    }
                }
            }
            let n = group.len() as f64;
            sum.iter_mut().flatten().for_each(|v| *v /= n);
            let label = if group.iter().all(|e| e.label == first.label) {
                first.label
            } else {
                Label::Unknown
            };
            Ok(AveragedEpoch {
                samples: sum,
                bulb,
                n_averaged: group.len(),
                label,
            })
        })
        .collect()
}
