//! Recording data model, Starstim-style CSV files, stimulus segmentation and
//! the synthetic P300 subject.
//!
//! A recording holds `n_channels` EEG channels in microvolts, a trigger
//! column (0 = no event, 1-4 = bulb ID at flash onset) and a time column in
//! seconds.

mod csv;
mod synth;

pub use self::csv::{
    load_ground_truth, load_recording, load_recording_with, read_recording, save_ground_truth,
    save_recording, write_recording,
};
pub use self::synth::{synth_session, NoiseColor, SyntheticSession, SyntheticSubjectConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_BULBS: usize = 4;
pub const DEFAULT_CHANNELS: usize = 8;
pub const DEFAULT_SAMPLE_RATE: f64 = 500.0;

/// Flash duration.
pub const FLASH_MS: f64 = 100.0;
/// Dark gap between one flash turning off and the next turning on.
pub const GAP_MS: f64 = 150.0;
/// Stimulus-onset asynchrony.
pub const SOA_MS: f64 = FLASH_MS + GAP_MS;
/// Pause after the last flash of a round before the next round begins.
pub const ROUND_PAUSE_MS: f64 = 1000.0;

/// Relative tolerance on the sampling interval.
const DT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    sample_rate: f64,
    channels: Vec<Vec<f64>>,
    trigger: Vec<u8>,
    timestamps: Vec<f64>,
}

impl RawRecording {
    pub fn new(
        sample_rate: f64,
        channels: Vec<Vec<f64>>,
        trigger: Vec<u8>,
        timestamps: Vec<f64>,
    ) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::config(format!("invalid sample rate {sample_rate}")));
        }
        if channels.is_empty() {
            return Err(Error::size("recording has no channels"));
        }
        let n = trigger.len();
        if timestamps.len() != n || channels.iter().any(|c| c.len() != n) {
            return Err(Error::size(
                "channels, trigger and timestamps must share the sample count",
            ));
        }
        if let Some((i, code)) = trigger
            .iter()
            .enumerate()
            .find(|(_, &c)| c as usize > NUM_BULBS)
        {
            return Err(Error::Integrity(format!(
                "unknown trigger code {code} at sample {i}"
            )));
        }
        let expected_dt = 1.0 / sample_rate;
        for (i, w) in timestamps.windows(2).enumerate() {
            let dt = w[1] - w[0];
            if !(dt > 0.0) {
                return Err(Error::Integrity(format!(
                    "timestamps not strictly increasing at sample {}",
                    i + 1
                )));
            }
            if ((dt - expected_dt) / expected_dt).abs() > DT_TOLERANCE {
                return Err(Error::Integrity(format!(
                    "sampling interval {dt} s at sample {} deviates from 1/{sample_rate} s",
                    i + 1
                )));
            }
        }
        Ok(Self {
            sample_rate,
            channels,
            trigger,
            timestamps,
        })
    }

    /// Build a recording with timestamps `i / sample_rate`.
    pub fn with_uniform_time(
        sample_rate: f64,
        channels: Vec<Vec<f64>>,
        trigger: Vec<u8>,
    ) -> Result<Self> {
        let timestamps = (0..trigger.len())
            .map(|i| i as f64 / sample_rate)
            .collect();
        Self::new(sample_rate, channels, trigger, timestamps)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.trigger.len()
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn trigger(&self) -> &[u8] {
        &self.trigger
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    /// Apply `f` to every channel, keeping trigger and time columns.
    pub fn try_map_channels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let channels = self
            .channels
            .iter()
            .map(|c| f(c))
            .collect::<Result<Vec<_>>>()?;
        if channels.iter().any(|c| c.len() != self.n_samples()) {
            return Err(Error::size("channel transform changed the sample count"));
        }
        Ok(Self {
            channels,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusEvent {
    pub onset_sample: usize,
    pub bulb: u8,
    pub round_index: usize,
}

/// Recover stimulus events from the trigger column, grouping them into rounds
/// in which every bulb flashes exactly once.
pub fn segment_rounds(rec: &RawRecording) -> Result<Vec<StimulusEvent>> {
    let mut events = Vec::new();
    let mut seen = [false; NUM_BULBS];
    let mut round = 0;
    for (sample, &code) in rec.trigger().iter().enumerate() {
        if code == 0 {
            continue;
        }
        let slot = code as usize - 1;
        if seen[slot] {
            return Err(Error::Protocol {
                round,
                message: format!("bulb {code} repeated before all bulbs flashed"),
            });
        }
        seen[slot] = true;
        events.push(StimulusEvent {
            onset_sample: sample,
            bulb: code,
            round_index: round,
        });
        if seen.iter().all(|&s| s) {
            seen = [false; NUM_BULBS];
            round += 1;
        }
    }
    if seen.iter().any(|&s| s) {
        let missing: Vec<usize> = (1..=NUM_BULBS).filter(|b| !seen[b - 1]).collect();
        return Err(Error::Protocol {
            round,
            message: format!("recording ends with bulbs {missing:?} missing"),
        });
    }
    Ok(events)
}

/// Split a round-segmented event list into decision blocks of
/// `rounds_per_decision` consecutive rounds.
pub fn decision_blocks(
    events: &[StimulusEvent],
    rounds_per_decision: usize,
) -> Result<Vec<&[StimulusEvent]>> {
    if rounds_per_decision == 0 {
        return Err(Error::config("rounds_per_decision must be at least 1"));
    }
    let per_block = rounds_per_decision * NUM_BULBS;
    if events.len() % per_block != 0 {
        let rounds = events.len() / NUM_BULBS;
        return Err(Error::Protocol {
            round: rounds - rounds % rounds_per_decision,
            message: format!(
                "{rounds} rounds do not divide into blocks of {rounds_per_decision}"
            ),
        });
    }
    Ok(events.chunks(per_block).collect())
}
