//! Detrending, band-pass filtering, epoching, artifact rejection, averaging
//! and channel selection.

mod channels;
mod epochs;
mod filter;

pub use self::channels::{channel_scores, select_channels, ChannelMask};
pub use self::epochs::{
    average_epochs, epoch_len, extract_epochs, reject_artifacts, AveragedEpoch, Epoch, Label,
};
pub use self::filter::{bandpass, detrend, BandpassFilter, Biquad, FilterDesign, FilterSpec};

use crate::eeg_io::RawRecording;
use crate::error::Result;

/// Default epoch window after stimulus onset.
pub const EPOCH_WINDOW_MS: f64 = 600.0;
/// Default artifact rejection threshold.
pub const DEFAULT_ARTIFACT_UV: f64 = 100.0;

/// Detrend and band-pass every channel of a recording.
pub fn condition_recording(rec: &RawRecording, spec: &FilterSpec) -> Result<RawRecording> {
    let filter = BandpassFilter::design(rec.sample_rate(), spec)?;
    rec.try_map_channels(|ch| Ok(filter.filtfilt(&detrend(ch)?)))
}
