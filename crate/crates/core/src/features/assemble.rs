use serde::{Deserialize, Serialize};

use super::emd::{emd_with, EmdConfig};
use super::hilbert::{hht_features, HHT_FEATURES};
use super::wavelet::{band_len, wavelet_bands};
use crate::error::{Error, Result};
use crate::preprocess::{AveragedEpoch, ChannelMask};

/// Effective rate of the decimated amplitude block.
pub const AMPLITUDE_RATE_HZ: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Amplitude,
    Hht,
    Delta,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureBlock {
    pub kind: BlockKind,
    pub channel: usize,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Vec<FeatureBlock>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, kind: BlockKind, channel: usize) -> Option<&[f64]> {
        self.layout
            .iter()
            .find(|b| b.kind == kind && b.channel == channel)
            .map(|b| &self.values[b.start..b.start + b.len])
    }
}

pub fn amplitude_len(n_samples: usize, fs: f64) -> usize {
    ((n_samples as f64 * AMPLITUDE_RATE_HZ / fs).round() as usize).clamp(1, n_samples.max(1))
}

/// Downsample by averaging contiguous bins to the amplitude block rate.
pub fn decimate_mean(x: &[f64], fs: f64) -> Vec<f64> {
    let n = x.len();
    let bins = amplitude_len(n, fs);
    (0..bins)
        .map(|i| {
            let (lo, hi) = (i * n / bins, (i + 1) * n / bins);
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Feature vector length for an epoch of `n_samples`, given the number of
/// selected channels.
pub fn feature_len(n_samples: usize, fs: f64, n_selected: usize) -> Result<usize> {
    let per_channel = amplitude_len(n_samples, fs) + HHT_FEATURES + 2 * band_len(n_samples, fs)?;
    Ok(per_channel * n_selected)
}

/// Per selected channel, in ascending channel order: decimated amplitude,
/// HHT summary of IMF1, delta and theta wavelet coefficients.
pub fn assemble_features(
    avg: &AveragedEpoch,
    mask: &ChannelMask,
    fs: f64,
    emd_cfg: &EmdConfig,
) -> Result<FeatureVector> {
    if mask.len() != avg.n_channels() {
        return Err(Error::size(format!(
            "mask covers {} channels, epoch has {}",
            mask.len(),
            avg.n_channels()
        )));
    }
    if mask.count() == 0 {
        return Err(Error::config("channel mask selects no channels"));
    }
    let mut values = Vec::new();
    let mut layout = Vec::new();
    let mut push = |kind, channel, block: Vec<f64>, values: &mut Vec<f64>| {
        layout.push(FeatureBlock {
            kind,
            channel,
            start: values.len(),
            len: block.len(),
        });
        values.extend(block);
    };
    for ch in mask.selected() {
        let x = &avg.samples[ch];
        push(BlockKind::Amplitude, ch, decimate_mean(x, fs), &mut values);
        let dec = emd_with(x, emd_cfg)?;
        let hht = match dec.imfs.first() {
            Some(imf1) => hht_features(imf1, fs)?,
            None => vec![0.0; HHT_FEATURES],
        };
        push(BlockKind::Hht, ch, hht, &mut values);
        let (delta, theta) = wavelet_bands(x, fs)?;
        push(BlockKind::Delta, ch, delta, &mut values);
        push(BlockKind::Theta, ch, theta, &mut values);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }
    Ok(FeatureVector { values, layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::Label;

    fn avg(n_ch: usize) -> AveragedEpoch {
        AveragedEpoch {
            samples: (0..n_ch)
                .map(|c| {
                    (0..300)
                        .map(|i| ((i as f64) * 0.07 * (c + 1) as f64).sin() * 3.0)
                        .collect()
                })
                .collect(),
            bulb: 1,
            n_averaged: 5,
            label: Label::Unknown,
        }
    }

    #[test]
    fn single_channel_layout() {
        let a = avg(1);
        let f = assemble_features(&a, &ChannelMask::all(1), 500.0, &EmdConfig::default()).unwrap();
        assert_eq!(f.block(BlockKind::Amplitude, 0).unwrap().len(), 12);
        assert_eq!(f.block(BlockKind::Hht, 0).unwrap().len(), 5);
        assert_eq!(f.block(BlockKind::Delta, 0).unwrap().len(), 5);
        assert_eq!(f.len(), feature_len(300, 500.0, 1).unwrap());
        let spans: usize = f.layout.iter().map(|b| b.len).sum();
        assert_eq!(spans, f.len());
    }

    #[test]
    fn empty_mask_rejected() {
        let a = avg(2);
        let err = assemble_features(
            &a,
            &ChannelMask(vec![false, false]),
            500.0,
            &EmdConfig::default(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn decimation_averages_bins() {
        let x: Vec<f64> = (0..300).map(|i| (i / 25) as f64).collect();
        let d = decimate_mean(&x, 500.0);
        assert_eq!(d, (0..12).map(|i| i as f64).collect::<Vec<_>>());
    }
}
