use serde::{Deserialize, Serialize};

use super::epochs::AveragedEpoch;
use crate::error::{Error, Result};

/// One flag per channel; `true` keeps the channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelMask(pub Vec<bool>);

impl ChannelMask {
    pub fn all(n_channels: usize) -> Self {
        Self(vec![true; n_channels])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&k| k).count()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i)
    }

    /// Keep only the selected channel rows of an averaged epoch.
    pub fn apply(&self, avg: &AveragedEpoch) -> AveragedEpoch {
        AveragedEpoch {
            samples: self.selected().map(|c| avg.samples[c].clone()).collect(),
            ..avg.clone()
        }
    }
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Per-channel score: Pearson correlation with every other channel, averaged
/// over channel pairs and over the given target averages.
pub fn channel_scores(target_avgs: &[AveragedEpoch]) -> Vec<f64> {
    let n_ch = target_avgs[0].n_channels();
    let mut scores = vec![0.0; n_ch];
    if n_ch < 2 {
        return scores;
    }
    for avg in target_avgs {
        for c in 0..n_ch {
            for d in (c + 1)..n_ch {
                let r = pearson(&avg.samples[c], &avg.samples[d]);
                scores[c] += r;
                scores[d] += r;
            }
        }
    }
    let norm = ((n_ch - 1) * target_avgs.len()) as f64;
    scores.iter_mut().for_each(|s| *s /= norm);
    scores
}

/// Keep the `keep_k` channels whose target waveforms correlate best with the
/// rest of the montage. Ties go to the lower channel index.
pub fn select_channels(target_avgs: &[AveragedEpoch], keep_k: usize) -> Result<ChannelMask> {
    if target_avgs.len() < 2 {
        return Err(Error::Training(format!(
            "channel selection needs at least 2 target averages, got {}",
            target_avgs.len()
        )));
    }
    let n_ch = target_avgs[0].n_channels();
    if keep_k == 0 || keep_k > n_ch {
        return Err(Error::config(format!(
            "keep_k = {keep_k} outside 1..={n_ch}"
        )));
    }
    if target_avgs.iter().any(|a| a.n_channels() != n_ch) {
        return Err(Error::size("target averages differ in channel count"));
    }
    let scores = channel_scores(target_avgs);
    let mut order: Vec<usize> = (0..n_ch).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut mask = vec![false; n_ch];
    for &c in &order[..keep_k] {
        mask[c] = true;
    }
    Ok(ChannelMask(mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::Label;

    fn avg(samples: Vec<Vec<f64>>) -> AveragedEpoch {
        AveragedEpoch {
            samples,
            bulb: 1,
            n_averaged: 5,
            label: Label::Target,
        }
    }

    #[test]
    fn keep_all_is_noop_and_range_checked() {
        let a = avg(vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 5.0], vec![3.0, 1.0, 1.0]]);
        let set = vec![a.clone(), a];
        assert_eq!(select_channels(&set, 3).unwrap(), ChannelMask::all(3));
        assert!(matches!(select_channels(&set, 0), Err(Error::Config(_))));
        assert!(matches!(select_channels(&set, 4), Err(Error::Config(_))));
        assert!(select_channels(&set[..1], 1).is_err());
    }

    #[test]
    fn identical_channels_tie_break_low_index() {
        let wave: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let a = avg(vec![wave; 8]);
        let mask = select_channels(&[a.clone(), a], 4).unwrap();
        assert_eq!(mask.selected().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }
}
