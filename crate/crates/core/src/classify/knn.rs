use serde::{Deserialize, Serialize};

use super::{Classifier, LabeledSet, Prediction, Trainer};
use crate::error::{Error, Result};
use crate::preprocess::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 3 }
    }
}

impl Trainer for KnnConfig {
    type Model = KnnModel;

    fn fit(&self, data: &LabeledSet) -> Result<KnnModel> {
        KnnModel::new(data.clone(), self.k)
    }
}

/// Brute-force Euclidean k-nearest-neighbors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub train: LabeledSet,
    pub k: usize,
}

impl KnnModel {
    pub fn new(train: LabeledSet, k: usize) -> Result<Self> {
        if k == 0 || k % 2 == 0 {
            return Err(Error::config(format!("k must be a positive odd number, got {k}")));
        }
        if k > train.len() {
            return Err(Error::config(format!(
                "k = {k} exceeds the {} training examples",
                train.len()
            )));
        }
        Ok(Self { train, k })
    }

    /// Indices of the `k` nearest training points, nearest first; equal
    /// distances go to the lower index.
    pub fn neighbors(&self, v: &[f64]) -> Result<Vec<usize>> {
        if v.len() != self.train.dim() {
            return Err(Error::size(format!(
                "k-NN expects {} features, got {}",
                self.train.dim(),
                v.len()
            )));
        }
        let mut dist: Vec<(f64, usize)> = self
            .train
            .vectors()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let d2: f64 = x.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
                (d2, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(dist[..self.k].iter().map(|&(_, i)| i).collect())
    }

    /// Number of the `k` nearest neighbors labeled target.
    pub fn target_votes(&self, v: &[f64]) -> Result<usize> {
        let nn = self.neighbors(v)?;
        Ok(nn
            .iter()
            .filter(|&&i| self.train.labels()[i] == Label::Target)
            .count())
    }

    pub fn target_fraction(&self, v: &[f64]) -> Result<f64> {
        Ok(self.target_votes(v)? as f64 / self.k as f64)
    }
}

impl Classifier for KnnModel {
    fn predict(&self, v: &[f64]) -> Result<Prediction> {
        knn_predict(self, v)
    }

    fn target_score(&self, v: &[f64]) -> Result<f64> {
        Ok(self.target_fraction(v)? - 0.5)
    }
}

pub fn knn_predict(model: &KnnModel, v: &[f64]) -> Result<Prediction> {
    let votes = model.target_votes(v)?;
    let k = model.k;
    let (label, count) = if 2 * votes > k {
        (Label::Target, votes)
    } else {
        (Label::Nontarget, k - votes)
    };
    Ok(Prediction {
        label,
        score: count as f64 / k as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> LabeledSet {
        LabeledSet::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0]],
            vec![Label::Target, Label::Target, Label::Nontarget, Label::Nontarget],
        )
        .unwrap()
    }

    #[test]
    fn exact_match_with_k1() {
        let m = KnnModel::new(set(), 1).unwrap();
        let p = knn_predict(&m, &[2.0]).unwrap();
        assert_eq!(p.label, Label::Nontarget);
        assert_eq!(p.score, 1.0);
    }

    #[test]
    fn two_of_three_vote() {
        let m = KnnModel::new(set(), 3).unwrap();
        let p = knn_predict(&m, &[0.9]).unwrap();
        assert_eq!(p.label, Label::Target);
        assert!((p.score - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.target_score(&[0.9]).unwrap() - (2.0 / 3.0 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let m = KnnModel::new(set(), 1).unwrap();
        // equidistant from indices 0 and 1
        assert_eq!(m.neighbors(&[0.5]).unwrap(), vec![0]);
    }

    #[test]
    fn k_range_checked() {
        let small = LabeledSet::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![Label::Target, Label::Nontarget, Label::Target],
        )
        .unwrap();
        assert!(matches!(KnnModel::new(small.clone(), 5), Err(Error::Config(_))));
        assert!(KnnModel::new(small.clone(), 2).is_err());
        assert!(KnnModel::new(small, 0).is_err());
    }
}
