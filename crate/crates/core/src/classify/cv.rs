use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{default_gamma, Classifier, KernelKind, LabeledSet, SvmConfig, Trainer};
use crate::error::{Error, Result};
use crate::preprocess::Label;

/// Confusion counts with `target` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_target: usize,
    pub false_nontarget: usize,
    pub false_target: usize,
    pub true_nontarget: usize,
}

impl Confusion {
    fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Target, Label::Target) => self.true_target += 1,
            (Label::Target, _) => self.false_nontarget += 1,
            (_, Label::Target) => self.false_target += 1,
            _ => self.true_nontarget += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_target + self.false_nontarget + self.false_target + self.true_nontarget
    }

    /// `[[TT, FN], [FT, TN]]`, rows = truth (target, non-target).
    pub fn matrix(&self) -> [[usize; 2]; 2] {
        [
            [self.true_target, self.false_nontarget],
            [self.false_target, self.true_nontarget],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvMetrics {
    pub accuracy: f64,
    pub recall_target: f64,
    pub recall_nontarget: f64,
    pub confusion: [[usize; 2]; 2],
    pub fold_accuracies: Vec<f64>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Stratified k-fold cross-validation with a seeded shuffle. Folds are
/// evaluated in order and predictions pooled.
pub fn cross_validate<T: Trainer>(
    data: &LabeledSet,
    trainer: &T,
    folds: usize,
    seed: u64,
) -> Result<CvMetrics> {
    if folds < 2 {
        return Err(Error::config(format!("need at least 2 folds, got {folds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; data.len()];
    for label in [Label::Target, Label::Nontarget] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels()[i] == label)
            .collect();
        if idx.len() < folds {
            return Err(Error::config(format!(
                "{} {label:?} examples cannot be stratified into {folds} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }

    let mut total = Confusion::default();
    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..data.len()).partition(|&i| assignment[i] == fold);
        let model = trainer.fit(&data.subset(&train)?)?;
        let mut conf = Confusion::default();
        for &i in &test {
            let p = model.predict(&data.vectors()[i])?;
            conf.record(data.labels()[i], p.label);
        }
        fold_accuracies.push(ratio(conf.true_target + conf.true_nontarget, conf.total()));
        total.true_target += conf.true_target;
        total.false_nontarget += conf.false_nontarget;
        total.false_target += conf.false_target;
        total.true_nontarget += conf.true_nontarget;
    }
    Ok(CvMetrics {
        accuracy: ratio(total.true_target + total.true_nontarget, total.total()),
        recall_target: ratio(total.true_target, total.true_target + total.false_nontarget),
        recall_nontarget: ratio(total.true_nontarget, total.true_nontarget + total.false_target),
        confusion: total.matrix(),
        fold_accuracies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c: f64,
    pub gamma: f64,
    pub accuracy: f64,
}

/// Search `C in {0.1, 1, 10}` and `gamma in {g/10, g, 10g}` around the
/// base gamma by cross-validated accuracy. Returns the winning
/// configuration (first best in grid order) and every grid point.
pub fn grid_search_svm(
    data: &LabeledSet,
    base: &SvmConfig,
    folds: usize,
    seed: u64,
) -> Result<(SvmConfig, Vec<GridPoint>)> {
    let g0 = base.gamma.unwrap_or_else(|| default_gamma(data));
    let mut points = Vec::new();
    let mut best: Option<(f64, SvmConfig)> = None;
    for c in [0.1, 1.0, 10.0] {
        for gamma in [g0 / 10.0, g0, g0 * 10.0] {
            let cfg = SvmConfig {
                kernel: KernelKind::Gaussian,
                gamma: Some(gamma),
                c,
                tol: base.tol,
            };
            let m = cross_validate(data, &cfg, folds, seed)?;
            points.push(GridPoint {
                c,
                gamma,
                accuracy: m.accuracy,
            });
            if best.as_ref().is_none_or(|(acc, _)| m.accuracy > *acc) {
                best = Some((m.accuracy, cfg));
            }
        }
    }
    Ok((best.map(|(_, c)| c).unwrap_or_else(|| base.clone()), points))
}
