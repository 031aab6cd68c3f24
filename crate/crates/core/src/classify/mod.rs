//! Binary target / non-target classifiers (SVM, k-NN) and stratified
//! cross-validation.

mod cv;
mod knn;
mod svm;

pub use self::cv::{cross_validate, grid_search_svm, CvMetrics, GridPoint};
pub use self::knn::{knn_predict, KnnConfig, KnnModel};
pub use self::svm::{default_gamma, svm_predict, svm_train, Kernel, KernelKind, SvmConfig, SvmModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::Label;

/// Feature vectors with target / non-target labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    vectors: Vec<Vec<f64>>,
    labels: Vec<Label>,
}

impl LabeledSet {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::size("vector and label counts differ"));
        }
        if vectors.is_empty() {
            return Err(Error::size("labeled set is empty"));
        }
        let d = vectors[0].len();
        if vectors.iter().any(|v| v.len() != d) {
            return Err(Error::size("feature vectors differ in length"));
        }
        if labels.contains(&Label::Unknown) {
            return Err(Error::Training("labeled set contains unknown labels".into()));
        }
        Ok(Self { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.count(Label::Target) == 0 || self.count(Label::Nontarget) == 0 {
            return Err(Error::Training(
                "training data must contain both target and non-target examples".into(),
            ));
        }
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    /// Apply `f` to every vector.
    pub fn map_vectors(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(
            self.vectors.iter().map(|v| f(v)).collect(),
            self.labels.clone(),
        )
    }
}

pub(crate) fn sign_of(label: Label) -> f64 {
    if label == Label::Target {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// SVM: decision value. k-NN: fraction of neighbors voting for `label`.
    pub score: f64,
}

pub trait Classifier {
    fn predict(&self, v: &[f64]) -> Result<Prediction>;

    /// Signed confidence that `v` is a target; larger means more target-like.
    fn target_score(&self, v: &[f64]) -> Result<f64>;

    fn predict_batch(&self, vs: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        vs.iter().map(|v| self.predict(v)).collect()
    }
}

pub trait Trainer {
    type Model: Classifier;

    fn fit(&self, data: &LabeledSet) -> Result<Self::Model>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Svm(SvmConfig),
    Knn(KnnConfig),
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Svm(_) => "svm",
            ClassifierConfig::Knn(_) => "knn",
        }
    }
}

impl Trainer for ClassifierConfig {
    type Model = TrainedClassifier;

    fn fit(&self, data: &LabeledSet) -> Result<TrainedClassifier> {
        match self {
            ClassifierConfig::Svm(cfg) => cfg.fit(data).map(TrainedClassifier::Svm),
            ClassifierConfig::Knn(cfg) => cfg.fit(data).map(TrainedClassifier::Knn),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedClassifier {
    Svm(SvmModel),
    Knn(KnnModel),
}

impl TrainedClassifier {
    pub fn name(&self) -> &'static str {
        match self {
            TrainedClassifier::Svm(_) => "svm",
            TrainedClassifier::Knn(_) => "knn",
        }
    }
}

impl Classifier for TrainedClassifier {
    fn predict(&self, v: &[f64]) -> Result<Prediction> {
        match self {
            TrainedClassifier::Svm(m) => m.predict(v),
            TrainedClassifier::Knn(m) => m.predict(v),
        }
    }

    fn target_score(&self, v: &[f64]) -> Result<f64> {
        match self {
            TrainedClassifier::Svm(m) => m.target_score(v),
            TrainedClassifier::Knn(m) => m.target_score(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_set_validation() {
        assert!(LabeledSet::new(vec![vec![1.0]], vec![]).is_err());
        assert!(LabeledSet::new(vec![vec![1.0], vec![1.0, 2.0]], vec![Label::Target; 2]).is_err());
        assert!(LabeledSet::new(vec![vec![1.0]], vec![Label::Unknown]).is_err());
        let s = LabeledSet::new(vec![vec![1.0], vec![2.0]], vec![Label::Target; 2]).unwrap();
        assert!(s.require_both_classes().is_err());
    }

    #[test]
    fn config_serializes_with_kind_tag() {
        let cfg = ClassifierConfig::Knn(KnnConfig { k: 3 });
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(json, r#"{"kind":"knn","k":3}"#);
        let back: ClassifierConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
