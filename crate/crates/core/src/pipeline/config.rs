use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arm::{ControllerGains, RobotParams, SimConfig};
use crate::classify::{ClassifierConfig, KnnConfig, SvmConfig};
use crate::decoder::DecisionConfig;
use crate::eeg_io::{SyntheticSubjectConfig, DEFAULT_SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::features::{EmdConfig, Retain};
use crate::preprocess::{FilterSpec, DEFAULT_ARTIFACT_UV, EPOCH_WINDOW_MS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    pub filter: FilterSpec,
    pub epoch_window_ms: f64,
    /// Epochs with any |sample| above this (µV) are dropped.
    pub artifact_threshold: f64,
    /// Channels kept by correlation-based selection.
    pub keep_k: usize,
    pub rounds_per_decision: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            filter: FilterSpec::default(),
            epoch_window_ms: EPOCH_WINDOW_MS,
            artifact_threshold: DEFAULT_ARTIFACT_UV,
            keep_k: 6,
            rounds_per_decision: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub emd: EmdConfig,
    pub pca: Retain,
    /// Z-score features before PCA.
    pub standardize: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            emd: EmdConfig::default(),
            pca: Retain::default(),
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 5, seed: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmStart {
    /// Initial end-effector position `(x, z)`, m.
    pub position: [f64; 2],
    /// Elbow branch of the initial configuration.
    pub elbow_positive: bool,
}

impl Default for ArmStart {
    fn default() -> Self {
        Self {
            position: [0.4, 0.3],
            elbow_positive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub sample_rate: f64,
    pub synth: SyntheticSubjectConfig,
    pub preprocess: PreprocessConfig,
    pub features: FeatureConfig,
    /// Classifier used for decoding.
    pub classifier: ClassifierConfig,
    /// Further classifiers trained and cross-validated for the report only.
    pub also_evaluate: Vec<ClassifierConfig>,
    pub cv: CvConfig,
    pub decoder: DecisionConfig,
    pub robot: RobotParams,
    pub gains: ControllerGains,
    pub sim: SimConfig,
    pub arm: ArmStart,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            synth: SyntheticSubjectConfig::default(),
            preprocess: PreprocessConfig::default(),
            features: FeatureConfig::default(),
            classifier: ClassifierConfig::Svm(SvmConfig::default()),
            also_evaluate: vec![ClassifierConfig::Knn(KnnConfig::default())],
            cv: CvConfig::default(),
            decoder: DecisionConfig::default(),
            robot: RobotParams::default(),
            gains: ControllerGains::default(),
            sim: SimConfig::default(),
            arm: ArmStart::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.preprocess.filter.validate(self.sample_rate)?;
        let p = &self.preprocess;
        if !(p.epoch_window_ms > 0.0) {
            return Err(Error::config("epoch_window_ms must be positive"));
        }
        if !(p.artifact_threshold > 0.0) {
            return Err(Error::config("artifact_threshold must be positive"));
        }
        if p.keep_k == 0 || p.keep_k > self.synth.n_channels {
            return Err(Error::config(format!(
                "keep_k {} must lie in 1..={}",
                p.keep_k, self.synth.n_channels
            )));
        }
        if p.rounds_per_decision == 0 {
            return Err(Error::config("rounds_per_decision must be at least 1"));
        }
        if p.rounds_per_decision != self.synth.rounds_per_decision {
            return Err(Error::config(format!(
                "preprocess.rounds_per_decision ({}) differs from synth.rounds_per_decision ({})",
                p.rounds_per_decision, self.synth.rounds_per_decision
            )));
        }
        match self.features.pca {
            Retain::Components(0) => return Err(Error::config("PCA must keep at least one component")),
            Retain::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::config(format!("PCA fraction {f} outside (0, 1]")))
            }
            _ => {}
        }
        if self.features.emd.max_imfs == 0 {
            return Err(Error::config("emd.max_imfs must be at least 1"));
        }
        if self.cv.folds < 2 {
            return Err(Error::config("cv.folds must be at least 2"));
        }
        for c in std::iter::once(&self.classifier).chain(&self.also_evaluate) {
            if let ClassifierConfig::Knn(k) = c {
                if k.k == 0 || k.k % 2 == 0 {
                    return Err(Error::config(format!("k-NN k must be odd, got {}", k.k)));
                }
            }
        }
        self.decoder.validate()?;
        self.robot.validate()?;
        self.gains.validate()?;
        self.sim.validate()?;
        Ok(())
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults, overlaid with the JSON file at `path` (if any), then with
    /// `key.path=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut value = serde_json::to_value(Self::default())?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
            let file: Value = serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("config {} is not valid JSON: {e}", path.display())))?;
            merge(&mut value, file);
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }
}

fn tag_of(m: &serde_json::Map<String, Value>) -> Option<&Value> {
    m.get("kind").or_else(|| m.get("type"))
}

/// Recursive object merge. A patch that selects a different enum variant
/// (a changed `kind`/`type` tag, or a different single key) replaces the
/// base wholesale.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let retag = matches!((tag_of(b), tag_of(&p)), (Some(x), Some(y)) if x != y);
            let other_variant =
                b.len() == 1 && p.len() == 1 && b.keys().next() != p.keys().next();
            if retag || other_variant {
                *b = p;
                return;
            }
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Apply `a.b.c=value`. The value is parsed as JSON, falling back to a
/// plain string. Setting a `kind`/`type` tag to a new value resets the
/// enclosing object to that variant's defaults.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::config(format!("override `{assignment}` has an empty key")));
    }
    let value: Value =
        serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));

    let (last, parents) = keys.split_last().expect("non-empty");
    let mut node = root;
    for k in parents {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::config(format!("override `{path}`: `{k}` is not inside an object")))?;
        node = obj.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::config(format!("override `{path}` does not address an object field")))?;
    if (*last == "kind" || *last == "type") && obj.get(*last) != Some(&value) {
        obj.clear();
    }
    match obj.get_mut(*last) {
        Some(slot) => merge(slot, value),
        None => {
            obj.insert(last.to_string(), value);
        }
    }
    Ok(())
}
