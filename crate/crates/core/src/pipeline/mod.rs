//! End-to-end training, decoding and closed-loop arm runs.

mod config;
mod io;

pub use self::config::{
    apply_override, merge, ArmStart, CvConfig, FeatureConfig, PipelineConfig, PreprocessConfig,
};
pub use self::io::{
    load_models, read_decision_log, read_json, save_models, write_decision_log, write_json,
};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::arm::{inverse_kinematics, ArmSimulator, RobotState, Trajectory};
use crate::classify::{
    cross_validate, Classifier, ClassifierConfig, CvMetrics, LabeledSet, TrainedClassifier, Trainer,
};
use crate::decoder::{
    decide_direction, reference_from_direction, DecisionRecord, Direction, Workspace,
};
use crate::eeg_io::{decision_blocks, segment_rounds, RawRecording, NUM_BULBS};
use crate::error::{Error, Result};
use crate::features::{assemble_features, pca_fit, EmdConfig, PcaModel, Standardizer};
use crate::preprocess::{
    average_epochs, condition_recording, epoch_len, extract_epochs, reject_artifacts,
    select_channels, AveragedEpoch, ChannelMask, Label,
};

/// Everything between an averaged epoch and the classifier input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontend {
    pub sample_rate: f64,
    pub epoch_samples: usize,
    pub mask: ChannelMask,
    pub standardizer: Option<Standardizer>,
    pub emd: EmdConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub frontend: Frontend,
    pub pca: PcaModel,
    pub classifier: TrainedClassifier,
}

impl Models {
    pub fn check_compatible(&self, rec: &RawRecording, cfg: &PipelineConfig) -> Result<()> {
        let f = &self.frontend;
        if (f.sample_rate - rec.sample_rate()).abs() > 1e-6 * f.sample_rate {
            return Err(Error::config(format!(
                "models were trained at {} Hz, recording is {} Hz",
                f.sample_rate,
                rec.sample_rate()
            )));
        }
        if f.mask.len() != rec.n_channels() {
            return Err(Error::config(format!(
                "models expect {} channels, recording has {}",
                f.mask.len(),
                rec.n_channels()
            )));
        }
        let n = epoch_len(rec.sample_rate(), cfg.preprocess.epoch_window_ms);
        if n != f.epoch_samples {
            return Err(Error::config(format!(
                "models expect {}-sample epochs, config gives {n}",
                f.epoch_samples
            )));
        }
        Ok(())
    }

    /// Feature extraction, optional z-scoring and PCA projection.
    pub fn reduce(&self, avg: &AveragedEpoch) -> Result<Vec<f64>> {
        let f = &self.frontend;
        let fv = assemble_features(avg, &f.mask, f.sample_rate, &f.emd)?;
        let v = match &f.standardizer {
            Some(s) => s.transform(&fv.values)?,
            None => fv.values,
        };
        self.pca.project(&v)
    }

    pub fn score(&self, avg: &AveragedEpoch) -> Result<f64> {
        self.classifier.target_score(&self.reduce(avg)?)
    }
}

/// Per-bulb averages of one decision block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockData {
    pub index: usize,
    pub averages: Vec<AveragedEpoch>,
    pub rejected: usize,
}

/// Condition, segment, epoch, reject and average. Blocks whose averaging
/// fails come back as `Err` so callers can skip them.
pub fn prepare_blocks(
    cfg: &PipelineConfig,
    rec: &RawRecording,
    intended: Option<&[u8]>,
) -> Result<Vec<Result<BlockData>>> {
    let p = &cfg.preprocess;
    let cond = condition_recording(rec, &p.filter).map_err(|e| e.at_stage("preprocess", None))?;
    let events = segment_rounds(&cond).map_err(|e| e.at_stage("segment", None))?;
    let blocks =
        decision_blocks(&events, p.rounds_per_decision).map_err(|e| e.at_stage("segment", None))?;
    if let Some(truth) = intended {
        if truth.len() != blocks.len() {
            return Err(Error::Integrity(format!(
                "ground truth lists {} decisions, recording has {} decision blocks",
                truth.len(),
                blocks.len()
            )));
        }
    }
    blocks
        .iter()
        .enumerate()
        .map(|(b, events)| {
            let mut epochs = extract_epochs(&cond, events, p.epoch_window_ms)
                .map_err(|e| e.at_stage("epoch", Some(b)))?;
            if let Some(truth) = intended {
                for e in &mut epochs {
                    e.label = Label::from_intent(e.bulb, truth[b]);
                }
            }
            let (kept, rejected) = reject_artifacts(&epochs, p.artifact_threshold);
            Ok(average_epochs(&kept, b).map(|averages| BlockData {
                index: b,
                averages,
                rejected: rejected.len(),
            }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub name: String,
    pub config: ClassifierConfig,
    pub cv: CvMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_blocks: usize,
    /// Blocks dropped because a bulb lost every epoch to artifact rejection.
    pub skipped_blocks: Vec<usize>,
    pub rejected_epochs: usize,
    pub n_examples: usize,
    pub n_target: usize,
    pub selected_channels: Vec<usize>,
    pub feature_dim: usize,
    pub pca_components: usize,
    pub cv_folds: usize,
    pub classifiers: Vec<ClassifierReport>,
}

/// Fit the frontend, PCA and classifiers on a labeled recording.
pub fn train(cfg: &PipelineConfig, rec: &RawRecording, intended: &[u8]) -> Result<(Models, TrainReport)> {
    let blocks = prepare_blocks(cfg, rec, Some(intended))?;
    let n_blocks = blocks.len();
    let mut skipped = Vec::new();
    let mut usable = Vec::new();
    for (b, block) in blocks.into_iter().enumerate() {
        match block {
            Ok(data) => usable.push(data),
            Err(Error::InsufficientData { .. }) => skipped.push(b),
            Err(e) => return Err(e.at_stage("average", Some(b))),
        }
    }
    if usable.is_empty() {
        return Err(Error::Training("no decision block survived artifact rejection".into())
            .at_stage("train", None));
    }
    let rejected_epochs = usable.iter().map(|d| d.rejected).sum();

    let targets: Vec<AveragedEpoch> = usable
        .iter()
        .flat_map(|d| d.averages.iter().filter(|a| a.label == Label::Target).cloned())
        .collect();
    let mask = select_channels(&targets, cfg.preprocess.keep_k)
        .map_err(|e| e.at_stage("channels", None))?;

    let fs = rec.sample_rate();
    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for d in &usable {
        for avg in &d.averages {
            let fv = assemble_features(avg, &mask, fs, &cfg.features.emd)
                .map_err(|e| e.at_stage("features", Some(d.index)))?;
            raw.push(fv.values);
            labels.push(avg.label);
        }
    }
    let feature_dim = raw[0].len();
    let standardizer = if cfg.features.standardize {
        let s = Standardizer::fit(&raw).map_err(|e| e.at_stage("features", None))?;
        raw = raw
            .iter()
            .map(|v| s.transform(v))
            .collect::<Result<_>>()
            .map_err(|e| e.at_stage("features", None))?;
        Some(s)
    } else {
        None
    };
    let pca = pca_fit(&raw, cfg.features.pca).map_err(|e| e.at_stage("pca", None))?;
    let reduced = raw
        .iter()
        .map(|v| pca.project(v))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("pca", None))?;
    let data = LabeledSet::new(reduced, labels).map_err(|e| e.at_stage("classify", None))?;
    data.require_both_classes().map_err(|e| e.at_stage("classify", None))?;

    let mut reports = Vec::new();
    for c in std::iter::once(&cfg.classifier).chain(&cfg.also_evaluate) {
        let cv = cross_validate(&data, c, cfg.cv.folds, cfg.cv.seed)
            .map_err(|e| e.at_stage("cross-validation", None))?;
        reports.push(ClassifierReport {
            name: c.name().to_string(),
            config: c.clone(),
            cv,
        });
    }
    let classifier = cfg.classifier.fit(&data).map_err(|e| e.at_stage("classify", None))?;

    let report = TrainReport {
        n_blocks,
        skipped_blocks: skipped,
        rejected_epochs,
        n_examples: data.len(),
        n_target: data.count(Label::Target),
        selected_channels: mask.selected().collect(),
        feature_dim,
        pca_components: pca.n_components(),
        cv_folds: cfg.cv.folds,
        classifiers: reports,
    };
    let models = Models {
        frontend: Frontend {
            sample_rate: fs,
            epoch_samples: epoch_len(fs, cfg.preprocess.epoch_window_ms),
            mask,
            standardizer,
            emd: cfg.features.emd,
        },
        pca,
        classifier,
    };
    Ok((models, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecision {
    pub block: usize,
    /// `None` when the block could not be scored.
    pub scores: Option<[f64; NUM_BULBS]>,
    pub direction: Option<Direction>,
    pub intended: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_blocks: usize,
    pub n_decided: usize,
    /// Present when ground truth was supplied.
    pub n_correct: Option<usize>,
    pub accuracy: Option<f64>,
    pub blocks: Vec<BlockDecision>,
}

/// Score every bulb of every block and pick directions.
pub fn decode(
    cfg: &PipelineConfig,
    models: &Models,
    rec: &RawRecording,
    intended: Option<&[u8]>,
) -> Result<EvalReport> {
    models.check_compatible(rec, cfg)?;
    let blocks = prepare_blocks(cfg, rec, intended)?;
    let mut out = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.into_iter().enumerate() {
        let truth = intended.map(|t| t[b]);
        let data = match block {
            Ok(d) => d,
            Err(e @ Error::InsufficientData { .. }) => {
                out.push(BlockDecision {
                    block: b,
                    scores: None,
                    direction: None,
                    intended: truth,
                    note: Some(e.to_string()),
                });
                continue;
            }
            Err(e) => return Err(e.at_stage("average", Some(b))),
        };
        let mut scores = [0.0; NUM_BULBS];
        for (slot, avg) in scores.iter_mut().zip(&data.averages) {
            *slot = models.score(avg).map_err(|e| e.at_stage("score", Some(b)))?;
        }
        let direction = decide_direction(&scores, &cfg.decoder);
        out.push(BlockDecision {
            block: b,
            scores: Some(scores),
            direction,
            intended: truth,
            note: direction.is_none().then(|| "no decision: score margin too small".to_string()),
        });
    }
    let n_decided = out.iter().filter(|d| d.direction.is_some()).count();
    let n_correct = intended.map(|_| {
        out.iter()
            .filter(|d| match (d.direction, d.intended) {
                (Some(dir), Some(bulb)) => cfg.decoder.bulb_direction_map[bulb as usize - 1] == dir,
                _ => false,
            })
            .count()
    });
    Ok(EvalReport {
        n_blocks: out.len(),
        n_decided,
        accuracy: n_correct.map(|c| if out.is_empty() { 0.0 } else { c as f64 / out.len() as f64 }),
        n_correct,
        blocks: out,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<DecisionRecord>,
    pub trajectory: Trajectory,
    pub eval: EvalReport,
}

/// Decode a recording and drive the arm with every decision.
pub fn run_session(
    cfg: &PipelineConfig,
    models: &Models,
    rec: &RawRecording,
    intended: Option<&[u8]>,
) -> Result<RunOutput> {
    let eval = decode(cfg, models, rec, intended)?;
    let [x0, z0] = cfg.arm.position;
    let theta = inverse_kinematics(&cfg.robot, &Vector2::new(x0, z0), cfg.arm.elbow_positive)
        .map_err(|e| e.at_stage("arm", None))?;
    let mut sim = ArmSimulator::new(
        cfg.robot,
        cfg.gains,
        RobotState::at_rest(theta[0], theta[1]),
        cfg.sim,
    )?;
    let workspace = Workspace::from_params(&cfg.robot, cfg.decoder.safety_fraction);

    let mut records = Vec::with_capacity(eval.blocks.len());
    for d in &eval.blocks {
        let mut record = DecisionRecord {
            block: d.block,
            scores: d.scores,
            direction: d.direction,
            reference: None,
            t: sim.time(),
            note: d.note.clone(),
        };
        if let Some(dir) = d.direction {
            let g = sim.goal();
            match reference_from_direction((g[0], g[1]), dir, &cfg.decoder, &workspace) {
                Ok((x, z)) => {
                    sim.move_to(x, z).map_err(|e| e.at_stage("arm", Some(d.block)))?;
                    record.reference = Some((x, z));
                }
                Err(Error::Workspace { x, z }) => {
                    record.note = Some(format!(
                        "step {dir} to ({x:.3}, {z:.3}) leaves the workspace; holding"
                    ));
                }
                Err(e) => return Err(e.at_stage("decode", Some(d.block))),
            }
        }
        records.push(record);
    }
    Ok(RunOutput {
        records,
        trajectory: sim.into_trajectory(),
        eval,
    })
}
