use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentError, SubjectRecord};
use crate::data::io_error;
use crate::ensemble::{average_regression, hard_vote, learnt_vote, probability_row, soft_vote};
use crate::features::encode_interventions;
use crate::models::{
    load_checkpoint, save_checkpoint, ClassProbabilities, Label, LrVoter, MmseScore,
    ModelCheckpoint, ModelInput, ModelKind, Preprocess,
};

/// Turns raw subject data into the input of the model that owns `preprocess`.
pub fn model_input(
    preprocess: &Preprocess,
    subject: &SubjectRecord,
) -> Result<ModelInput, ExperimentError> {
    Ok(match preprocess {
        Preprocess::Disfluency(minmax) => {
            ModelInput::Vector(minmax.apply(&subject.disfluency_raw)?)
        }
        Preprocess::Acoustic { zscore, pca } => {
            ModelInput::Vector(pca.apply(&zscore.apply(&subject.acoustic_raw)?)?)
        }
        Preprocess::Interventions { seq_len } => {
            ModelInput::Sequence(encode_interventions(&subject.turns, *seq_len))
        }
        Preprocess::None => return Err(ExperimentError::MissingPreprocess),
    })
}

/// Everything the three views say about one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectPrediction {
    pub subject: usize,
    pub members: [ClassProbabilities; 3],
    pub hard: Label,
    pub soft: ClassProbabilities,
    pub learnt: Option<ClassProbabilities>,
    pub learnt_label: Option<Label>,
    pub mmse: Option<[f64; 3]>,
    pub mmse_average: Option<f64>,
}

/// Three classifiers in [`ModelKind::ALL`] order, their regressors and the
/// optional learnt voter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub classifiers: Vec<ModelCheckpoint>,
    pub regressors: Option<Vec<ModelCheckpoint>>,
    pub voter: Option<LrVoter>,
}

const VOTER_FILE: &str = "voter.json";

fn classifier_file(kind: ModelKind) -> String {
    format!("{}.ckpt", kind.name())
}

fn regressor_file(kind: ModelKind) -> String {
    format!("{}_mmse.ckpt", kind.name())
}

impl ModelSet {
    pub fn probabilities(
        &self,
        subject: &SubjectRecord,
    ) -> Result<[ClassProbabilities; 3], ExperimentError> {
        let mut out = [ClassProbabilities::from_ad(0.5)?; 3];
        for (slot, ckpt) in out.iter_mut().zip(&self.classifiers) {
            *slot = ckpt.predict_proba(&model_input(&ckpt.preprocess, subject)?)?;
        }
        Ok(out)
    }

    pub fn predict(
        &self,
        index: usize,
        subject: &SubjectRecord,
    ) -> Result<SubjectPrediction, ExperimentError> {
        let members = self.probabilities(subject)?;
        let hard = hard_vote(&members)?;
        let (soft, _) = soft_vote(&members)?;
        let (learnt, learnt_label) = match &self.voter {
            Some(v) => (
                Some(v.predict(&probability_row(&members))?),
                Some(learnt_vote(v, &members)?),
            ),
            None => (None, None),
        };
        let (mmse, mmse_average) = match &self.regressors {
            Some(regs) => {
                let mut scores = [MmseScore::clamped(0.0); 3];
                for (slot, ckpt) in scores.iter_mut().zip(regs) {
                    *slot = ckpt.predict_mmse(&model_input(&ckpt.preprocess, subject)?)?;
                }
                let avg = average_regression(&scores)?;
                (Some(scores.map(MmseScore::value)), Some(avg.value()))
            }
            None => (None, None),
        };
        Ok(SubjectPrediction {
            subject: index,
            members,
            hard,
            soft,
            learnt,
            learnt_label,
            mmse,
            mmse_average,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<(), ExperimentError> {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
        for (kind, ckpt) in ModelKind::ALL.iter().zip(&self.classifiers) {
            save_checkpoint(ckpt, &dir.join(classifier_file(*kind)))?;
        }
        if let Some(regs) = &self.regressors {
            for (kind, ckpt) in ModelKind::ALL.iter().zip(regs) {
                save_checkpoint(ckpt, &dir.join(regressor_file(*kind)))?;
            }
        }
        if let Some(voter) = &self.voter {
            let path = dir.join(VOTER_FILE);
            let json = serde_json::to_string_pretty(voter).expect("voter serializes");
            fs::write(&path, json).map_err(io_error(&path))?;
        }
        Ok(())
    }

    /// Loads a set written by [`ModelSet::save`]. Regressors and the voter are
    /// optional; all three classifiers are required.
    pub fn load(dir: &Path) -> Result<Self, ExperimentError> {
        let mut classifiers = Vec::with_capacity(3);
        for kind in ModelKind::ALL {
            let path = dir.join(classifier_file(kind));
            if !path.is_file() {
                return Err(crate::data::DataError::FileNotFound(path).into());
            }
            classifiers.push(load_checkpoint(&path)?);
        }
        let reg_paths: Vec<_> = ModelKind::ALL
            .iter()
            .map(|k| dir.join(regressor_file(*k)))
            .collect();
        let regressors = if reg_paths.iter().all(|p| p.is_file()) {
            Some(
                reg_paths
                    .iter()
                    .map(|p| load_checkpoint(p))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        } else {
            None
        };
        let voter_path = dir.join(VOTER_FILE);
        let voter =
            if voter_path.is_file() {
                let text = fs::read_to_string(&voter_path).map_err(io_error(&voter_path))?;
                Some(serde_json::from_str(&text).map_err(|e| {
                    ExperimentError::Corrupt(format!("{}: {e}", voter_path.display()))
                })?)
            } else {
                None
            };
        Ok(Self {
            classifiers,
            regressors,
            voter,
        })
    }
}
