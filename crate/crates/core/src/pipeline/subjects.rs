use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chat::{parse_transcript_bytes, speaker_sequence, Role};
use crate::data::{
    io_error, load_compare_csv, read_wav_duration, DataError, DatasetManifest, ManifestRow,
};
use crate::features::{extract_disfluency_raw, COMPARE_DIM, PCA_COMPONENTS, SEQUENCE_LEN};

/// Where the pipeline touches data, for audit harnesses.
pub trait AccessObserver: Sync {
    fn on_read(&self, _path: &Path) {}
    /// `rows` are the subject indices whose data the fit consumes.
    fn on_fit(&self, _fold: usize, _stage: FitStage, _rows: &[usize]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitStage {
    Preprocess,
    Classifier,
    Regressor,
    Voter,
}

pub struct NoopObserver;

impl AccessObserver for NoopObserver {}

/// Feature dimensions. The defaults are the full-scale values; synthetic runs
/// shrink the acoustic side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub acoustic_dim: usize,
    pub pca_components: usize,
    pub sequence_len: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            acoustic_dim: COMPARE_DIM,
            pca_components: PCA_COMPONENTS,
            sequence_len: SEQUENCE_LEN,
        }
    }
}

/// Unfitted per-subject data, read once from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub group_id: String,
    pub label: Option<crate::models::Label>,
    pub mmse: Option<f64>,
    pub duration_s: f64,
    pub disfluency_raw: Vec<f64>,
    pub acoustic_raw: Vec<f64>,
    pub turns: Vec<Role>,
}

pub fn load_subject(
    row: &ManifestRow,
    acoustic_dim: usize,
    observer: &dyn AccessObserver,
) -> Result<SubjectRecord, DataError> {
    let duration_s = match (row.duration_s, &row.audio_path) {
        (Some(d), _) => d,
        (None, Some(audio)) => {
            observer.on_read(audio);
            read_wav_duration(audio)?
        }
        (None, None) => unreachable!("manifest rows carry a duration source"),
    };

    observer.on_read(&row.transcript_path);
    let bytes = fs::read(&row.transcript_path).map_err(io_error(&row.transcript_path))?;
    let doc =
        parse_transcript_bytes(&bytes, &row.subject_id).map_err(|source| DataError::Chat {
            path: row.transcript_path.clone(),
            source,
        })?;
    let disfluency_raw =
        extract_disfluency_raw(&doc, duration_s).map_err(|source| DataError::Feature {
            subject: row.subject_id.clone(),
            source,
        })?;

    observer.on_read(&row.acoustic_csv_path);
    let acoustic_raw = load_compare_csv(&row.acoustic_csv_path, acoustic_dim)?;

    Ok(SubjectRecord {
        subject_id: row.subject_id.clone(),
        group_id: row.group_id.clone(),
        label: row.label,
        mmse: row.mmse,
        duration_s,
        disfluency_raw,
        acoustic_raw,
        turns: speaker_sequence(&doc),
    })
}

/// Loads every subject in manifest order.
pub fn load_subjects(
    manifest: &DatasetManifest,
    acoustic_dim: usize,
    observer: &dyn AccessObserver,
) -> Result<Vec<SubjectRecord>, DataError> {
    manifest
        .rows
        .par_iter()
        .map(|row| load_subject(row, acoustic_dim, observer))
        .collect()
}
