//! Dataset manifests and the external formats they point at: CHAT
//! transcripts, RIFF/WAVE headers and ComParE functional CSVs. Also the
//! synthetic corpus generator used in place of the access-restricted data.

mod compare;
mod manifest;
mod synth;
mod wav;

pub use compare::{load_compare_csv, parse_compare_csv, write_compare_csv};
pub use manifest::{load_manifest, write_manifest, DatasetManifest, ManifestRow, MANIFEST_COLUMNS};
pub use synth::{generate_synthetic_corpus, SynthConfig, SyntheticCorpus};
pub use wav::{read_wav_duration, wav_duration_from_reader, write_wav_stub};

use std::path::PathBuf;

use thiserror::Error;

use crate::chat::ChatError;
use crate::features::FeatureError;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("manifest is missing required column {0:?}")]
    MissingColumn(String),
    #[error("manifest row {row} ({subject}): {detail}")]
    InvalidRow {
        row: usize,
        subject: String,
        detail: String,
    },
    #[error("duplicate subject_id {0:?}")]
    DuplicateSubject(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("subject {subject}: MMSE {value:?} is not an integer in 0..=30")]
    InvalidMmse { subject: String, value: String },
    #[error("{}: not a RIFF/WAVE file", .0.display())]
    NotRiff(PathBuf),
    #[error("{}: no {chunk:?} chunk", path.display())]
    MissingChunk { path: PathBuf, chunk: &'static str },
    #[error("{}: byte rate is zero", .0.display())]
    ZeroByteRate(PathBuf),
    #[error("{}: expected {expected} feature columns, found {got}", path.display())]
    WrongArity {
        path: PathBuf,
        expected: usize,
        got: usize,
    },
    #[error("{}: column {column:?} holds non-numeric value {value:?}", path.display())]
    NonNumericCell {
        path: PathBuf,
        column: String,
        value: String,
    },
    #[error("synthetic corpus needs an even, positive subject count, got {0}")]
    InvalidArity(usize),
    #[error("class separation must be finite and non-negative, got {0}")]
    InvalidSeparation(f64),
    #[error("{}: {source}", path.display())]
    Chat {
        path: PathBuf,
        #[source]
        source: ChatError,
    },
    #[error("subject {subject}: {source}")]
    Feature {
        subject: String,
        #[source]
        source: FeatureError,
    },
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DataError {
    let path = path.into();
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::FileNotFound(path)
        } else {
            DataError::Io { path, source }
        }
    }
}
