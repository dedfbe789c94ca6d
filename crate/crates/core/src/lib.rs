//! Multimodal speech-based dementia screening.
//!
//! Transcripts in CHAT format and acoustic functionals are turned into three
//! feature views (disfluency rates, PCA-reduced acoustics, speaker-turn
//! sequences), each feeding a small neural classifier. Classifier bodies are
//! reused with frozen weights for MMSE regression, and the three models are
//! combined by hard, soft or learnt voting.

pub mod chat;
pub mod data;
pub mod ensemble;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod report;
