//! Combining the per-view model outputs for one subject.
//!
//! Members are ordered Disfluency, Acoustic, Interventions. Every decision
//! rule sends an exact tie to non-AD.

use thiserror::Error;

use crate::models::{ClassProbabilities, Label, LrVoter, MmseScore, ModelError};

/// Number of ensemble members in the standard configuration.
pub const ENSEMBLE_SIZE: usize = 3;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("ensemble expects {expected} members, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("voter has not been trained")]
    UntrainedVoter,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_arity<T>(members: &[T], arity: usize) -> Result<(), EnsembleError> {
    if members.len() != arity || arity == 0 {
        return Err(EnsembleError::WrongArity {
            expected: arity,
            got: members.len(),
        });
    }
    Ok(())
}

/// Order-independent sum: adding sorted values makes the result bit-identical
/// under any permutation of the members.
fn stable_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

pub fn hard_vote(members: &[ClassProbabilities]) -> Result<Label, EnsembleError> {
    hard_vote_n(members, ENSEMBLE_SIZE)
}

/// Majority of the members' argmax labels.
pub fn hard_vote_n(members: &[ClassProbabilities], arity: usize) -> Result<Label, EnsembleError> {
    check_arity(members, arity)?;
    let ad = members.iter().filter(|p| p.label().is_ad()).count();
    Ok(if 2 * ad > arity { Label::Ad } else { Label::Cn })
}

pub fn soft_vote(
    members: &[ClassProbabilities],
) -> Result<(ClassProbabilities, Label), EnsembleError> {
    soft_vote_n(members, ENSEMBLE_SIZE)
}

/// Uniform `1/N` average of the member probabilities.
pub fn soft_vote_n(
    members: &[ClassProbabilities],
    arity: usize,
) -> Result<(ClassProbabilities, Label), EnsembleError> {
    check_arity(members, arity)?;
    let n = arity as f64;
    let non_ad = stable_sum(members.iter().map(|p| p.non_ad()).collect()) / n;
    let ad = stable_sum(members.iter().map(|p| p.ad()).collect()) / n;
    let combined = ClassProbabilities::new([non_ad, ad])?;
    Ok((combined, combined.label()))
}

/// Concatenated `[non-AD, AD]` pairs, the voter's input layout.
pub fn probability_row(members: &[ClassProbabilities]) -> Vec<f64> {
    members.iter().flat_map(|p| p.as_array()).collect()
}

pub fn learnt_vote(
    voter: &LrVoter,
    members: &[ClassProbabilities],
) -> Result<Label, EnsembleError> {
    learnt_vote_n(voter, members, ENSEMBLE_SIZE)
}

pub fn learnt_vote_n(
    voter: &LrVoter,
    members: &[ClassProbabilities],
    arity: usize,
) -> Result<Label, EnsembleError> {
    check_arity(members, arity)?;
    if !voter.trained {
        return Err(EnsembleError::UntrainedVoter);
    }
    if voter.weights.len() != 2 * arity {
        return Err(EnsembleError::WrongArity {
            expected: voter.weights.len() / 2,
            got: arity,
        });
    }
    Ok(voter.predict(&probability_row(members))?.label())
}

pub fn average_regression(members: &[MmseScore]) -> Result<MmseScore, EnsembleError> {
    average_regression_n(members, ENSEMBLE_SIZE)
}

/// Arithmetic mean of the member scores, clamped to the MMSE range.
pub fn average_regression_n(
    members: &[MmseScore],
    arity: usize,
) -> Result<MmseScore, EnsembleError> {
    check_arity(members, arity)?;
    let mean = stable_sum(members.iter().map(|m| m.value()).collect()) / arity as f64;
    Ok(MmseScore::clamped(mean))
}
