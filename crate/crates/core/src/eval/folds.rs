use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::models::Label;

/// Indices into the sample list the plan was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    pub k: usize,
    pub seed: u64,
    pub grouped: bool,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

/// Builds folds from a per-sample fold assignment.
fn plan_from_assignment(assignment: &[usize], k: usize, seed: u64, grouped: bool) -> FoldPlan {
    let folds = (0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..assignment.len()).partition(|&i| assignment[i] == f);
            Fold { train, val }
        })
        .collect();
    FoldPlan {
        folds,
        k,
        seed,
        grouped,
    }
}

/// Shuffles each class with a seeded RNG, then deals members to folds
/// round-robin. The dealing position carries over from one class to the next
/// so fold sizes stay within one of each other.
fn deal(labels: &[Label], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut slot = 0;
    for class in [Label::Cn, Label::Ad] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = slot % k;
            slot += 1;
        }
    }
    assignment
}

pub fn make_stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    for class in [Label::Cn, Label::Ad] {
        let have = labels.iter().filter(|&&l| l == class).count();
        if have < k {
            return Err(EvalError::TooFewPerClass { class, have, k });
        }
    }
    Ok(plan_from_assignment(&deal(labels, k, seed), k, seed, false))
}

pub fn make_loso_folds(n: usize) -> Result<FoldPlan, EvalError> {
    if n < 2 {
        return Err(EvalError::TooFewSubjects(n));
    }
    let assignment: Vec<usize> = (0..n).collect();
    Ok(plan_from_assignment(&assignment, n, 0, false))
}

/// Stratified folds over groups. A group's label is the majority of its
/// samples' labels, ties going to the label of its first sample.
pub fn make_grouped_folds<S: AsRef<str>>(
    group_ids: &[S],
    labels: &[Label],
    k: usize,
    seed: u64,
) -> Result<FoldPlan, EvalError> {
    assert_eq!(group_ids.len(), labels.len(), "one group id per sample");
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut sample_group = Vec::with_capacity(labels.len());
    let mut tallies: Vec<(Label, usize, usize)> = Vec::new();
    for (g, &label) in group_ids.iter().zip(labels) {
        let next = index.len();
        let gi = *index.entry(g.as_ref()).or_insert(next);
        if gi == tallies.len() {
            tallies.push((label, 0, 0));
        }
        if label.is_ad() {
            tallies[gi].2 += 1;
        } else {
            tallies[gi].1 += 1;
        }
        sample_group.push(gi);
    }
    if tallies.len() < k {
        return Err(EvalError::TooFewGroups {
            groups: tallies.len(),
            k,
        });
    }
    let group_labels: Vec<Label> = tallies
        .iter()
        .map(|&(first, cn, ad)| match ad.cmp(&cn) {
            std::cmp::Ordering::Greater => Label::Ad,
            std::cmp::Ordering::Less => Label::Cn,
            std::cmp::Ordering::Equal => first,
        })
        .collect();
    let group_fold = deal(&group_labels, k, seed);
    let assignment: Vec<usize> = sample_group.iter().map(|&g| group_fold[g]).collect();
    Ok(plan_from_assignment(&assignment, k, seed, true))
}

/// Stratified `1/k` validation split, the first fold of a stratified plan.
pub fn holdout_split(labels: &[Label], k: usize, seed: u64) -> Result<Fold, EvalError> {
    Ok(make_stratified_folds(labels, k, seed)?.folds.swap_remove(0))
}
