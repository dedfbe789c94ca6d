//! Input builders shared by the benchmarks.

use adscreen_core::chat::Role;
use adscreen_core::features::encode_interventions;
use adscreen_core::models::{ClassificationSet, Label, ModelInput};
use adscreen_core::nn::Tensor2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAR_LINES: [&str; 6] = [
    "well &uh the little boy is on a stool (..) getting cookies .",
    "and <the stool> [//] the stool is tipping over .",
    "the mother is washing (.) dishes +...",
    "&uh the water's running over (1.5) on the floor .",
    "the girl is &-um reaching for a cookie [/] cookie .",
    "xxx the window is open (..) and there's a curtain .",
];

const INV_LINES: [&str; 3] = ["mhm .", "anything else ?", "okay ."];

/// A CHAT transcript with `utterances` main tiers and a dependent tier after every third.
pub fn transcript(utterances: usize, seed: u64) -> String {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from(
        "@UTF8\n@Begin\n@Languages:\teng\n@Participants:\tPAR Participant, INV Investigator\n\
         @ID:\teng|Pitt|PAR|67;|female|ProbableAD||Participant|18||\n",
    );
    for i in 0..utterances {
        if r.random_bool(0.3) {
            out.push_str(&format!(
                "*INV:\t{}\n",
                INV_LINES[r.random_range(0..INV_LINES.len())]
            ));
        } else {
            out.push_str(&format!(
                "*PAR:\t{}\n",
                PAR_LINES[r.random_range(0..PAR_LINES.len())]
            ));
        }
        if i % 3 == 0 {
            out.push_str("%mor:\tadv|just v|tell pro:obj|me\n");
        }
    }
    out.push_str("@End\n");
    out
}

pub fn random_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn turn_sequence(len: usize, seq_len: usize, seed: u64) -> Tensor2 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let turns: Vec<Role> = (0..len)
        .map(|_| {
            if r.random_bool(0.3) {
                Role::Inv
            } else {
                Role::Par
            }
        })
        .collect();
    encode_interventions(&turns, seq_len)
}

/// Two shifted uniform clouds, alternating labels.
pub fn vector_set(n: usize, dim: usize, seed: u64) -> ClassificationSet {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut set = ClassificationSet::default();
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Ad } else { Label::Cn };
        let shift = if label.is_ad() { 0.5 } else { -0.5 };
        set.inputs.push(ModelInput::Vector(
            (0..dim)
                .map(|_| shift + r.random_range(-1.0..1.0))
                .collect(),
        ));
        set.labels.push(label);
    }
    set
}

pub fn sequence_set(n: usize, seed: u64) -> ClassificationSet {
    let mut set = ClassificationSet::default();
    for i in 0..n {
        set.inputs.push(ModelInput::Sequence(turn_sequence(
            20 + i % 12,
            32,
            seed + i as u64,
        )));
        set.labels
            .push(if i % 2 == 0 { Label::Ad } else { Label::Cn });
    }
    set
}
