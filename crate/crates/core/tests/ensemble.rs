mod common;

use adscreen_core::ensemble::{average_regression, hard_vote, learnt_vote, soft_vote};
use adscreen_core::models::{train_lr_voter, ClassProbabilities, Label, LrVoter, MmseScore};
use rand::Rng;

fn p(ad: f64) -> ClassProbabilities {
    ClassProbabilities::from_ad(ad).unwrap()
}

#[test]
fn hard_vote_matches_mode_on_every_triple() {
    for bits in 0..8usize {
        let labels = [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1];
        let members: Vec<_> = labels
            .iter()
            .map(|&l| p(if l == 1 { 0.8 } else { 0.2 }))
            .collect();
        let expected = common::brute_force_mode(labels);
        assert_eq!(
            hard_vote(&members).unwrap().index(),
            expected,
            "labels {labels:?}"
        );
    }
}

#[test]
fn hard_vote_ignores_monotone_relabeling() {
    let mut r = common::rng(3);
    for _ in 0..500 {
        let ads: Vec<f64> = (0..3).map(|_| r.random_range(0.0..1.0)).collect();
        let base: Vec<_> = ads.iter().map(|&a| p(a)).collect();
        // Cubing around 0.5 keeps each member on its side of the boundary.
        let warped: Vec<_> = ads
            .iter()
            .map(|&a| p(0.5 + 4.0 * (a - 0.5).powi(3)))
            .collect();
        assert_eq!(hard_vote(&base).unwrap(), hard_vote(&warped).unwrap());
    }
}

#[test]
fn soft_vote_matches_recomputed_mean() {
    let mut r = common::rng(1);
    for _ in 0..1000 {
        let ads: Vec<f64> = (0..3).map(|_| r.random_range(0.0..1.0)).collect();
        let members: Vec<_> = ads.iter().map(|&a| p(a)).collect();
        let (combined, label) = soft_vote(&members).unwrap();
        let [a, b] = combined.as_array();
        assert!(a >= 0.0 && b >= 0.0 && ((a + b) - 1.0).abs() < 1e-12);
        let mean_ad = ads.iter().sum::<f64>() / 3.0;
        let mean_non = ads.iter().map(|x| 1.0 - x).sum::<f64>() / 3.0;
        if (mean_ad - mean_non).abs() > 1e-12 {
            assert_eq!(label.is_ad(), mean_ad > mean_non);
        }
    }
}

#[test]
fn soft_vote_is_permutation_invariant() {
    let mut r = common::rng(2);
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for _ in 0..300 {
        let members: Vec<_> = (0..3).map(|_| p(r.random_range(0.0..1.0))).collect();
        let reference = soft_vote(&members).unwrap();
        for perm in perms {
            let shuffled: Vec<_> = perm.iter().map(|&i| members[i]).collect();
            assert_eq!(soft_vote(&shuffled).unwrap(), reference);
        }
    }
}

#[test]
fn regression_average_is_bounded_and_symmetric() {
    let mut r = common::rng(4);
    for _ in 0..1000 {
        let vals: Vec<f64> = (0..3).map(|_| r.random_range(0.0..=30.0)).collect();
        let members: Vec<_> = vals.iter().map(|&v| MmseScore::clamped(v)).collect();
        let avg = average_regression(&members).unwrap().value();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(avg >= lo && avg <= hi);
        let rev: Vec<_> = members.iter().rev().copied().collect();
        assert_eq!(average_regression(&rev).unwrap().value(), avg);
    }
}

/// A voter with `+w` on the AD coordinates and `-w` on the non-AD ones scores
/// `w * (sum AD - sum non-AD)`, whose sign is the soft-vote decision.
#[test]
fn symmetric_voter_agrees_with_soft_vote() {
    let mut r = common::rng(5);
    for w in [0.5, 1.0, 7.0] {
        let voter = LrVoter::from_weights(vec![-w, w, -w, w, -w, w], 0.0);
        for _ in 0..1000 {
            let members: Vec<_> = (0..3).map(|_| p(r.random_range(0.0..1.0))).collect();
            let (combined, soft) = soft_vote(&members).unwrap();
            if (combined.ad() - 0.5).abs() > 1e-12 {
                assert_eq!(learnt_vote(&voter, &members).unwrap(), soft);
            }
        }
    }
}

/// With weight only on the AD coordinates, a bias of `-1.5 w` puts the
/// boundary at a mean AD probability of one half.
#[test]
fn ad_only_voter_with_offset_agrees_with_soft_vote() {
    let mut r = common::rng(6);
    let w = 2.0;
    let voter = LrVoter::from_weights(vec![0.0, w, 0.0, w, 0.0, w], -1.5 * w);
    for _ in 0..1000 {
        let members: Vec<_> = (0..3).map(|_| p(r.random_range(0.0..1.0))).collect();
        let (combined, soft) = soft_vote(&members).unwrap();
        if (combined.ad() - 0.5).abs() > 1e-12 {
            assert_eq!(learnt_vote(&voter, &members).unwrap(), soft);
        }
    }
}

fn reliable_first_member(
    r: &mut rand_chacha::ChaCha8Rng,
    n: usize,
) -> (Vec<Vec<ClassProbabilities>>, Vec<Label>) {
    let mut members = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let label = if r.random_bool(0.5) {
            Label::Ad
        } else {
            Label::Cn
        };
        let p1 = if label.is_ad() {
            r.random_range(0.55..1.0)
        } else {
            r.random_range(0.0..0.45)
        };
        members.push(vec![
            p(p1),
            p(r.random_range(0.0..1.0)),
            p(r.random_range(0.0..1.0)),
        ]);
        labels.push(label);
    }
    (members, labels)
}

#[test]
fn trained_voter_tracks_reliable_member_on_held_out_rows() {
    let mut r = common::rng(7);
    let (train, labels) = reliable_first_member(&mut r, 200);
    let rows: Vec<Vec<f64>> = train
        .iter()
        .map(|m| m.iter().flat_map(|p| p.as_array()).collect())
        .collect();
    let voter = train_lr_voter(&rows, &labels).unwrap();
    let (held_out, _) = reliable_first_member(&mut r, 200);
    let agree = held_out
        .iter()
        .filter(|m| learnt_vote(&voter, m).unwrap() == m[0].label())
        .count();
    assert!(agree as f64 / 200.0 >= 0.95, "agreement {agree}/200");
}
