//! Independent oracles shared by the integration and acceptance tests. Nothing
//! here calls into the code path it is used to check.
#![allow(dead_code)]

use adscreen_core::eval::FoldPlan;
use adscreen_core::models::Label;
use adscreen_core::nn::{mse_loss, softmax_xent, Activation, DenseLayer, LstmCell, Tensor2};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-6;
/// Denominator floor for relative error, so exact zeros compare absolutely.
const REL_FLOOR: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Central difference of `f` with respect to `params[i]` for every `i`.
pub fn central_diff(params: &mut [f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + FD_STEP;
        let plus = f(params);
        params[i] = orig - FD_STEP;
        let minus = f(params);
        params[i] = orig;
        out.push((plus - minus) / (2.0 * FD_STEP));
    }
    out
}

pub fn max_rel(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| rel_err(*a, *n))
        .fold(0.0, f64::max)
}

pub fn random_tensor(r: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Tensor2 {
    Tensor2::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| r.random_range(-scale..scale))
            .collect(),
    )
    .unwrap()
}

/// Checks a dense layer under the probe loss `sum(output * probe)`.
/// Returns the worst relative error over W, b and the input.
pub fn dense_gradient_check(seed: u64, activation: Activation) -> f64 {
    let mut r = rng(seed);
    let (n_in, n_out, batch) = (4, 3, 5);
    let mut layer = DenseLayer::glorot(n_in, n_out, activation, &mut r);
    layer.b = (0..n_out).map(|_| r.random_range(-0.5..0.5)).collect();
    let x = random_tensor(&mut r, batch, n_in, 1.5);
    let probe = random_tensor(&mut r, batch, n_out, 1.0);

    let loss = |layer: &DenseLayer, x: &Tensor2| -> f64 {
        let (y, _) = layer.forward(x).unwrap();
        y.data().iter().zip(probe.data()).map(|(a, b)| a * b).sum()
    };

    let (_, cache) = layer.forward(&x).unwrap();
    let (grads, dx) = layer.backward(&cache, &probe).unwrap();

    let mut w = layer.w.data().to_vec();
    let num_w = central_diff(&mut w, |w| {
        let mut l = layer.clone();
        l.w.data_mut().copy_from_slice(w);
        loss(&l, &x)
    });
    let mut b = layer.b.clone();
    let num_b = central_diff(&mut b, |b| {
        let mut l = layer.clone();
        l.b.copy_from_slice(b);
        loss(&l, &x)
    });
    let mut xs = x.data().to_vec();
    let num_x = central_diff(&mut xs, |xs| {
        loss(
            &layer,
            &Tensor2::from_vec(batch, n_in, xs.to_vec()).unwrap(),
        )
    });

    max_rel(grads.w.data(), &num_w)
        .max(max_rel(&grads.b, &num_b))
        .max(max_rel(dx.data(), &num_x))
}

pub fn random_one_hot_sequence(r: &mut ChaCha8Rng, len: usize) -> Tensor2 {
    let mut seq = Tensor2::zeros(len, 3);
    for t in 0..len {
        seq.set(t, r.random_range(0..3), 1.0);
    }
    seq
}

/// LSTM over a random 32x3 one-hot sequence, probe loss on the final state.
pub fn lstm_gradient_check(seed: u64, hidden: usize) -> f64 {
    let mut r = rng(seed);
    let mut cell = LstmCell::glorot(3, hidden, &mut r);
    cell.b = (0..4 * hidden).map(|_| r.random_range(-0.5..0.5)).collect();
    let seq = random_one_hot_sequence(&mut r, 32);
    let probe: Vec<f64> = (0..hidden).map(|_| r.random_range(-1.0..1.0)).collect();

    let loss = |cell: &LstmCell| -> f64 {
        let (h, _) = cell.forward(&seq, Some(32)).unwrap();
        h.iter().zip(&probe).map(|(a, b)| a * b).sum()
    };
    let (_, cache) = cell.forward(&seq, Some(32)).unwrap();
    let grads = cell.backward(&cache, &probe).unwrap();

    let mut wx = cell.w_x.data().to_vec();
    let num_wx = central_diff(&mut wx, |p| {
        let mut c = cell.clone();
        c.w_x.data_mut().copy_from_slice(p);
        loss(&c)
    });
    let mut wh = cell.w_h.data().to_vec();
    let num_wh = central_diff(&mut wh, |p| {
        let mut c = cell.clone();
        c.w_h.data_mut().copy_from_slice(p);
        loss(&c)
    });
    let mut b = cell.b.clone();
    let num_b = central_diff(&mut b, |p| {
        let mut c = cell.clone();
        c.b.copy_from_slice(p);
        loss(&c)
    });
    max_rel(grads.w_x.data(), &num_wx)
        .max(max_rel(grads.w_h.data(), &num_wh))
        .max(max_rel(&grads.b, &num_b))
}

pub fn xent_gradient_check(seed: u64) -> f64 {
    let mut r = rng(seed);
    let logits = random_tensor(&mut r, 8, 2, 3.0);
    let mut labels = Tensor2::zeros(8, 2);
    for i in 0..8 {
        labels.set(i, r.random_range(0..2), 1.0);
    }
    let (_, grad) = softmax_xent(&logits, &labels).unwrap();
    let mut z = logits.data().to_vec();
    let num = central_diff(&mut z, |z| {
        softmax_xent(&Tensor2::from_vec(8, 2, z.to_vec()).unwrap(), &labels)
            .unwrap()
            .0
    });
    max_rel(grad.data(), &num)
}

pub fn mse_gradient_check(seed: u64) -> f64 {
    let mut r = rng(seed);
    let pred: Vec<f64> = (0..16).map(|_| r.random_range(0.0..30.0)).collect();
    let targets: Vec<f64> = (0..16).map(|_| r.random_range(0.0..30.0)).collect();
    let (_, grad) = mse_loss(&pred, &targets).unwrap();
    let mut p = pred.clone();
    let num = central_diff(&mut p, |p| mse_loss(p, &targets).unwrap().0);
    max_rel(&grad, &num)
}

/// Top-k PCA scores of `rows` via a dense eigen-decomposition of the sample
/// covariance (nalgebra). Returns (components, variances, scores per row).
pub fn brute_force_pca(rows: &[Vec<f64>], k: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let d = rows[0].len();
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let mut xc = x.clone();
    for i in 0..n {
        let centered = xc.row(i) - &mean;
        xc.set_row(i, &centered);
    }
    let cov = xc.transpose() * &xc / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let comps: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    let vars = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let scores = (0..n)
        .map(|i| {
            comps
                .iter()
                .map(|c| c.iter().zip(xc.row(i).iter()).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    (comps, vars, scores)
}

/// Probability that a random positive outranks a random negative, ties ½.
pub fn concordance_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !positive[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if positive[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// Most frequent value among three binary labels.
pub fn brute_force_mode(labels: [usize; 3]) -> usize {
    let ones = labels.iter().filter(|&&l| l == 1).count();
    if ones * 2 > labels.len() {
        1
    } else {
        0
    }
}

/// Sample groups shaped like the Pitt corpus: 99 control subjects with 242
/// recordings and 168 AD subjects with 255, shuffled by `seed`.
pub fn pitt_shaped_groups(seed: u64) -> (Vec<String>, Vec<Label>) {
    let mut samples = Vec::new();
    for g in 0..99 {
        let visits = if g < 44 { 3 } else { 2 };
        samples.extend((0..visits).map(|_| (format!("cn{g:03}"), Label::Cn)));
    }
    for g in 0..168 {
        let visits = if g < 87 { 2 } else { 1 };
        samples.extend((0..visits).map(|_| (format!("ad{g:03}"), Label::Ad)));
    }
    samples.shuffle(&mut rng(seed));
    samples.into_iter().unzip()
}

/// Every index appears in exactly one validation set and never in its own
/// fold's training set.
pub fn assert_partition(plan: &FoldPlan, n: usize) {
    let mut seen = vec![0usize; n];
    for fold in &plan.folds {
        let mut in_val = vec![false; n];
        for &i in &fold.val {
            seen[i] += 1;
            in_val[i] = true;
        }
        assert_eq!(fold.train.len() + fold.val.len(), n);
        assert!(fold.train.iter().all(|&i| !in_val[i]));
    }
    assert!(
        seen.iter().all(|&c| c == 1),
        "validation sets do not partition the samples"
    );
}

/// Number of groups that appear on both sides of some fold.
pub fn group_straddles(plan: &FoldPlan, groups: &[String]) -> usize {
    use std::collections::HashSet;
    plan.folds
        .iter()
        .map(|fold| {
            let val: HashSet<&str> = fold.val.iter().map(|&i| groups[i].as_str()).collect();
            fold.train
                .iter()
                .filter(|&&i| val.contains(groups[i].as_str()))
                .map(|&i| &groups[i])
                .collect::<HashSet<_>>()
                .len()
        })
        .sum()
}

/// Gaussian columns with increasing scale, so eigenvalues are well separated.
pub fn random_matrix(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let scales: Vec<f64> = (0..d).map(|j| 1.0 + j as f64 * 0.7).collect();
    (0..n)
        .map(|_| {
            (0..d)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    z * scales[j] + r.random_range(-0.3..0.3)
                })
                .collect()
        })
        .collect()
}

/// Worst score deviation from the brute-force oracle (after sign alignment)
/// and worst departure from orthonormality of the fitted components.
pub fn pca_deviation(rows: &[Vec<f64>], k: usize) -> (f64, f64) {
    let pca = adscreen_core::features::fit_pca(rows, k).expect("fit");
    let (comps, _, scores) = brute_force_pca(rows, k);
    let mut score_dev: f64 = 0.0;
    for c in 0..k {
        let aligned: f64 = pca.components[c]
            .iter()
            .zip(&comps[c])
            .map(|(a, b)| a * b)
            .sum();
        let sign = aligned.signum();
        for (row, want) in rows.iter().zip(&scores) {
            let got = pca.apply(row).expect("apply");
            score_dev = score_dev.max((got[c] - sign * want[c]).abs());
        }
    }
    let mut ortho: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let d: f64 = pca.components[i]
                .iter()
                .zip(&pca.components[j])
                .map(|(a, b)| a * b)
                .sum();
            ortho = ortho.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    (score_dev, ortho)
}
