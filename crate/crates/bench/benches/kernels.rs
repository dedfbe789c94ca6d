use adscreen_bench::{random_rows, sequence_set, transcript, turn_sequence, vector_set};
use adscreen_core::chat::parse_transcript;
use adscreen_core::features::{extract_disfluency_raw, fit_pca};
use adscreen_core::models::{
    build_classifier, train_classifier, ArchConfig, ModelKind, TrainConfig,
};
use adscreen_core::nn::LstmCell;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn pca(c: &mut Criterion) {
    let mut g = c.benchmark_group("pca_fit");
    g.sample_size(10);
    for d in [64, 1024, 6373] {
        let rows = random_rows(80, d, 1);
        g.bench_with_input(BenchmarkId::from_parameter(d), &rows, |b, rows| {
            b.iter(|| fit_pca(black_box(rows), 21.min(d)).unwrap())
        });
    }
    g.finish();
}

fn chat(c: &mut Criterion) {
    let text = transcript(200, 3);
    c.bench_function("parse_transcript/200", |b| {
        b.iter(|| parse_transcript(black_box(&text), "s").unwrap())
    });
    let doc = parse_transcript(&text, "s").unwrap();
    c.bench_function("disfluency_features/200", |b| {
        b.iter(|| extract_disfluency_raw(black_box(&doc), 60.0).unwrap())
    });
}

fn lstm(c: &mut Criterion) {
    let cell = LstmCell::glorot(3, 16, &mut ChaCha8Rng::seed_from_u64(4));
    let seq = turn_sequence(24, 32, 5);
    c.bench_function("lstm16/forward", |b| {
        b.iter(|| cell.forward(black_box(&seq), Some(32)).unwrap())
    });
    let (h, cache) = cell.forward(&seq, Some(32)).unwrap();
    c.bench_function("lstm16/backward", |b| {
        b.iter(|| cell.backward(black_box(&cache), &h).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let cfg = TrainConfig {
        max_epochs: 10,
        ..TrainConfig::default()
    };
    let mut g = c.benchmark_group("train_10_epochs");
    g.sample_size(10);
    let dense = vector_set(64, 11, 6);
    g.bench_function("disfluency", |b| {
        b.iter(|| {
            let net = build_classifier(ModelKind::Disfluency, &ArchConfig::default(), 1);
            train_classifier(net, &dense, &dense, &cfg).unwrap()
        })
    });
    let seqs = sequence_set(64, 7);
    g.bench_function("interventions", |b| {
        b.iter(|| {
            let net = build_classifier(ModelKind::Interventions, &ArchConfig::default(), 1);
            train_classifier(net, &seqs, &seqs, &cfg).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, pca, chat, lstm, training);
criterion_main!(benches);
