use std::path::Path;
use std::process::{Command, Output};

fn adscreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adscreen"))
        .args(args)
        .env_remove("ADSCREEN_OUT")
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, n: usize) -> String {
    let out = dir.join("corpus");
    let o = adscreen(&[
        "synth",
        "--n",
        &n.to_string(),
        "--acoustic-dim",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("manifest.csv").to_str().unwrap().to_string()
}

#[test]
fn synth_then_train_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 20);
    let out = dir.path().join("report");
    let o = adscreen(&[
        "train",
        "--manifest",
        &manifest,
        "--protocol",
        "kfold:5",
        "--epochs",
        "15",
        "--acoustic-dim",
        "16",
        "--pca-components",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--save-models",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "metrics.csv",
        "summary.csv",
        "roc.csv",
        "confusion.csv",
        "predictions.csv",
        "plots/roc.svg",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("fold,model,split,n,accuracy"));
    assert!(out.join("models/disfluency.ckpt").is_file());

    let eval_out = dir.path().join("eval");
    let o = adscreen(&[
        "evaluate",
        "--models",
        out.join("models").to_str().unwrap(),
        "--manifest",
        &manifest,
        "--out",
        eval_out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(eval_out.join("metrics.csv").is_file());

    let o = adscreen(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn predict_prints_class_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 20);
    let out = dir.path().join("report");
    let o = adscreen(&[
        "train",
        "--manifest",
        &manifest,
        "--protocol",
        "kfold:2",
        "--epochs",
        "5",
        "--acoustic-dim",
        "16",
        "--pca-components",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--save-models",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let corpus = dir.path().join("corpus");
    let first = |sub: &str| {
        let mut names: Vec<_> = std::fs::read_dir(corpus.join(sub))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        names.sort();
        names[0].to_str().unwrap().to_string()
    };
    let o = adscreen(&[
        "predict",
        "--models",
        out.join("models").to_str().unwrap(),
        "--transcript",
        &first("transcripts"),
        "--acoustic",
        &first("acoustic"),
        "--audio",
        &first("audio"),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("soft vote"));
    assert!(text.contains("MMSE"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(adscreen(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(adscreen(&["--help"]).status.code(), Some(0));
    assert_eq!(
        adscreen(&["train", "--manifest", "m.csv", "--protocol", "kfold:x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn missing_transcript_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 10);
    let transcripts = dir.path().join("corpus/transcripts");
    let victim = std::fs::read_dir(&transcripts)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    std::fs::remove_file(&victim).unwrap();
    let o = adscreen(&[
        "train",
        "--manifest",
        &manifest,
        "--acoustic-dim",
        "16",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(
        stderr.contains(victim.file_name().unwrap().to_str().unwrap()),
        "{stderr}"
    );
}

#[test]
fn holdout_without_test_manifest_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 10);
    let o = adscreen(&[
        "train",
        "--manifest",
        &manifest,
        "--protocol",
        "holdout",
        "--acoustic-dim",
        "16",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
