//! `adscreen` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adscreen_core::data::{
    generate_synthetic_corpus, load_manifest, DataError, ManifestRow, SynthConfig,
};
use adscreen_core::features::{DISFLUENCY_FEATURE_NAMES, PCA_COMPONENTS, SEQUENCE_LEN};
use adscreen_core::models::{ModelKind, Preprocess};
use adscreen_core::pipeline::{
    evaluate_model_set, load_subject, load_subjects, run_experiment, train_final_model_set,
    EnsembleSelection, ExperimentConfig, ExperimentError, ExperimentReport, FeatureConfig,
    ModelSet, NoopObserver, Protocol, SubjectRecord, TaskSelection,
};
use adscreen_core::report::{render_plots, write_report};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "adscreen",
    version,
    about = "Multimodal dementia screening from speech transcripts and acoustics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-subject raw features for a manifest
    Extract(ExtractArgs),
    /// Cross-validate the models and ensembles, writing a report
    Train(TrainArgs),
    /// Score saved models on a labelled manifest
    Evaluate(EvaluateArgs),
    /// Predict class and MMSE for one subject
    Predict(PredictArgs),
    /// Generate a synthetic corpus with a known class structure
    Synth(SynthArgs),
    /// Re-render plots from the CSVs in a report directory
    Report(ReportArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = adscreen_core::features::COMPARE_DIM)]
    acoustic_dim: usize,
    /// Output CSV
    #[arg(long, default_value = "features.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// kfold:K, loso or holdout
    #[arg(long, default_value = "kfold:5")]
    protocol: Protocol,
    /// Test manifest for the holdout protocol
    #[arg(long)]
    holdout: Option<PathBuf>,
    /// classify, regress or both
    #[arg(long, default_value = "both")]
    task: TaskSelection,
    /// hard, soft, learnt or all
    #[arg(long, default_value = "all")]
    ensemble: EnsembleSelection,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 400)]
    epochs: usize,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value_t = adscreen_core::features::COMPARE_DIM)]
    acoustic_dim: usize,
    #[arg(long, default_value_t = PCA_COMPONENTS)]
    pca_components: usize,
    /// Force subject-grouped folds on or off; by default they are used when group ids repeat
    #[arg(long)]
    grouped: Option<bool>,
    #[arg(long, env = "ADSCREEN_OUT", default_value = "adscreen-out")]
    out: PathBuf,
    /// Also train one model set on the whole manifest and save it under OUT/models
    #[arg(long)]
    save_models: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory written by `train --save-models`
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, env = "ADSCREEN_OUT", default_value = "adscreen-eval")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    transcript: PathBuf,
    /// openSMILE-style CSV holding one feature row
    #[arg(long)]
    acoustic: PathBuf,
    /// WAV file used for the recording duration
    #[arg(long, required_unless_present = "duration")]
    audio: Option<PathBuf>,
    /// Recording duration in seconds
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value = "subject")]
    subject_id: String,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 80)]
    n: usize,
    /// Class separation in latent standard deviations
    #[arg(long, default_value_t = 3.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = adscreen_core::features::COMPARE_DIM)]
    acoustic_dim: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Report directory holding roc.csv and confusion.csv
    dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Predict(a) => predict(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<DataError>().is_some() {
            return EXIT_DATA;
        }
        if let Some(x) = cause.downcast_ref::<ExperimentError>() {
            if matches!(
                x,
                ExperimentError::Data(_) | ExperimentError::ProtocolMismatch(_)
            ) {
                return EXIT_DATA;
            }
        }
    }
    EXIT_RUNTIME
}

fn load_records(manifest: &Path, acoustic_dim: usize) -> Result<Vec<SubjectRecord>> {
    let manifest = load_manifest(manifest)?;
    Ok(load_subjects(&manifest, acoustic_dim, &NoopObserver)?)
}

fn extract(a: ExtractArgs) -> Result<()> {
    let subjects = load_records(&a.manifest, a.acoustic_dim)?;
    let mut w =
        csv::Writer::from_path(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let mut header = vec!["subject_id", "duration_s", "turns", "inv_turns"];
    header.extend(DISFLUENCY_FEATURE_NAMES);
    w.write_record(&header)?;
    for s in &subjects {
        let inv = s
            .turns
            .iter()
            .filter(|r| **r == adscreen_core::chat::Role::Inv)
            .count();
        let mut row = vec![
            s.subject_id.clone(),
            s.duration_s.to_string(),
            s.turns.len().to_string(),
            inv.to_string(),
        ];
        row.extend(s.disfluency_raw.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    println!("wrote {} subjects to {}", subjects.len(), a.out.display());
    Ok(())
}

fn print_summary(report: &ExperimentReport) {
    for s in &report.summaries {
        if ["accuracy", "f1", "rmse"].contains(&s.summary.name) {
            println!(
                "{:<18} {:<5} {:<8} {:.4} ± {:.4}",
                s.model,
                s.split.name(),
                s.summary.name,
                s.summary.mean,
                s.summary.std
            );
        }
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        task: a.task,
        protocol: a.protocol,
        ensemble: a.ensemble,
        seed: a.seed,
        features: FeatureConfig {
            acoustic_dim: a.acoustic_dim,
            pca_components: a.pca_components,
            sequence_len: SEQUENCE_LEN,
        },
        grouped: a.grouped,
        jobs: a.jobs,
        train: adscreen_core::models::TrainConfig {
            max_epochs: a.epochs,
            seed: a.seed,
            ..Default::default()
        },
        ..ExperimentConfig::default()
    };
    let subjects = load_records(&a.manifest, a.acoustic_dim)?;
    let holdout = a
        .holdout
        .as_deref()
        .map(|p| load_records(p, a.acoustic_dim))
        .transpose()?;
    let report = run_experiment(&cfg, &subjects, holdout.as_deref(), &NoopObserver)?;
    write_report(&report, &a.out)?;
    fs::write(
        a.out.join("config.json"),
        serde_json::to_string_pretty(&cfg)?,
    )
    .with_context(|| format!("writing {}", a.out.join("config.json").display()))?;
    print_summary(&report);
    if a.save_models {
        let set = train_final_model_set(&cfg, &subjects, &NoopObserver)?;
        set.save(&a.out.join("models"))?;
    }
    println!("report written to {}", a.out.display());
    Ok(())
}

fn acoustic_dim_of(set: &ModelSet) -> Option<usize> {
    set.classifiers.iter().find_map(|c| match &c.preprocess {
        Preprocess::Acoustic { zscore, .. } => Some(zscore.dim()),
        _ => None,
    })
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let set = ModelSet::load(&a.models)?;
    let acoustic_dim = acoustic_dim_of(&set).context("model set has no acoustic preprocessing")?;
    let subjects = load_records(&a.manifest, acoustic_dim)?;
    let cfg = ExperimentConfig {
        task: if set.regressors.is_some() {
            TaskSelection::Both
        } else {
            TaskSelection::Classify
        },
        ..ExperimentConfig::default()
    };
    let report = evaluate_model_set(&set, &subjects, &cfg)?;
    write_report(&report, &a.out)?;
    print_summary(&report);
    println!("report written to {}", a.out.display());
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let set = ModelSet::load(&a.models)?;
    let acoustic_dim = acoustic_dim_of(&set).context("model set has no acoustic preprocessing")?;
    let row = ManifestRow {
        subject_id: a.subject_id.clone(),
        transcript_path: a.transcript,
        audio_path: a.audio,
        duration_s: a.duration,
        acoustic_csv_path: a.acoustic,
        label: None,
        mmse: None,
        group_id: a.subject_id.clone(),
    };
    let subject = load_subject(&row, acoustic_dim, &NoopObserver)?;
    let p = set.predict(0, &subject)?;
    println!("subject        {}", a.subject_id);
    for (kind, m) in ModelKind::ALL.iter().zip(&p.members) {
        println!("{:<14} P(AD) = {:.4}", kind.name(), m.ad());
    }
    println!("hard vote      {}", p.hard);
    println!(
        "soft vote      {} (P(AD) = {:.4})",
        p.soft.label(),
        p.soft.ad()
    );
    if let (Some(l), Some(prob)) = (p.learnt_label, p.learnt) {
        println!("learnt vote    {l} (P(AD) = {:.4})", prob.ad());
    }
    if let Some(m) = p.mmse_average {
        println!("MMSE           {m:.2}");
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        n_subjects: a.n,
        separation: a.sep,
        seed: a.seed,
        acoustic_dim: a.acoustic_dim,
        ..SynthConfig::default()
    };
    let corpus = generate_synthetic_corpus(&cfg, &a.out)?;
    println!(
        "wrote {} subjects; manifest at {}",
        corpus.manifest.len(),
        corpus.manifest_path.display()
    );
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    for path in render_plots(&a.dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
