use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::modelset::{model_input, ModelSet, SubjectPrediction};
use super::subjects::{AccessObserver, FeatureConfig, FitStage, SubjectRecord};
use super::ExperimentError;
use crate::ensemble::probability_row;
use crate::eval::{
    aggregate_report, classification_metrics, holdout_split, make_grouped_folds, make_loso_folds,
    make_stratified_folds, regression_metrics, roc_curve, ClassificationMetrics, ConfusionMatrix,
    FoldMetrics, FoldPlan, MetricSummary, RegressionMetrics, RocCurve,
};
use crate::features::{fit_minmax, fit_pca, fit_zscore, DISFLUENCY_DIM};
use crate::models::{
    build_classifier, derive_seed, train_classifier, train_lr_voter, train_regressor, ArchConfig,
    ClassificationSet, Label, LrVoter, ModelCheckpoint, ModelKind, Preprocess, RegressionSet,
    TrainConfig, TrainingHistory,
};

pub const HARD_ENSEMBLE: &str = "hard_ensemble";
pub const SOFT_ENSEMBLE: &str = "soft_ensemble";
pub const LEARNT_ENSEMBLE: &str = "learnt_ensemble";
pub const AVERAGE_ENSEMBLE: &str = "average_ensemble";

const FOLD_TAG: u64 = 0xF01D;
const INNER_TAG: u64 = 0x1AAE;
const HOLDOUT_TAG: u64 = 0x401D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskSelection {
    Classify,
    Regress,
    Both,
}

impl TaskSelection {
    pub fn classify(self) -> bool {
        self != TaskSelection::Regress
    }

    pub fn regress(self) -> bool {
        self != TaskSelection::Classify
    }
}

impl FromStr for TaskSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classify" => Ok(Self::Classify),
            "regress" => Ok(Self::Regress),
            "both" => Ok(Self::Both),
            _ => Err(format!("unknown task {s:?} (classify, regress, both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    KFold(usize),
    Loso,
    Holdout,
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("kfold", k)) => k
                .parse()
                .map(Protocol::KFold)
                .map_err(|_| format!("bad fold count in {s:?}")),
            None if s == "kfold" => Ok(Protocol::KFold(5)),
            None if s == "loso" => Ok(Protocol::Loso),
            None if s == "holdout" => Ok(Protocol::Holdout),
            _ => Err(format!("unknown protocol {s:?} (kfold:K, loso, holdout)")),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::KFold(k) => write!(f, "kfold:{k}"),
            Protocol::Loso => f.write_str("loso"),
            Protocol::Holdout => f.write_str("holdout"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleSelection {
    Hard,
    Soft,
    Learnt,
    All,
}

impl EnsembleSelection {
    fn includes(self, other: EnsembleSelection) -> bool {
        self == EnsembleSelection::All || self == other
    }
}

impl FromStr for EnsembleSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hard" => Ok(Self::Hard),
            "soft" => Ok(Self::Soft),
            "learnt" | "learned" => Ok(Self::Learnt),
            "all" => Ok(Self::All),
            _ => Err(format!("unknown ensemble {s:?} (hard, soft, learnt, all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskSelection,
    pub protocol: Protocol,
    pub ensemble: EnsembleSelection,
    pub seed: u64,
    pub arch: ArchConfig,
    pub train: TrainConfig,
    pub features: FeatureConfig,
    /// `None` groups folds whenever some group id repeats.
    pub grouped: Option<bool>,
    /// Worker threads for fold-level parallelism; 0 uses all cores.
    pub jobs: usize,
    /// Inner folds used to produce out-of-fold rows for the learnt voter.
    pub inner_folds: usize,
    /// The holdout protocol selects checkpoints on a `1/k` stratified slice
    /// of the training manifest.
    pub selection_folds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: TaskSelection::Both,
            protocol: Protocol::KFold(5),
            ensemble: EnsembleSelection::All,
            seed: 0,
            arch: ArchConfig::default(),
            train: TrainConfig::default(),
            features: FeatureConfig::default(),
            grouped: None,
            jobs: 0,
            inner_folds: 4,
            selection_folds: 5,
        }
    }
}

impl ExperimentConfig {
    fn effective_arch(&self) -> ArchConfig {
        ArchConfig {
            disfluency_inputs: DISFLUENCY_DIM,
            acoustic_inputs: self.features.pca_components,
            sequence_len: self.features.sequence_len,
            ..self.arch.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub fold: usize,
    pub kind: ModelKind,
    pub history: TrainingHistory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub index: usize,
    pub train_predictions: Vec<SubjectPrediction>,
    pub eval_predictions: Vec<SubjectPrediction>,
    pub histories: Vec<HistoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub fold: usize,
    pub model: &'static str,
    pub split: Split,
    pub n: usize,
    pub metrics: FoldMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub model: &'static str,
    pub split: Split,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub subject_ids: Vec<String>,
    pub rows: Vec<MetricRow>,
    pub summaries: Vec<SummaryRow>,
    /// Pooled over all evaluation splits, one curve per scored model.
    pub roc: Vec<(&'static str, RocCurve)>,
    pub confusion: Vec<(&'static str, ConfusionMatrix)>,
    pub folds: Vec<FoldOutcome>,
}

impl ExperimentReport {
    pub fn mean(&self, model: &str, split: Split, metric: &str) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.model == model && s.split == split && s.summary.name == metric)
            .map(|s| s.summary.mean)
    }
}

/// Train, checkpoint-selection and evaluation subject indices of one fold.
struct FoldSpec {
    index: usize,
    seed: u64,
    train: Vec<usize>,
    select: Vec<usize>,
    eval: Vec<usize>,
}

fn labels_of(subjects: &[SubjectRecord], rows: &[usize]) -> Vec<Label> {
    rows.iter()
        .map(|&i| subjects[i].label.expect("labels validated"))
        .collect()
}

fn fit_preprocess(
    subjects: &[SubjectRecord],
    rows: &[usize],
    features: &FeatureConfig,
    fold: usize,
    observer: &dyn AccessObserver,
) -> Result<[Preprocess; 3], ExperimentError> {
    observer.on_fit(fold, FitStage::Preprocess, rows);
    let disfluency: Vec<&[f64]> = rows
        .iter()
        .map(|&i| subjects[i].disfluency_raw.as_slice())
        .collect();
    let minmax = fit_minmax(&disfluency)?;
    let acoustic: Vec<&[f64]> = rows
        .iter()
        .map(|&i| subjects[i].acoustic_raw.as_slice())
        .collect();
    let zscore = fit_zscore(&acoustic)?;
    let standardized = acoustic
        .iter()
        .map(|r| zscore.apply(r))
        .collect::<Result<Vec<_>, _>>()?;
    let pca = fit_pca(&standardized, features.pca_components)?;
    Ok([
        Preprocess::Disfluency(minmax),
        Preprocess::Acoustic { zscore, pca },
        Preprocess::Interventions {
            seq_len: features.sequence_len,
        },
    ])
}

fn classification_set(
    subjects: &[SubjectRecord],
    rows: &[usize],
    preprocess: &Preprocess,
) -> Result<ClassificationSet, ExperimentError> {
    Ok(ClassificationSet {
        inputs: rows
            .iter()
            .map(|&i| model_input(preprocess, &subjects[i]))
            .collect::<Result<_, _>>()?,
        labels: labels_of(subjects, rows),
    })
}

fn train_classifiers(
    subjects: &[SubjectRecord],
    train: &[usize],
    select: &[usize],
    cfg: &ExperimentConfig,
    fold: usize,
    seed: u64,
    observer: &dyn AccessObserver,
) -> Result<(Vec<ModelCheckpoint>, Vec<HistoryRecord>), ExperimentError> {
    let preprocess = fit_preprocess(subjects, train, &cfg.features, fold, observer)?;
    let arch = cfg.effective_arch();
    let train_cfg = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let mut checkpoints = Vec::with_capacity(3);
    let mut histories = Vec::with_capacity(3);
    for (kind, pre) in ModelKind::ALL.into_iter().zip(preprocess) {
        observer.on_fit(fold, FitStage::Classifier, train);
        let train_set = classification_set(subjects, train, &pre)?;
        let select_set = classification_set(subjects, select, &pre)?;
        let net = build_classifier(kind, &arch, seed);
        let (ckpt, history) = train_classifier(net, &train_set, &select_set, &train_cfg)?;
        checkpoints.push(ckpt.with_preprocess(pre));
        histories.push(HistoryRecord {
            fold,
            kind,
            history,
        });
    }
    Ok((checkpoints, histories))
}

fn regression_set(
    subjects: &[SubjectRecord],
    rows: &[usize],
    preprocess: &Preprocess,
) -> Result<RegressionSet, ExperimentError> {
    let mut set = RegressionSet::default();
    for &i in rows {
        if let Some(m) = subjects[i].mmse {
            set.inputs.push(model_input(preprocess, &subjects[i])?);
            set.targets.push(m);
        }
    }
    Ok(set)
}

type TrainedModels = (Vec<ModelCheckpoint>, Vec<HistoryRecord>);

/// Transfers each classifier body to an MMSE regressor. Returns `None` when
/// either split has no MMSE scores.
fn train_regressors(
    subjects: &[SubjectRecord],
    classifiers: &[ModelCheckpoint],
    train: &[usize],
    select: &[usize],
    fold: usize,
    observer: &dyn AccessObserver,
) -> Result<Option<TrainedModels>, ExperimentError> {
    let mut checkpoints = Vec::with_capacity(3);
    let mut histories = Vec::with_capacity(3);
    for clf in classifiers {
        let train_set = regression_set(subjects, train, &clf.preprocess)?;
        let select_set = regression_set(subjects, select, &clf.preprocess)?;
        if train_set.is_empty() || select_set.is_empty() {
            return Ok(None);
        }
        observer.on_fit(fold, FitStage::Regressor, train);
        let (ckpt, history) = train_regressor(
            clf.to_regressor()?,
            &train_set,
            &select_set,
            &clf.train_config,
        )?;
        histories.push(HistoryRecord {
            fold,
            kind: clf.network.kind,
            history,
        });
        checkpoints.push(ckpt.with_preprocess(clf.preprocess.clone()));
    }
    Ok(Some((checkpoints, histories)))
}

/// Stacking: an inner stratified split of the training rows yields
/// out-of-fold probability rows, on which the voter is fitted.
fn train_voter(
    subjects: &[SubjectRecord],
    train: &[usize],
    cfg: &ExperimentConfig,
    fold: usize,
    seed: u64,
    observer: &dyn AccessObserver,
) -> Result<LrVoter, ExperimentError> {
    let labels = labels_of(subjects, train);
    let inner_seed = derive_seed(seed, INNER_TAG);
    let plan = make_stratified_folds(&labels, cfg.inner_folds, inner_seed)?;
    let mut rows = Vec::with_capacity(train.len());
    let mut row_labels = Vec::with_capacity(train.len());
    for (j, inner) in plan.folds.iter().enumerate() {
        let inner_train: Vec<usize> = inner.train.iter().map(|&i| train[i]).collect();
        let inner_val: Vec<usize> = inner.val.iter().map(|&i| train[i]).collect();
        let (classifiers, _) = train_classifiers(
            subjects,
            &inner_train,
            &inner_val,
            cfg,
            fold,
            derive_seed(inner_seed, j as u64),
            observer,
        )?;
        let set = ModelSet {
            classifiers,
            regressors: None,
            voter: None,
        };
        for &i in &inner_val {
            rows.push(probability_row(&set.probabilities(&subjects[i])?));
            row_labels.push(subjects[i].label.expect("labels validated"));
        }
    }
    observer.on_fit(fold, FitStage::Voter, train);
    Ok(train_lr_voter(&rows, &row_labels)?)
}

fn train_model_set(
    subjects: &[SubjectRecord],
    train: &[usize],
    select: &[usize],
    cfg: &ExperimentConfig,
    fold: usize,
    seed: u64,
    observer: &dyn AccessObserver,
) -> Result<(ModelSet, Vec<HistoryRecord>), ExperimentError> {
    let (classifiers, mut histories) =
        train_classifiers(subjects, train, select, cfg, fold, seed, observer)?;
    let regressors = if cfg.task.regress() {
        train_regressors(subjects, &classifiers, train, select, fold, observer)?.map(|(r, h)| {
            histories.extend(h);
            r
        })
    } else {
        None
    };
    let voter = if cfg.task.classify() && cfg.ensemble.includes(EnsembleSelection::Learnt) {
        Some(train_voter(subjects, train, cfg, fold, seed, observer)?)
    } else {
        None
    };
    Ok((
        ModelSet {
            classifiers,
            regressors,
            voter,
        },
        histories,
    ))
}

fn run_fold(
    subjects: &[SubjectRecord],
    spec: &FoldSpec,
    cfg: &ExperimentConfig,
    observer: &dyn AccessObserver,
) -> Result<FoldOutcome, ExperimentError> {
    let (set, histories) = train_model_set(
        subjects,
        &spec.train,
        &spec.select,
        cfg,
        spec.index,
        spec.seed,
        observer,
    )?;
    let predict = |rows: &[usize]| -> Result<Vec<SubjectPrediction>, ExperimentError> {
        rows.iter().map(|&i| set.predict(i, &subjects[i])).collect()
    };
    Ok(FoldOutcome {
        index: spec.index,
        train_predictions: predict(&spec.train)?,
        eval_predictions: predict(&spec.eval)?,
        histories,
    })
}

fn validate(
    cfg: &ExperimentConfig,
    train: &[SubjectRecord],
    holdout: Option<&[SubjectRecord]>,
) -> Result<(), ExperimentError> {
    let mismatch = |m: &str| Err(ExperimentError::ProtocolMismatch(m.into()));
    match (cfg.protocol, holdout) {
        (Protocol::Holdout, None) => return mismatch("holdout protocol needs a second manifest"),
        (Protocol::KFold(_) | Protocol::Loso, Some(_)) => {
            return mismatch("a holdout manifest was given but the protocol is not holdout")
        }
        _ => {}
    }
    if train.is_empty() {
        return mismatch("training manifest is empty");
    }
    if train.iter().any(|s| s.label.is_none()) {
        return mismatch("every training subject needs a diagnosis label");
    }
    if cfg.task.regress() && !train.iter().any(|s| s.mmse.is_some()) {
        return mismatch("regression requested but no subject has an MMSE score");
    }
    if let Some(s) = train
        .iter()
        .chain(holdout.unwrap_or_default())
        .find(|s| s.acoustic_raw.len() != cfg.features.acoustic_dim)
    {
        return Err(ExperimentError::ProtocolMismatch(format!(
            "subject {} has {} acoustic features, configuration expects {}",
            s.subject_id,
            s.acoustic_raw.len(),
            cfg.features.acoustic_dim
        )));
    }
    Ok(())
}

fn fold_specs(
    cfg: &ExperimentConfig,
    train: &[SubjectRecord],
    n_holdout: usize,
) -> Result<Vec<FoldSpec>, ExperimentError> {
    let labels: Vec<Label> = train
        .iter()
        .map(|s| s.label.expect("labels validated"))
        .collect();
    let plan: FoldPlan = match cfg.protocol {
        Protocol::KFold(k) => {
            let grouped = cfg.grouped.unwrap_or_else(|| {
                let distinct: std::collections::HashSet<&str> =
                    train.iter().map(|s| s.group_id.as_str()).collect();
                distinct.len() < train.len()
            });
            if grouped {
                let groups: Vec<&str> = train.iter().map(|s| s.group_id.as_str()).collect();
                make_grouped_folds(&groups, &labels, k, cfg.seed)?
            } else {
                make_stratified_folds(&labels, k, cfg.seed)?
            }
        }
        Protocol::Loso => make_loso_folds(train.len())?,
        Protocol::Holdout => {
            let split = holdout_split(
                &labels,
                cfg.selection_folds,
                derive_seed(cfg.seed, HOLDOUT_TAG),
            )?;
            return Ok(vec![FoldSpec {
                index: 0,
                seed: derive_seed(cfg.seed, FOLD_TAG),
                train: split.train,
                select: split.val,
                eval: (train.len()..train.len() + n_holdout).collect(),
            }]);
        }
    };
    Ok(plan
        .folds
        .into_iter()
        .enumerate()
        .map(|(index, f)| FoldSpec {
            index,
            seed: derive_seed(cfg.seed, FOLD_TAG + index as u64),
            train: f.train,
            select: f.val.clone(),
            eval: f.val,
        })
        .collect())
}

/// Runs the configured protocol. Folds run in parallel; results are
/// assembled in fold order, so the report does not depend on `jobs`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    train: &[SubjectRecord],
    holdout: Option<&[SubjectRecord]>,
    observer: &dyn AccessObserver,
) -> Result<ExperimentReport, ExperimentError> {
    use rayon::prelude::*;

    validate(cfg, train, holdout)?;
    let mut subjects = train.to_vec();
    subjects.extend(holdout.unwrap_or_default().iter().cloned());
    let specs = fold_specs(cfg, train, holdout.map_or(0, |h| h.len()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
    let folds = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| run_fold(&subjects, spec, cfg, observer))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let eval_split = if cfg.protocol == Protocol::Holdout {
        Split::Test
    } else {
        Split::Val
    };
    build_report(&subjects, folds, cfg, eval_split)
}

/// Trains one model set on all of `subjects`, selecting checkpoints on a
/// stratified `1/selection_folds` slice.
pub fn train_final_model_set(
    cfg: &ExperimentConfig,
    subjects: &[SubjectRecord],
    observer: &dyn AccessObserver,
) -> Result<ModelSet, ExperimentError> {
    validate(
        &ExperimentConfig {
            protocol: Protocol::KFold(2),
            ..cfg.clone()
        },
        subjects,
        None,
    )?;
    let labels: Vec<Label> = subjects
        .iter()
        .map(|s| s.label.expect("labels validated"))
        .collect();
    let split = holdout_split(
        &labels,
        cfg.selection_folds,
        derive_seed(cfg.seed, HOLDOUT_TAG),
    )?;
    let (set, _) = train_model_set(
        subjects,
        &split.train,
        &split.val,
        cfg,
        0,
        derive_seed(cfg.seed, FOLD_TAG),
        observer,
    )?;
    Ok(set)
}

/// Scores a saved model set on labelled subjects as a single test fold.
pub fn evaluate_model_set(
    set: &ModelSet,
    subjects: &[SubjectRecord],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let eval_predictions = subjects
        .iter()
        .enumerate()
        .map(|(i, s)| set.predict(i, s))
        .collect::<Result<Vec<_>, _>>()?;
    let fold = FoldOutcome {
        index: 0,
        train_predictions: Vec::new(),
        eval_predictions,
        histories: Vec::new(),
    };
    build_report(subjects, vec![fold], cfg, Split::Test)
}

/// Per-model metrics on one list of predictions.
fn split_rows(
    fold: usize,
    split: Split,
    preds: &[SubjectPrediction],
    subjects: &[SubjectRecord],
    cfg: &ExperimentConfig,
) -> Result<Vec<MetricRow>, ExperimentError> {
    if preds.is_empty() {
        return Ok(Vec::new());
    }
    let labelled: Vec<&SubjectPrediction> = preds
        .iter()
        .filter(|p| subjects[p.subject].label.is_some())
        .collect();
    let truth: Vec<Label> = labelled
        .iter()
        .map(|p| subjects[p.subject].label.expect("filtered"))
        .collect();
    let scored: Vec<&SubjectPrediction> = preds
        .iter()
        .filter(|p| p.mmse.is_some() && subjects[p.subject].mmse.is_some())
        .collect();
    let targets: Vec<f64> = scored
        .iter()
        .map(|p| subjects[p.subject].mmse.expect("filtered"))
        .collect();

    let classify = |f: &dyn Fn(&SubjectPrediction) -> Label| -> Result<_, ExperimentError> {
        if !cfg.task.classify() || labelled.is_empty() {
            return Ok(None);
        }
        let predicted: Vec<Label> = labelled.iter().map(|p| f(p)).collect();
        Ok(Some(classification_metrics(
            &ConfusionMatrix::from_predictions(&predicted, &truth)?,
        )?))
    };
    let regress = |f: &dyn Fn(&SubjectPrediction) -> f64| -> Result<_, ExperimentError> {
        if !cfg.task.regress() || scored.is_empty() {
            return Ok(None);
        }
        let predicted: Vec<f64> = scored.iter().map(|p| f(p)).collect();
        Ok(Some(regression_metrics(&predicted, &targets)?))
    };

    let mut rows = Vec::new();
    let mut push = |model: &'static str,
                    classification: Option<ClassificationMetrics>,
                    regression: Option<RegressionMetrics>| {
        if classification.is_some() || regression.is_some() {
            rows.push(MetricRow {
                fold,
                model,
                split,
                n: preds.len(),
                metrics: FoldMetrics {
                    fold,
                    classification,
                    regression,
                },
            });
        }
    };
    for (m, kind) in ModelKind::ALL.iter().enumerate() {
        push(
            kind.name(),
            classify(&|p| p.members[m].label())?,
            regress(&|p| p.mmse.expect("filtered")[m])?,
        );
    }
    if cfg.ensemble.includes(EnsembleSelection::Hard) {
        push(HARD_ENSEMBLE, classify(&|p| p.hard)?, None);
    }
    if cfg.ensemble.includes(EnsembleSelection::Soft) {
        push(SOFT_ENSEMBLE, classify(&|p| p.soft.label())?, None);
    }
    if preds.iter().all(|p| p.learnt_label.is_some()) {
        push(
            LEARNT_ENSEMBLE,
            classify(&|p| p.learnt_label.expect("checked"))?,
            None,
        );
    }
    push(
        AVERAGE_ENSEMBLE,
        None,
        regress(&|p| p.mmse_average.expect("filtered"))?,
    );
    Ok(rows)
}

fn build_report(
    subjects: &[SubjectRecord],
    folds: Vec<FoldOutcome>,
    cfg: &ExperimentConfig,
    eval_split: Split,
) -> Result<ExperimentReport, ExperimentError> {
    let mut rows = Vec::new();
    for fold in &folds {
        rows.extend(split_rows(
            fold.index,
            Split::Train,
            &fold.train_predictions,
            subjects,
            cfg,
        )?);
        rows.extend(split_rows(
            fold.index,
            eval_split,
            &fold.eval_predictions,
            subjects,
            cfg,
        )?);
    }

    let mut keys: Vec<(&'static str, Split)> = Vec::new();
    for r in &rows {
        if !keys.contains(&(r.model, r.split)) {
            keys.push((r.model, r.split));
        }
    }
    let summaries = keys
        .iter()
        .flat_map(|&(model, split)| {
            let per_fold: Vec<FoldMetrics> = rows
                .iter()
                .filter(|r| r.model == model && r.split == split)
                .map(|r| r.metrics.clone())
                .collect();
            aggregate_report(&per_fold)
                .summary
                .into_iter()
                .map(move |summary| SummaryRow {
                    model,
                    split,
                    summary,
                })
        })
        .collect();

    let pooled: Vec<&SubjectPrediction> = folds
        .iter()
        .flat_map(|f| &f.eval_predictions)
        .filter(|p| subjects[p.subject].label.is_some())
        .collect();
    let truth: Vec<Label> = pooled
        .iter()
        .map(|p| subjects[p.subject].label.expect("filtered"))
        .collect();
    let mut roc = Vec::new();
    let mut confusion = Vec::new();
    if cfg.task.classify() && !pooled.is_empty() {
        let mut scored: Vec<(&'static str, Vec<f64>, Vec<Label>)> = Vec::new();
        for (m, kind) in ModelKind::ALL.iter().enumerate() {
            scored.push((
                kind.name(),
                pooled.iter().map(|p| p.members[m].ad()).collect(),
                pooled.iter().map(|p| p.members[m].label()).collect(),
            ));
        }
        if cfg.ensemble.includes(EnsembleSelection::Hard) {
            let labels = pooled.iter().map(|p| p.hard).collect();
            scored.push((HARD_ENSEMBLE, Vec::new(), labels));
        }
        if cfg.ensemble.includes(EnsembleSelection::Soft) {
            scored.push((
                SOFT_ENSEMBLE,
                pooled.iter().map(|p| p.soft.ad()).collect(),
                pooled.iter().map(|p| p.soft.label()).collect(),
            ));
        }
        if pooled.iter().all(|p| p.learnt.is_some()) {
            scored.push((
                LEARNT_ENSEMBLE,
                pooled
                    .iter()
                    .map(|p| p.learnt.expect("checked").ad())
                    .collect(),
                pooled
                    .iter()
                    .map(|p| p.learnt_label.expect("checked"))
                    .collect(),
            ));
        }
        let both_classes = truth.contains(&Label::Ad) && truth.contains(&Label::Cn);
        for (model, scores, predicted) in scored {
            confusion.push((
                model,
                ConfusionMatrix::from_predictions(&predicted, &truth)?,
            ));
            if both_classes && !scores.is_empty() {
                roc.push((model, roc_curve(&scores, &truth)?));
            }
        }
    }

    Ok(ExperimentReport {
        subject_ids: subjects.iter().map(|s| s.subject_id.clone()).collect(),
        rows,
        summaries,
        roc,
        confusion,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_parsing() {
        assert_eq!("kfold:5".parse::<Protocol>().unwrap(), Protocol::KFold(5));
        assert_eq!("kfold".parse::<Protocol>().unwrap(), Protocol::KFold(5));
        assert_eq!("loso".parse::<Protocol>().unwrap(), Protocol::Loso);
        assert_eq!("holdout".parse::<Protocol>().unwrap(), Protocol::Holdout);
        assert!("kfold:x".parse::<Protocol>().is_err());
        assert_eq!(Protocol::KFold(10).to_string(), "kfold:10");
    }

    #[test]
    fn selection_parsing() {
        assert_eq!(
            "learnt".parse::<EnsembleSelection>().unwrap(),
            EnsembleSelection::Learnt
        );
        assert!(EnsembleSelection::All.includes(EnsembleSelection::Hard));
        assert!(!EnsembleSelection::Soft.includes(EnsembleSelection::Hard));
        assert!(TaskSelection::Both.classify() && TaskSelection::Both.regress());
        assert!(!"nope".parse::<TaskSelection>().is_ok());
    }
}
