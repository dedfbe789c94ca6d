use std::fs;
use std::path::{Path, PathBuf};

use super::{
    io_err, render_plots, ReportError, CONFUSION_FILE, HISTORY_DIR, METRICS_FILE, PREDICTIONS_FILE,
    ROC_FILE, SUMMARY_FILE,
};
use crate::eval::{ConfusionMatrix, FoldMetrics, RocPoint};
use crate::models::Task;
use crate::pipeline::{ExperimentReport, SubjectPrediction};

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ReportError + '_ {
    move |e| ReportError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Shortest representation that parses back to the same value.
fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), ReportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn metric_cells(m: &FoldMetrics) -> Vec<String> {
    let c = m.classification.as_ref();
    let r = m.regression.as_ref();
    vec![
        opt(c.map(|c| c.accuracy)),
        opt(c.map(|c| c.precision)),
        opt(c.map(|c| c.recall)),
        opt(c.map(|c| c.f1)),
        opt(r.map(|r| r.rmse)),
        opt(r.map(|r| r.mae)),
    ]
}

fn prediction_cells(
    fold: usize,
    split: &str,
    p: &SubjectPrediction,
    report: &ExperimentReport,
) -> Vec<String> {
    let mut row = vec![
        fold.to_string(),
        split.to_string(),
        report.subject_ids[p.subject].clone(),
    ];
    row.extend(p.members.iter().map(|m| num(m.ad())));
    row.push(p.hard.code().to_string());
    row.push(num(p.soft.ad()));
    row.push(opt(p.learnt.map(|l| l.ad())));
    for m in 0..3 {
        row.push(opt(p.mmse.map(|s| s[m])));
    }
    row.push(opt(p.mmse_average));
    row
}

/// Writes every CSV, the per-model training histories and the SVG plots.
/// Returns the paths written.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let path = dir.join(METRICS_FILE);
    write_rows(
        &path,
        &[
            "fold",
            "model",
            "split",
            "n",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "rmse",
            "mae",
        ],
        report.rows.iter().map(|r| {
            let mut row = vec![
                r.fold.to_string(),
                r.model.to_string(),
                r.split.name().to_string(),
                r.n.to_string(),
            ];
            row.extend(metric_cells(&r.metrics));
            row
        }),
    )?;
    written.push(path);

    let path = dir.join(SUMMARY_FILE);
    write_rows(
        &path,
        &["model", "split", "metric", "mean", "std"],
        report.summaries.iter().map(|s| {
            vec![
                s.model.to_string(),
                s.split.name().to_string(),
                s.summary.name.to_string(),
                num(s.summary.mean),
                num(s.summary.std),
            ]
        }),
    )?;
    written.push(path);

    let path = dir.join(ROC_FILE);
    write_rows(
        &path,
        &["model", "fpr", "tpr", "threshold"],
        report.roc.iter().flat_map(|(model, curve)| {
            curve
                .points
                .iter()
                .map(move |p| vec![model.to_string(), num(p.fpr), num(p.tpr), num(p.threshold)])
        }),
    )?;
    written.push(path);

    let path = dir.join(CONFUSION_FILE);
    write_rows(
        &path,
        &["model", "tp", "fp", "fn", "tn"],
        report.confusion.iter().map(|(model, cm)| {
            vec![
                model.to_string(),
                cm.tp.to_string(),
                cm.fp.to_string(),
                cm.fn_.to_string(),
                cm.tn.to_string(),
            ]
        }),
    )?;
    written.push(path);

    let path = dir.join(PREDICTIONS_FILE);
    let eval_split = report
        .rows
        .iter()
        .map(|r| r.split)
        .find(|s| s.name() != "train")
        .map_or("val", |s| s.name());
    write_rows(
        &path,
        &[
            "fold",
            "split",
            "subject_id",
            "p_disfluency",
            "p_acoustic",
            "p_interventions",
            "hard",
            "p_soft",
            "p_learnt",
            "mmse_disfluency",
            "mmse_acoustic",
            "mmse_interventions",
            "mmse_average",
        ],
        report.folds.iter().flat_map(|f| {
            f.eval_predictions
                .iter()
                .map(move |p| prediction_cells(f.index, eval_split, p, report))
        }),
    )?;
    written.push(path);

    let hist_dir = dir.join(HISTORY_DIR);
    if report.folds.iter().any(|f| !f.histories.is_empty()) {
        fs::create_dir_all(&hist_dir).map_err(io_err(&hist_dir))?;
    }
    for fold in &report.folds {
        for h in &fold.histories {
            let task = match h.history.task {
                Task::Classification => "classification",
                Task::Regression => "regression",
            };
            let path = hist_dir.join(format!("fold{}_{}_{}.csv", h.fold, h.kind.name(), task));
            write_rows(
                &path,
                &[
                    "epoch",
                    "train_loss",
                    "val_loss",
                    "train_metric",
                    "val_metric",
                ],
                h.history.records.iter().map(|r| {
                    vec![
                        r.epoch.to_string(),
                        num(r.train_loss),
                        num(r.val_loss),
                        num(r.train_metric),
                        num(r.val_metric),
                    ]
                }),
            )?;
            written.push(path);
        }
    }

    written.extend(render_plots(dir)?);
    Ok(written)
}

fn parse<T: std::str::FromStr>(path: &Path, cell: &str) -> Result<T, ReportError> {
    cell.parse().map_err(|_| ReportError::Csv {
        path: path.to_path_buf(),
        message: format!("cannot parse {cell:?}"),
    })
}

/// Curves in file order, grouped by consecutive model name.
pub fn read_roc_csv(path: &Path) -> Result<Vec<(String, Vec<RocPoint>)>, ReportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut curves: Vec<(String, Vec<RocPoint>)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let point = RocPoint {
            fpr: parse(path, &rec[1])?,
            tpr: parse(path, &rec[2])?,
            threshold: parse(path, &rec[3])?,
        };
        match curves.last_mut() {
            Some((model, pts)) if model == &rec[0] => pts.push(point),
            _ => curves.push((rec[0].to_string(), vec![point])),
        }
    }
    Ok(curves)
}

pub fn read_confusion_csv(path: &Path) -> Result<Vec<(String, ConfusionMatrix)>, ReportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let cm = ConfusionMatrix::new(
            parse(path, &rec[1])?,
            parse(path, &rec[2])?,
            parse(path, &rec[3])?,
            parse(path, &rec[4])?,
        );
        out.push((rec[0].to_string(), cm));
    }
    Ok(out)
}
