//! CSV and SVG artifacts for an experiment.
//!
//! SVGs are rendered only from data that is also written to CSV, so
//! [`render_plots`] on a results directory reproduces them byte for byte.

mod svg;
mod tables;

pub use svg::{render_confusion_svg, render_roc_svg};
pub use tables::{read_confusion_csv, read_roc_csv, write_report};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const ROC_FILE: &str = "roc.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const HISTORY_DIR: &str = "history";
pub const PLOTS_DIR: &str = "plots";

/// Re-renders every SVG under `dir/plots` from `roc.csv` and
/// `confusion.csv`. Returns the files written.
pub fn render_plots(dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let plots = dir.join(PLOTS_DIR);
    std::fs::create_dir_all(&plots).map_err(io_err(&plots))?;
    let mut written = Vec::new();

    let roc_path = dir.join(ROC_FILE);
    if roc_path.is_file() {
        let curves = read_roc_csv(&roc_path)?;
        if !curves.is_empty() {
            let out = plots.join("roc.svg");
            std::fs::write(&out, render_roc_svg(&curves)).map_err(io_err(&out))?;
            written.push(out);
        }
    }
    let cm_path = dir.join(CONFUSION_FILE);
    if cm_path.is_file() {
        for (model, cm) in read_confusion_csv(&cm_path)? {
            let out = plots.join(format!("confusion_{model}.svg"));
            std::fs::write(&out, render_confusion_svg(&model, &cm)).map_err(io_err(&out))?;
            written.push(out);
        }
    }
    Ok(written)
}
