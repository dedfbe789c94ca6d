use serde::{Deserialize, Serialize};

use super::{EvalError, RocCurve};
use crate::models::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn from_predictions(predicted: &[Label], truth: &[Label]) -> Result<Self, EvalError> {
        if predicted.len() != truth.len() {
            return Err(EvalError::LengthMismatch {
                preds: predicted.len(),
                targets: truth.len(),
            });
        }
        let mut cm = Self::default();
        for (p, t) in predicted.iter().zip(truth) {
            match (p.is_ad(), t.is_ad()) {
                (true, true) => cm.tp += 1,
                (true, false) => cm.fp += 1,
                (false, true) => cm.fn_ += 1,
                (false, false) => cm.tn += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts with non-AD taken as the positive class.
    pub fn swapped(&self) -> Self {
        Self::new(self.tn, self.fn_, self.fp, self.tp)
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::new(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn_ + other.fn_,
            self.tn + other.tn,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Set when a zero denominator forced a metric to 0.
    pub undefined: bool,
}

/// `(precision, recall, f1, any zero denominator)` for the positive class.
fn prf(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64, bool) {
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            (0.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (p, p_undef) = ratio(tp, tp + fp);
    let (r, r_undef) = ratio(tp, tp + fn_);
    let (f1, f_undef) = if p + r == 0.0 {
        (0.0, true)
    } else {
        (2.0 * p * r / (p + r), false)
    };
    (p, r, f1, p_undef || r_undef || f_undef)
}

pub fn classification_metrics(cm: &ConfusionMatrix) -> Result<ClassificationMetrics, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let (precision, recall, f1, undef_pos) = prf(cm.tp, cm.fp, cm.fn_);
    let (np, nr, nf, undef_neg) = prf(cm.tn, cm.fn_, cm.fp);
    Ok(ClassificationMetrics {
        accuracy: (cm.tp + cm.tn) as f64 / cm.total() as f64,
        precision,
        recall,
        f1,
        macro_precision: (precision + np) / 2.0,
        macro_recall: (recall + nr) / 2.0,
        macro_f1: (f1 + nf) / 2.0,
        undefined: undef_pos || undef_neg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub rmse: f64,
    pub mae: f64,
}

pub fn regression_metrics(preds: &[f64], targets: &[f64]) -> Result<RegressionMetrics, EvalError> {
    if preds.len() != targets.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            targets: targets.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = preds.len() as f64;
    let (sq, abs) = preds
        .iter()
        .zip(targets)
        .fold((0.0, 0.0), |(sq, abs), (p, t)| {
            (sq + (p - t) * (p - t), abs + (p - t).abs())
        });
    Ok(RegressionMetrics {
        rmse: (sq / n).sqrt(),
        mae: abs / n,
    })
}

/// Metrics of one model on one fold. Either part may be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub classification: Option<ClassificationMetrics>,
    pub regression: Option<RegressionMetrics>,
}

impl FoldMetrics {
    pub const NAMES: [&'static str; 6] = ["accuracy", "precision", "recall", "f1", "rmse", "mae"];

    /// Present metrics as `(name, value)` in [`FoldMetrics::NAMES`] order.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(c) = &self.classification {
            out.extend([
                ("accuracy", c.accuracy),
                ("precision", c.precision),
                ("recall", c.recall),
                ("f1", c.f1),
            ]);
        }
        if let Some(r) = &self.regression {
            out.extend([("rmse", r.rmse), ("mae", r.mae)]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: &'static str,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub per_fold: Vec<FoldMetrics>,
    pub summary: Vec<MetricSummary>,
    /// Pooled over the validation splits of all folds, when computed.
    pub roc: Option<RocCurve>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Summarizes every metric present in all folds.
pub fn aggregate_report(per_fold: &[FoldMetrics]) -> MetricsReport {
    let summary = FoldMetrics::NAMES
        .iter()
        .filter_map(|&name| {
            let values: Option<Vec<f64>> = per_fold
                .iter()
                .map(|f| {
                    f.values()
                        .into_iter()
                        .find(|(n, _)| *n == name)
                        .map(|(_, v)| v)
                })
                .collect();
            let values = values.filter(|v| !v.is_empty())?;
            let (mean, std) = mean_std(&values);
            Some(MetricSummary { name, mean, std })
        })
        .collect();
    MetricsReport {
        per_fold: per_fold.to_vec(),
        summary,
        roc: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_degenerate() {
        let m = classification_metrics(&ConfusionMatrix::new(24, 0, 0, 24)).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert!(!m.undefined);

        let m = classification_metrics(&ConfusionMatrix::new(0, 0, 24, 24)).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (0.5, 0.0, 0.0, 0.0)
        );
        assert!(m.undefined);

        assert_eq!(
            classification_metrics(&ConfusionMatrix::default()),
            Err(EvalError::EmptyMatrix)
        );
    }

    #[test]
    fn regression_examples() {
        assert_eq!(
            regression_metrics(&[20.0, 25.0], &[22.0, 23.0]).unwrap(),
            RegressionMetrics {
                rmse: 2.0,
                mae: 2.0
            }
        );
        assert_eq!(
            regression_metrics(&[3.0, 4.0], &[3.0, 4.0]).unwrap(),
            RegressionMetrics {
                rmse: 0.0,
                mae: 0.0
            }
        );
        assert!(matches!(
            regression_metrics(&[1.0], &[]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            regression_metrics(&[], &[]),
            Err(EvalError::EmptyInput)
        ));
    }

    #[test]
    fn aggregation() {
        let fold = |i, acc| FoldMetrics {
            fold: i,
            classification: Some(ClassificationMetrics {
                accuracy: acc,
                precision: acc,
                recall: acc,
                f1: acc,
                macro_precision: acc,
                macro_recall: acc,
                macro_f1: acc,
                undefined: false,
            }),
            regression: None,
        };
        let report = aggregate_report(&[fold(0, 0.8), fold(1, 1.0)]);
        let acc = report
            .summary
            .iter()
            .find(|s| s.name == "accuracy")
            .unwrap();
        assert!((acc.mean - 0.9).abs() < 1e-15 && (acc.std - 0.1).abs() < 1e-15);
        assert!(report.summary.iter().all(|s| s.name != "rmse"));

        let single = aggregate_report(&[fold(0, 0.7)]);
        assert_eq!(single.summary[0].std, 0.0);
    }

    #[test]
    fn from_predictions_counts() {
        use Label::*;
        let cm = ConfusionMatrix::from_predictions(&[Ad, Ad, Cn, Cn, Ad], &[Ad, Cn, Ad, Cn, Ad])
            .unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 1, 1, 1));
    }
}
