//! Confusion-matrix metrics: accuracy, per-class precision/recall/F1 and
//! unweighted macro averages, all in percent.

use crate::data::Label;
use crate::error::{Error, Result};

/// 2x2 confusion counts indexed `[actual][predicted]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        ConfusionMatrix { counts }
    }

    /// Tallies predictions against ground truth.
    pub fn from_labels(preds: &[Label], truth: &[Label]) -> Result<Self> {
        if preds.len() != truth.len() {
            return Err(Error::validation(format!(
                "prediction count {} does not match truth count {}",
                preds.len(),
                truth.len()
            )));
        }
        if preds.is_empty() {
            return Err(Error::validation("cannot tally an empty label list"));
        }
        let mut counts = [[0u64; 2]; 2];
        for (p, t) in preds.iter().zip(truth) {
            counts[t.class_index()][p.class_index()] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn counts(&self) -> &[[u64; 2]; 2] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        self.counts[0][0] + self.counts[1][1]
    }
}

/// Precision/recall/F1 of one class, in percent; `None` marks a value whose
/// defining ratio had a zero denominator.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Full evaluation summary in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub genuine: ClassMetrics,
    pub posed: ClassMetrics,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
    pub macro_f1: Option<f64>,
}

/// Harmonic mean of a precision/recall pair given in percent.
pub fn f1_percent(precision: f64, recall: f64) -> Option<f64> {
    if precision + recall == 0.0 {
        None
    } else {
        Some(2.0 * precision * recall / (precision + recall))
    }
}

fn ratio_percent(numerator: u64, denominator: u64) -> Option<f64> {
    if denominator == 0 {
        None
    } else {
        Some(100.0 * numerator as f64 / denominator as f64)
    }
}

/// Unweighted mean over the classes where the metric is defined.
fn macro_mean(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    }
}

/// Derives the evaluation report from confusion counts. Undefined ratios
/// become `None` and are excluded from the macro means rather than skewing
/// them as zeros.
pub fn report(cm: &ConfusionMatrix) -> Result<EvalReport> {
    if cm.total() == 0 {
        return Err(Error::validation("confusion matrix is empty"));
    }
    let c = cm.counts();
    let mut per_class = [ClassMetrics::default(); 2];
    for class in 0..2 {
        let other = 1 - class;
        let tp = c[class][class];
        let fp = c[other][class];
        let fn_ = c[class][other];
        let precision = ratio_percent(tp, tp + fp);
        let recall = ratio_percent(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) => f1_percent(p, r),
            _ => None,
        };
        per_class[class] = ClassMetrics {
            precision,
            recall,
            f1,
        };
    }
    Ok(EvalReport {
        accuracy: 100.0 * cm.correct() as f64 / cm.total() as f64,
        genuine: per_class[0],
        posed: per_class[1],
        macro_precision: macro_mean(per_class[0].precision, per_class[1].precision),
        macro_recall: macro_mean(per_class[0].recall, per_class[1].recall),
        macro_f1: macro_mean(per_class[0].f1, per_class[1].f1),
    })
}

fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "n/a".to_string(),
    }
}

impl EvalReport {
    /// Aligned text table: per-class columns plus their unweighted average.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>8} {:>8} {:>8}\n",
            "Metric", "Genuine", "Posed", "Average"
        ));
        let rows: [(&str, [Option<f64>; 3]); 3] = [
            (
                "Precision",
                [
                    self.genuine.precision,
                    self.posed.precision,
                    self.macro_precision,
                ],
            ),
            (
                "Recall",
                [self.genuine.recall, self.posed.recall, self.macro_recall],
            ),
            ("F1 score", [self.genuine.f1, self.posed.f1, self.macro_f1]),
        ];
        for (name, values) in rows {
            out.push_str(&format!(
                "{:<10} {:>8} {:>8} {:>8}\n",
                name,
                cell(values[0]),
                cell(values[1]),
                cell(values[2])
            ));
        }
        out.push_str(&format!("Accuracy: {:.2} %\n", self.accuracy));
        out
    }

    pub fn csv_header() -> &'static str {
        "accuracy,genuine_precision,genuine_recall,genuine_f1,\
         posed_precision,posed_recall,posed_f1,\
         macro_precision,macro_recall,macro_f1"
    }

    /// Machine-readable row matching [`EvalReport::csv_header`], full
    /// precision, `n/a` for undefined entries.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| match v {
            Some(v) => v.to_string(),
            None => "n/a".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.accuracy,
            opt(self.genuine.precision),
            opt(self.genuine.recall),
            opt(self.genuine.f1),
            opt(self.posed.precision),
            opt(self.posed.recall),
            opt(self.posed.f1),
            opt(self.macro_precision),
            opt(self.macro_recall),
            opt(self.macro_f1),
        )
    }
}
