use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::features::Label;

/// Binary confusion counts, positive class = obstacle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        let mut cm = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p);
        }
        cm
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Negative, Label::Positive) => self.fp += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
            (Label::Positive, Label::Negative) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::new(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn_ + other.fn_,
        )
    }
}

fn ratio(num: u64, den: u64, what: &'static str) -> Result<f64, EvalError> {
    if den == 0 {
        Err(EvalError::Undefined(what))
    } else {
        Ok(num as f64 / den as f64)
    }
}

/// `TP / (TP + FP)`.
pub fn precision(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    ratio(cm.tp, cm.tp + cm.fp, "precision")
}

/// `TP / (TP + FN)`.
pub fn recall(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    ratio(cm.tp, cm.tp + cm.fn_, "recall")
}

/// Harmonic mean of precision and recall.
pub fn f_measure(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let p = precision(cm)?;
    let r = recall(cm)?;
    if p + r == 0.0 {
        return Err(EvalError::Undefined("f-measure"));
    }
    Ok(2.0 * p * r / (p + r))
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    ratio(cm.tp + cm.tn, cm.total(), "accuracy")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (divisor `k - 1`); 0 for a single value.
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(MeanStd { mean, std })
}

/// Per-fold metric statistics. A metric that is undefined on any fold is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub precision: Option<MeanStd>,
    pub recall: Option<MeanStd>,
    pub f_measure: Option<MeanStd>,
    pub accuracy: Option<MeanStd>,
}

pub fn summarize(folds: &[ConfusionMatrix]) -> MetricSummary {
    let stat = |f: fn(&ConfusionMatrix) -> Result<f64, EvalError>| {
        folds
            .iter()
            .map(f)
            .collect::<Result<Vec<_>, _>>()
            .ok()
            .and_then(|v| mean_std(&v))
    };
    MetricSummary {
        precision: stat(precision),
        recall: stat(recall),
        f_measure: stat(f_measure),
        accuracy: stat(accuracy),
    }
}

impl MetricSummary {
    /// One line per metric, in percent with two decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, m) in [
            ("precision", self.precision),
            ("recall", self.recall),
            ("f_measure", self.f_measure),
            ("accuracy", self.accuracy),
        ] {
            match m {
                Some(ms) => out.push_str(&format!(
                    "{name:<10} {:.2} ± {:.2} %\n",
                    100.0 * ms.mean,
                    100.0 * ms.std
                )),
                None => out.push_str(&format!("{name:<10} undefined\n")),
            }
        }
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfusionRow {
    fold: usize,
    tp: u64,
    fp: u64,
    tn: u64,
    #[serde(rename = "fn")]
    fn_: u64,
}

/// Reads `fold,tp,fp,tn,fn` rows.
pub fn read_confusion_csv<R: Read>(reader: R) -> Result<Vec<ConfusionMatrix>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: ConfusionRow = row?;
        out.push(ConfusionMatrix::new(row.tp, row.fp, row.tn, row.fn_));
    }
    if out.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(out)
}

pub fn write_confusion_csv<W: Write>(writer: W, folds: &[ConfusionMatrix]) -> Result<(), EvalError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (i, cm) in folds.iter().enumerate() {
        wtr.serialize(ConfusionRow {
            fold: i + 1,
            tp: cm.tp,
            fp: cm.fp,
            tn: cm.tn,
            fn_: cm.fn_,
        })?;
    }
    wtr.flush()?;
    Ok(())
}
