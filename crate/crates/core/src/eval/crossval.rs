use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::kfold::{kfold_split, Folding};
use super::metrics::{accuracy, f_measure, precision, recall, summarize, ConfusionMatrix, MetricSummary};
use super::timing::StageTimings;
use super::EvalError;
use crate::features::{Dataset, FeatureVector, Label};
use crate::pipeline::{FoldStrategy, PipelineConfig, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    /// 1-based.
    pub fold_index: usize,
    pub confusion: ConfusionMatrix,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossvalReport {
    pub learner: String,
    pub folds: Vec<FoldReport>,
    /// Held-out prediction for every sample, in dataset order.
    pub predictions: Vec<Label>,
    pub summary: MetricSummary,
}

impl CrossvalReport {
    pub fn confusions(&self) -> Vec<ConfusionMatrix> {
        self.folds.iter().map(|f| f.confusion).collect()
    }

    pub fn pooled(&self) -> ConfusionMatrix {
        self.folds
            .iter()
            .fold(ConfusionMatrix::default(), |acc, f| acc.merge(&f.confusion))
    }

    /// Columns: fold, tp, fp, tn, fn, precision, recall, f_measure, accuracy,
    /// t_op_ms, t_pca_ms, t_svm_ms. Undefined metrics and missing timings are empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EvalError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "fold", "tp", "fp", "tn", "fn", "precision", "recall", "f_measure", "accuracy", "t_op_ms",
            "t_pca_ms", "t_svm_ms",
        ])?;
        let cell = |v: Result<f64, EvalError>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for f in &self.folds {
            let cm = &f.confusion;
            wtr.write_record([
                f.fold_index.to_string(),
                cm.tp.to_string(),
                cm.fp.to_string(),
                cm.tn.to_string(),
                cm.fn_.to_string(),
                cell(precision(cm)),
                cell(recall(cm)),
                cell(f_measure(cm)),
                cell(accuracy(cm)),
                f.timings.t_op.map(|t| format!("{t:.4}")).unwrap_or_default(),
                format!("{:.4}", f.timings.t_pca),
                format!("{:.4}", f.timings.t_svm),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("learner: {}  folds: {}\n", self.learner, self.folds.len());
        out.push_str("fold      tp      fp      tn      fn\n");
        for f in &self.folds {
            let cm = &f.confusion;
            out.push_str(&format!(
                "{:>4} {:>7} {:>7} {:>7} {:>7}\n",
                f.fold_index, cm.tp, cm.fp, cm.tn, cm.fn_
            ));
        }
        out.push_str(&self.summary.to_text());
        let n = self.folds.len().max(1) as f64;
        let t_pca = self.folds.iter().map(|f| f.timings.t_pca).sum::<f64>() / n;
        let t_svm = self.folds.iter().map(|f| f.timings.t_svm).sum::<f64>() / n;
        out.push_str(&format!("t_pca_ms   {t_pca:.4}\nt_svm_ms   {t_svm:.4}\n"));
        out
    }
}

/// Cross-validates `cfg` on `data` with the fold layout from `cfg.crossval`.
pub fn crossval(data: &Dataset, cfg: &PipelineConfig) -> Result<CrossvalReport, EvalError> {
    let k = cfg.crossval.k;
    let folding = match cfg.crossval.strategy {
        FoldStrategy::Contiguous => Folding::Contiguous,
        FoldStrategy::Grouped => Folding::Grouped(&data.recording),
        FoldStrategy::Shuffled => Folding::Shuffled(cfg.seed),
    };
    let folds = kfold_split(data.len(), k, folding)?;
    crossval_folds(data, cfg, &folds)
}

/// Cross-validates over explicit held-out index sets. For each fold the
/// projection and learner are fitted on the remaining samples only.
pub fn crossval_folds(
    data: &Dataset,
    cfg: &PipelineConfig,
    folds: &[Vec<usize>],
) -> Result<CrossvalReport, EvalError> {
    if data.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut held_out = vec![usize::MAX; data.len()];
    for (f, idx) in folds.iter().enumerate() {
        for &i in idx {
            if i >= data.len() || held_out[i] != usize::MAX {
                return Err(EvalError::NotAPartition);
            }
            held_out[i] = f;
        }
    }
    if held_out.contains(&usize::MAX) {
        return Err(EvalError::NotAPartition);
    }

    let mut predictions = vec![Label::Negative; data.len()];
    let mut reports = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..data.len()).filter(|&i| held_out[i] != f).collect();
        let features: Vec<&FeatureVector<f64>> =
            train.iter().map(|&i| &data.samples[i].features).collect();
        let labels: Vec<Label> = train.iter().map(|&i| data.samples[i].label).collect();
        let distances: Vec<Option<f64>> = train.iter().map(|&i| data.samples[i].distance_cm).collect();
        let fold_err = |source| EvalError::Fold {
            fold: f + 1,
            source: Box::new(source),
        };
        let model = TrainedModel::fit(&features, &labels, &distances, cfg).map_err(fold_err)?;

        let mut cm = ConfusionMatrix::default();
        let (mut t_pca, mut t_svm) = (0.0, 0.0);
        for &i in test {
            let sample = &data.samples[i];
            let t0 = Instant::now();
            let z = model.transform(&sample.features).map_err(fold_err)?;
            let t1 = Instant::now();
            let pred = model.classify_projected(&z).map_err(fold_err)?;
            let t2 = Instant::now();
            t_pca += (t1 - t0).as_secs_f64();
            t_svm += (t2 - t1).as_secs_f64();
            cm.record(sample.label, pred);
            predictions[i] = pred;
        }
        let per = 1000.0 / test.len().max(1) as f64;
        reports.push(FoldReport {
            fold_index: f + 1,
            confusion: cm,
            timings: StageTimings {
                t_op: None,
                t_pca: t_pca * per,
                t_svm: t_svm * per,
            },
        });
    }
    let summary = summarize(&reports.iter().map(|r| r.confusion).collect::<Vec<_>>());
    Ok(CrossvalReport {
        learner: cfg.learner.name().to_string(),
        folds: reports,
        predictions,
        summary,
    })
}
