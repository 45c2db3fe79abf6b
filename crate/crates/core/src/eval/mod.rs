//! Cross-validation, confusion-matrix metrics and stage timing.

mod crossval;
mod kfold;
mod metrics;
mod timing;

pub use crossval::{crossval, crossval_folds, CrossvalReport, FoldReport};
pub use kfold::{kfold_split, Folding};
pub use metrics::{
    accuracy, f_measure, mean_std, precision, read_confusion_csv, recall, summarize,
    write_confusion_csv, ConfusionMatrix, MeanStd, MetricSummary,
};
pub use timing::{capture_adjusted_fps, fps, time_stage, StageTimings};

use thiserror::Error;

use crate::pipeline::PipelineError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must satisfy 2 <= k <= n (k = {k}, n = {n})")]
    InvalidK { k: usize, n: usize },
    #[error("grouped folds need exactly k = {k} distinct ids, found {groups}")]
    GroupCount { k: usize, groups: usize },
    #[error("group ids cover {got} samples, dataset has {expected}")]
    GroupLength { expected: usize, got: usize },
    #[error("folds do not partition the dataset")]
    NotAPartition,
    #[error("{0} is undefined (zero denominator)")]
    Undefined(&'static str),
    #[error("no rows")]
    Empty,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
