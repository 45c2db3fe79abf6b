//! RBF-kernel SVM classifier trained through its dual, plus the Perceptron
//! and epsilon-SVR baselines.

mod kernel;
mod perceptron;
mod smo;
mod svc;
mod svr;
mod weights;

pub use kernel::rbf_kernel;
pub use perceptron::{perceptron_train, LinearModel};
pub use smo::SolverReport;
pub use svc::{svm_train, svm_train_with_report, Gamma, SvmModel, SvmParams};
pub use svr::{svr_train, SvrModel, SvrParams};
pub use weights::{balanced_weights, ClassWeights};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training data contains a single class; both -1 and +1 are required")]
    SingleClass,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} and labels have different lengths")]
    LengthMismatch(&'static str),
    #[error("non-finite value in training input")]
    NonFinite,
    #[error("invalid hyperparameter: {0}")]
    InvalidParam(String),
    #[error("SMO did not converge within {0} pair updates")]
    NotConverged(usize),
    #[error("model has no support vectors")]
    NoSupportVectors,
}

use crate::scalar::Scalar;

pub(crate) fn check_matrix<T: Scalar>(x: &[Vec<T>]) -> Result<usize, LearnError> {
    let d = x.first().map(Vec::len).unwrap_or(0);
    for row in x {
        if row.len() != d {
            return Err(LearnError::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite);
        }
    }
    Ok(d)
}
