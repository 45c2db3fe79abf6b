use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::features::Label;
use crate::scalar::Scalar;

/// Per-class penalty multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassWeights<T = f64> {
    pub positive: T,
    pub negative: T,
}

impl<T: Scalar> ClassWeights<T> {
    pub fn uniform() -> Self {
        Self {
            positive: T::one(),
            negative: T::one(),
        }
    }

    pub fn of(&self, label: Label) -> T {
        match label {
            Label::Positive => self.positive,
            Label::Negative => self.negative,
        }
    }
}

/// `n_total / (2 * n_class)` for each class.
pub fn balanced_weights<T: Scalar>(labels: &[Label]) -> Result<ClassWeights<T>, LearnError> {
    let pos = labels.iter().filter(|&&l| l == Label::Positive).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let total = T::from_usize_lossy(labels.len());
    let two = T::lit(2.0);
    Ok(ClassWeights {
        positive: total / (two * T::from_usize_lossy(pos)),
        negative: total / (two * T::from_usize_lossy(neg)),
    })
}
