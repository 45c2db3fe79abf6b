use serde::{Deserialize, Serialize};

use super::kernel::{rbf_unchecked, KernelRows};
use super::smo::{solve, SolverConfig, SolverReport};
use super::{check_matrix, ClassWeights, LearnError};
use crate::features::Label;
use crate::scalar::Scalar;

/// RBF width selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma<T = f64> {
    /// `1 / (q * mean per-feature variance)` of the training inputs.
    Scale,
    Value(T),
}

impl<T: Scalar> Gamma<T> {
    pub fn resolve(&self, x: &[Vec<T>]) -> Result<T, LearnError> {
        match *self {
            Gamma::Value(g) if g > T::zero() && g.is_finite() => Ok(g),
            Gamma::Value(g) => Err(LearnError::InvalidParam(format!("gamma must be > 0, got {g}"))),
            Gamma::Scale => {
                let d = x.first().map(Vec::len).unwrap_or(0);
                if d == 0 || x.is_empty() {
                    return Ok(T::one());
                }
                let n = T::from_usize_lossy(x.len());
                let mut total = T::zero();
                for j in 0..d {
                    let mean = x.iter().map(|r| r[j]).sum::<T>() / n;
                    total += x.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<T>() / n;
                }
                let mean_var = total / T::from_usize_lossy(d);
                Ok(if mean_var > T::zero() {
                    T::one() / (T::from_usize_lossy(d) * mean_var)
                } else {
                    T::one()
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams<T = f64> {
    pub c: T,
    pub gamma: Gamma<T>,
    /// KKT violation tolerance.
    pub tol: T,
    /// Hard cap on pair updates.
    pub max_iter: usize,
    pub cache_bytes: usize,
    /// Keep the dual objective after every pair update.
    pub record_trace: bool,
}

impl<T: Scalar> Default for SvmParams<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            gamma: Gamma::Scale,
            tol: T::lit(1e-3),
            max_iter: 1_000_000,
            cache_bytes: 256 << 20,
            record_trace: false,
        }
    }
}

/// Trained soft-margin RBF classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmModel<T = f64> {
    pub support_vectors: Vec<Vec<T>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coefs: Vec<T>,
    pub bias: T,
    pub gamma: T,
    pub c: T,
    pub class_weights: ClassWeights<T>,
}

impl<T: Scalar> SvmModel<T> {
    pub fn new(
        support_vectors: Vec<Vec<T>>,
        dual_coefs: Vec<T>,
        bias: T,
        gamma: T,
        c: T,
        class_weights: ClassWeights<T>,
    ) -> Result<Self, LearnError> {
        if support_vectors.is_empty() {
            return Err(LearnError::NoSupportVectors);
        }
        if support_vectors.len() != dual_coefs.len() {
            return Err(LearnError::LengthMismatch("dual coefficients"));
        }
        check_matrix(&support_vectors)?;
        if !(gamma > T::zero()) || !bias.is_finite() {
            return Err(LearnError::InvalidParam("gamma must be > 0 and bias finite".into()));
        }
        Ok(Self {
            support_vectors,
            dual_coefs,
            bias,
            gamma,
            c,
            class_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.support_vectors[0].len()
    }

    pub fn decision(&self, x: &[T]) -> Result<T, LearnError> {
        if x.len() != self.dim() {
            return Err(LearnError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, &a)| a * rbf_unchecked(sv, x, self.gamma))
            .sum::<T>()
            + self.bias)
    }

    /// `sign(decision)` with `sign(0) = +1`.
    pub fn predict(&self, x: &[T]) -> Result<Label, LearnError> {
        self.decision(x).map(Label::from_sign)
    }
}

pub fn svm_train<T: Scalar>(
    x: &[Vec<T>],
    y: &[Label],
    params: &SvmParams<T>,
    weights: &ClassWeights<T>,
) -> Result<SvmModel<T>, LearnError> {
    svm_train_with_report(x, y, params, weights).map(|(m, _)| m)
}

pub fn svm_train_with_report<T: Scalar>(
    x: &[Vec<T>],
    y: &[Label],
    params: &SvmParams<T>,
    weights: &ClassWeights<T>,
) -> Result<(SvmModel<T>, SolverReport<T>), LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::LengthMismatch("inputs"));
    }
    check_matrix(x)?;
    if !y.contains(&Label::Positive) || !y.contains(&Label::Negative) {
        return Err(LearnError::SingleClass);
    }
    if !(params.c > T::zero()) || !params.c.is_finite() {
        return Err(LearnError::InvalidParam(format!("C must be > 0, got {}", params.c)));
    }
    if !(weights.positive > T::zero() && weights.negative > T::zero()) {
        return Err(LearnError::InvalidParam("class weights must be > 0".into()));
    }
    let gamma = params.gamma.resolve(x)?;
    let signs: Vec<T> = y.iter().map(|l| l.value()).collect();
    let bound: Vec<T> = y.iter().map(|&l| params.c * weights.of(l)).collect();
    let p = vec![-T::one(); x.len()];
    let mut q = KernelRows::new(x, gamma, signs.clone(), params.cache_bytes);
    let sol = solve(
        &mut q,
        &p,
        &signs,
        &bound,
        &SolverConfig {
            tol: params.tol,
            max_iter: params.max_iter,
            record_trace: params.record_trace,
        },
    )?;

    let threshold = T::lit(1e-8);
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (k, &a) in sol.alpha.iter().enumerate() {
        if a > threshold {
            support_vectors.push(x[k].clone());
            dual_coefs.push(a * signs[k]);
        }
    }
    let model = SvmModel::new(
        support_vectors,
        dual_coefs,
        -sol.rho,
        gamma,
        params.c,
        *weights,
    )?;
    Ok((model, sol.report))
}
