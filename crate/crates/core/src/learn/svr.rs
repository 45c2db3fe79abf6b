use serde::{Deserialize, Serialize};

use super::kernel::{rbf_unchecked, KernelRows};
use super::smo::{solve, SolverConfig};
use super::{check_matrix, Gamma, LearnError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvrParams<T = f64> {
    pub c: T,
    pub gamma: Gamma<T>,
    /// Half-width of the insensitive tube, in target units.
    pub epsilon: T,
    pub tol: T,
    pub max_iter: usize,
    pub cache_bytes: usize,
}

impl<T: Scalar> Default for SvrParams<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            gamma: Gamma::Scale,
            epsilon: T::lit(0.1),
            tol: T::lit(1e-3),
            max_iter: 1_000_000,
            cache_bytes: 256 << 20,
        }
    }
}

/// Epsilon-insensitive RBF regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrModel<T = f64> {
    pub support_vectors: Vec<Vec<T>>,
    /// `alpha+ - alpha-` per support vector.
    pub dual_coefs: Vec<T>,
    pub bias: T,
    pub gamma: T,
    pub c: T,
    pub epsilon: T,
}

impl<T: Scalar> SvrModel<T> {
    pub fn predict(&self, x: &[T]) -> Result<T, LearnError> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != x.len() {
                return Err(LearnError::DimensionMismatch {
                    expected: sv.len(),
                    got: x.len(),
                });
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, &a)| a * rbf_unchecked(sv, x, self.gamma))
            .sum::<T>()
            + self.bias)
    }
}

pub fn svr_train<T: Scalar>(
    x: &[Vec<T>],
    targets: &[T],
    params: &SvrParams<T>,
) -> Result<SvrModel<T>, LearnError> {
    if x.len() != targets.len() {
        return Err(LearnError::LengthMismatch("inputs"));
    }
    if x.len() < 2 {
        return Err(LearnError::TooFewSamples {
            need: 2,
            got: x.len(),
        });
    }
    check_matrix(x)?;
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    if !(params.c > T::zero()) || !params.c.is_finite() {
        return Err(LearnError::InvalidParam(format!("C must be > 0, got {}", params.c)));
    }
    if !(params.epsilon >= T::zero()) {
        return Err(LearnError::InvalidParam(format!(
            "epsilon must be >= 0, got {}",
            params.epsilon
        )));
    }
    let n = x.len();
    let gamma = params.gamma.resolve(x)?;
    // variables 0..n hold alpha+, n..2n hold alpha-
    let mut signs = vec![T::one(); n];
    signs.extend(std::iter::repeat(-T::one()).take(n));
    let mut p: Vec<T> = targets.iter().map(|&t| params.epsilon - t).collect();
    p.extend(targets.iter().map(|&t| params.epsilon + t));
    let bound = vec![params.c; 2 * n];
    let mut q = KernelRows::new(x, gamma, signs.clone(), params.cache_bytes);
    let sol = solve(
        &mut q,
        &p,
        &signs,
        &bound,
        &SolverConfig {
            tol: params.tol,
            max_iter: params.max_iter,
            record_trace: false,
        },
    )?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for k in 0..n {
        let coef = sol.alpha[k] - sol.alpha[k + n];
        if coef.abs() > T::lit(1e-8) {
            support_vectors.push(x[k].clone());
            dual_coefs.push(coef);
        }
    }
    Ok(SvrModel {
        support_vectors,
        dual_coefs,
        bias: -sol.rho,
        gamma,
        c: params.c,
        epsilon: params.epsilon,
    })
}
