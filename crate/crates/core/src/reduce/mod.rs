//! Principal component analysis for feature-vector reduction.

mod jacobi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{dot, Scalar};

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("PCA needs at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("retained ratio must be in (0, 1], got {0}")]
    InvalidRatio(f64),
    #[error("non-finite value in input")]
    NonFinite,
}

/// Fitted projection: `components . (x - mean)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaModel<T = f64> {
    pub mean: Vec<T>,
    /// `q` rows of length `d`, row-major.
    pub components: Vec<Vec<T>>,
    /// Descending, one per retained component.
    pub eigenvalues: Vec<T>,
    pub retained_ratio: f64,
    /// Trace of the sample covariance.
    pub total_variance: T,
}

impl<T: Scalar> PcaModel<T> {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    /// Fraction of total variance carried by the retained components.
    pub fn explained_ratio(&self) -> T {
        if self.total_variance > T::zero() {
            self.eigenvalues.iter().copied().sum::<T>() / self.total_variance
        } else {
            T::one()
        }
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>, PcaError> {
        if x.len() != self.mean.len() {
            return Err(PcaError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        let centered: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }

    /// Maps a projected vector back into input space.
    pub fn reconstruct(&self, z: &[T]) -> Result<Vec<T>, PcaError> {
        if z.len() != self.components.len() {
            return Err(PcaError::DimensionMismatch {
                expected: self.components.len(),
                got: z.len(),
            });
        }
        let mut out = self.mean.clone();
        for (c, &w) in self.components.iter().zip(z) {
            for (o, &ci) in out.iter_mut().zip(c) {
                *o += w * ci;
            }
        }
        Ok(out)
    }
}

/// Fits PCA on the sample covariance (divisor `n - 1`), keeping the fewest
/// leading components whose variance share reaches `retained`.
pub fn pca_fit<T: Scalar>(samples: &[Vec<T>], retained: f64) -> Result<PcaModel<T>, PcaError> {
    if !(retained > 0.0 && retained <= 1.0) {
        return Err(PcaError::InvalidRatio(retained));
    }
    let n = samples.len();
    if n < 2 {
        return Err(PcaError::InsufficientSamples(n));
    }
    let d = samples[0].len();
    for s in samples {
        if s.len() != d {
            return Err(PcaError::DimensionMismatch {
                expected: d,
                got: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(PcaError::NonFinite);
        }
    }
    if d == 0 {
        return Err(PcaError::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }

    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut mean = vec![T::zero(); d];
    for s in samples {
        for (m, &v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m *= inv_n);

    let mut cov = vec![T::zero(); d * d];
    let mut centered = vec![T::zero(); d];
    for s in samples {
        for ((c, &v), &m) in centered.iter_mut().zip(s).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == T::zero() {
                continue;
            }
            let row = &mut cov[i * d..i * d + d];
            for j in i..d {
                row[j] += ci * centered[j];
            }
        }
    }
    let inv_dof = T::one() / T::from_usize_lossy(n - 1);
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] * inv_dof;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    let total_variance: T = (0..d).map(|i| cov[i * d + i]).sum();

    let (values, vectors) = jacobi::symmetric_eigen(cov, d);
    let mut order: Vec<usize> = (0..d).collect();
    // stable sort keeps the fit deterministic on ties
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));

    let eig_sum: T = values.iter().map(|&v| v.max(T::zero())).sum();
    let target = T::lit(retained) * eig_sum;
    let slack = eig_sum * T::epsilon() * T::lit(16.0);
    let mut q = 0;
    let mut acc = T::zero();
    while q < d {
        acc += values[order[q]].max(T::zero());
        q += 1;
        if acc + slack >= target {
            break;
        }
    }

    let tiny = T::epsilon().sqrt();
    let components = order[..q]
        .iter()
        .map(|&k| {
            let mut c: Vec<T> = (0..d).map(|i| vectors[i * d + k]).collect();
            let norm = dot(&c, &c).sqrt();
            c.iter_mut().for_each(|x| *x /= norm);
            // sign convention: first clearly nonzero coordinate positive
            if let Some(&first) = c.iter().find(|x| x.abs() > tiny) {
                if first < T::zero() {
                    c.iter_mut().for_each(|x| *x = -*x);
                }
            }
            c
        })
        .collect();
    let eigenvalues = order[..q].iter().map(|&k| values[k].max(T::zero())).collect();

    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        retained_ratio: retained,
        total_variance,
    })
}
