//! Pairwise coordinate solver for
//!
//! ```text
//! min 1/2 a'Qa + p'a   s.t.  y'a = 0,  0 <= a_i <= C_i
//! ```
//!
//! with `y_i in {-1, +1}`. Working pairs are the maximal KKT violators.

use serde::{Deserialize, Serialize};

use super::kernel::KernelRows;
use super::LearnError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport<T = f64> {
    pub iterations: usize,
    /// Final KKT gap `m(a) - M(a)`.
    pub gap: T,
    /// Value of `-(1/2 a'Qa + p'a)` at the solution; for classification this
    /// is the usual dual objective.
    pub dual_objective: T,
    /// Dual objective after every pair update, when requested.
    pub objective_trace: Vec<T>,
}

pub(crate) struct Solution<T> {
    pub alpha: Vec<T>,
    /// Offset `rho`; decision values are `sum coef K - rho`.
    pub rho: T,
    pub report: SolverReport<T>,
}

pub(crate) struct SolverConfig<T> {
    pub tol: T,
    pub max_iter: usize,
    pub record_trace: bool,
}

fn objective<T: Scalar>(alpha: &[T], grad: &[T], p: &[T]) -> T {
    // 1/2 a'Qa + p'a = 1/2 sum a_i (G_i + p_i)
    let half = T::lit(0.5);
    -alpha
        .iter()
        .zip(grad)
        .zip(p)
        .map(|((&a, &g), &pi)| a * (g + pi))
        .sum::<T>()
        * half
}

pub(crate) fn solve<T: Scalar>(
    q: &mut KernelRows<'_, T>,
    p: &[T],
    y: &[T],
    bound: &[T],
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>, LearnError> {
    let m = q.len();
    debug_assert!(p.len() == m && y.len() == m && bound.len() == m);
    let tau = T::lit(1e-12);
    let mut alpha = vec![T::zero(); m];
    let mut grad = p.to_vec();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let positive = |k: usize| y[k] > T::zero();

    let gap = loop {
        // i from I_up maximizes -y G, j from I_low minimizes it
        let mut gmax = T::neg_infinity();
        let mut gmin = T::infinity();
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for k in 0..m {
            let v = -y[k] * grad[k];
            let up = if positive(k) {
                alpha[k] < bound[k]
            } else {
                alpha[k] > T::zero()
            };
            let low = if positive(k) {
                alpha[k] > T::zero()
            } else {
                alpha[k] < bound[k]
            };
            if up && v > gmax {
                gmax = v;
                i = k;
            }
            if low && v < gmin {
                gmin = v;
                j = k;
            }
        }
        if i == usize::MAX || j == usize::MAX {
            break T::zero();
        }
        let gap = gmax - gmin;
        if gap < cfg.tol {
            break gap;
        }
        if iterations >= cfg.max_iter {
            return Err(LearnError::NotConverged(iterations));
        }
        iterations += 1;

        let qi = q.row(i);
        let qj = q.row(j);
        let (ci, cj) = (bound[i], bound[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if y[i] != y[j] {
            let mut quad = q.diag(i) + q.diag(j) + qi[j] + qi[j];
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > T::zero() {
                if aj < T::zero() {
                    aj = T::zero();
                    ai = diff;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let mut quad = q.diag(i) + q.diag(j) - qi[j] - qi[j];
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < T::zero() {
                aj = T::zero();
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let (di, dj) = (ai - old_i, aj - old_j);
        for k in 0..m {
            grad[k] += qi[k] * di + qj[k] * dj;
        }
        if cfg.record_trace {
            trace.push(objective(&alpha, &grad, p));
        }
    };

    // offset from free variables, else midpoint of the feasible interval
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut free = 0usize;
    let mut free_sum = T::zero();
    for k in 0..m {
        let yg = y[k] * grad[k];
        let at_upper = alpha[k] >= bound[k];
        let at_lower = alpha[k] <= T::zero();
        if at_upper {
            if positive(k) {
                lb = lb.max(yg);
            } else {
                ub = ub.min(yg);
            }
        } else if at_lower {
            if positive(k) {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / T::from_usize_lossy(free)
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) * T::lit(0.5)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        T::zero()
    };

    Ok(Solution {
        report: SolverReport {
            iterations,
            gap,
            dual_objective: objective(&alpha, &grad, p),
            objective_trace: trace,
        },
        alpha,
        rho,
    })
}
