use std::collections::HashMap;
use std::rc::Rc;

use super::LearnError;
use crate::scalar::{squared_distance, Scalar};

/// `exp(-gamma * |a - b|^2)`.
pub fn rbf_kernel<T: Scalar>(a: &[T], b: &[T], gamma: T) -> Result<T, LearnError> {
    if a.len() != b.len() {
        return Err(LearnError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if !(gamma > T::zero()) {
        return Err(LearnError::InvalidParam(format!("gamma must be > 0, got {gamma}")));
    }
    Ok((-gamma * squared_distance(a, b)).exp())
}

#[inline]
pub(crate) fn rbf_unchecked<T: Scalar>(a: &[T], b: &[T], gamma: T) -> T {
    (-gamma * squared_distance(a, b)).exp()
}

/// Rows of the signed kernel matrix `Q[i][j] = s_i s_j K(x_{i mod n}, x_{j mod n})`
/// over `m` solver variables, with a least-recently-used row cache.
pub(crate) struct KernelRows<'a, T> {
    x: &'a [Vec<T>],
    gamma: T,
    signs: Vec<T>,
    diag: Vec<T>,
    capacity: usize,
    clock: u64,
    rows: HashMap<usize, (Rc<Vec<T>>, u64)>,
}

impl<'a, T: Scalar> KernelRows<'a, T> {
    pub(crate) fn new(x: &'a [Vec<T>], gamma: T, signs: Vec<T>, cache_bytes: usize) -> Self {
        let m = signs.len();
        let row_bytes = (m * std::mem::size_of::<T>()).max(1);
        let capacity = (cache_bytes / row_bytes).max(2);
        // K(x, x) = 1 for the RBF kernel and s_i^2 = 1
        let diag = vec![T::one(); m];
        Self {
            x,
            gamma,
            signs,
            diag,
            capacity,
            clock: 0,
            rows: HashMap::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.signs.len()
    }

    pub(crate) fn diag(&self, i: usize) -> T {
        self.diag[i]
    }

    pub(crate) fn row(&mut self, i: usize) -> Rc<Vec<T>> {
        self.clock += 1;
        let now = self.clock;
        if let Some((row, stamp)) = self.rows.get_mut(&i) {
            *stamp = now;
            return Rc::clone(row);
        }
        if self.rows.len() >= self.capacity {
            let oldest = self
                .rows
                .iter()
                .min_by_key(|(_, (_, stamp))| *stamp)
                .map(|(&k, _)| k)
                .expect("cache is non-empty");
            self.rows.remove(&oldest);
        }
        let n = self.x.len();
        let xi = &self.x[i % n];
        let si = self.signs[i];
        let base: Vec<T> = self
            .x
            .iter()
            .map(|xj| rbf_unchecked(xi, xj, self.gamma))
            .collect();
        let row: Vec<T> = (0..self.signs.len())
            .map(|j| si * self.signs[j] * base[j % n])
            .collect();
        let row = Rc::new(row);
        self.rows.insert(i, (Rc::clone(&row), now));
        row
    }
}
