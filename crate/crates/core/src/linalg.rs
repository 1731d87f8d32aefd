//! Dense symmetric positive-definite factorisation on row-major buffers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Diagonal jitter tried, in order, when a factorisation fails.
pub const JITTER_LADDER: [f64; 7] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5];
const JITTER_LAST: f64 = 1e-4;

/// Lower-triangular Cholesky factor stored densely, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
    jitter: f64,
}

fn factor_in_place<T: Scalar>(a: &mut [T], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let (upper, lower) = a.split_at_mut(i * n);
            let row_j = &upper[j * n..j * n + j];
            let row_i = &mut lower[..n];
            let mut s = row_i[j];
            for (x, y) in row_i[..j].iter().zip(row_j) {
                s -= *x * *y;
            }
            row_i[j] = s / d;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            a[i * n + j] = T::zero();
        }
    }
    true
}

impl<T: Scalar> Cholesky<T> {
    /// Factors the symmetric matrix `a` (row-major, `n x n`), escalating the
    /// diagonal jitter through [`JITTER_LADDER`] and then `1e-4` before
    /// giving up.
    pub fn factor(a: &[T], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut tried = Vec::new();
        for &jitter in JITTER_LADDER.iter().chain(std::iter::once(&JITTER_LAST)) {
            tried.push(jitter);
            let mut work = a.to_vec();
            if jitter > 0.0 {
                let j = T::of(jitter);
                for i in 0..n {
                    work[i * n + i] += j;
                }
            }
            if factor_in_place(&mut work, n) {
                return Ok(Self { n, l: work, jitter });
            }
        }
        Err(Error::Factorization { jitters: tried })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that was needed for the factorisation to succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn factor_matrix(&self) -> &[T] {
        &self.l
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.l[i * self.n + j]
    }

    /// Solves `L v = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let mut s = b[i];
            for (lk, bk) in row.iter().zip(&b[..i]) {
                s -= *lk * *bk;
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `L V = B` in place for `B` stored row-major as `n x width`.
    /// Each column matches [`Cholesky::solve_lower_in_place`] exactly.
    pub fn solve_lower_multi_in_place(&self, b: &mut [T], width: usize) {
        let n = self.n;
        debug_assert_eq!(b.len(), n * width);
        for i in 0..n {
            let (done, rest) = b.split_at_mut(i * width);
            let bi = &mut rest[..width];
            for (j, lij) in self.l[i * n..i * n + i].iter().enumerate() {
                let bj = &done[j * width..(j + 1) * width];
                for (x, y) in bi.iter_mut().zip(bj) {
                    *x -= *lij * *y;
                }
            }
            let d = self.l[i * n + i];
            bi.iter_mut().for_each(|x| *x = *x / d);
        }
    }

    /// Solves `L^T v = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `A x = b` where `A = L L^T`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `ln det A = 2 sum ln L_ii`.
    pub fn log_det(&self) -> T {
        let two = T::of(2.0);
        (0..self.n).map(|i| two * self.at(i, i).ln()).sum()
    }
}
