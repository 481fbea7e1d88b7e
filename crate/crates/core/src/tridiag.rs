//! Thomas algorithm for the tridiagonal systems assembled by policy
//! iteration. The rows produced by the solver are weakly chained
//! diagonally dominant, so elimination without pivoting is stable.

use crate::scalar::Real;

/// In-place workspace for repeated tridiagonal solves of a fixed size.
#[derive(Debug, Clone)]
pub struct Tridiag<T> {
    /// Sub-diagonal, `lower[i]` multiplies `x[i-1]` in row `i` (index 0 unused).
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    /// Super-diagonal, `upper[i]` multiplies `x[i+1]` in row `i` (last unused).
    pub upper: Vec<T>,
    pub rhs: Vec<T>,
    scratch_diag: Vec<T>,
    scratch_rhs: Vec<T>,
}

impl<T: Real> Tridiag<T> {
    pub fn new(n: usize) -> Self {
        Tridiag {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
            rhs: vec![T::zero(); n],
            scratch_diag: vec![T::zero(); n],
            scratch_rhs: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Solve the assembled system into `x`. Coefficients are left intact so
    /// the caller can reuse or inspect them.
    pub fn solve_into(&mut self, x: &mut [T]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        let d = &mut self.scratch_diag;
        let r = &mut self.scratch_rhs;
        d.copy_from_slice(&self.diag);
        r.copy_from_slice(&self.rhs);
        for i in 1..n {
            let m = self.lower[i] / d[i - 1];
            d[i] = d[i] - m * self.upper[i - 1];
            r[i] = r[i] - m * r[i - 1];
        }
        x[n - 1] = r[n - 1] / d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (r[i] - self.upper[i] * x[i + 1]) / d[i];
        }
    }

    /// Residual `max_i |A x - rhs|_i` of a candidate solution.
    #[cfg(test)]
    pub fn residual(&self, x: &[T]) -> T {
        let n = self.len();
        let mut worst = T::zero();
        for i in 0..n {
            let mut ax = self.diag[i] * x[i];
            if i > 0 {
                ax = ax + self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                ax = ax + self.upper[i] * x[i + 1];
            }
            worst = worst.max((ax - self.rhs[i]).abs());
        }
        worst
    }
}
