//! Dense symmetric positive-definite solves for the Levenberg-Marquardt step.
//!
//! Factorisation runs in `f64` whatever the caller's scalar type; the systems
//! are at most a few hundred unknowns and `f32` pivots lose definiteness long
//! before the damping search is done.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Cholesky factor of an `n x n` row-major SPD matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    inner: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Cholesky {
    /// `None` if `a` is not numerically positive definite.
    pub fn factor<S: Scalar>(a: &[S], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n, "matrix must be n x n");
        if a.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let m = DMatrix::from_row_iterator(n, n, a.iter().map(|x| Scalar::to_f64(*x)));
        m.cholesky().map(|inner| Cholesky { inner })
    }

    pub fn solve<S: Scalar>(&self, b: &[S]) -> Vec<S> {
        let rhs = DVector::from_iterator(b.len(), b.iter().map(|x| Scalar::to_f64(*x)));
        self.inner.solve(&rhs).iter().map(|x| S::of(*x)).collect()
    }

    /// `trace(A^-1)`.
    pub fn inverse_trace<S: Scalar>(&self) -> S {
        S::of(self.inner.inverse().trace())
    }
}
