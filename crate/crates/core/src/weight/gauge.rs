use nalgebra::{Complex, DMatrix};

use super::WeightPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Splits `φ` into a gauge-normal part and the removed `2·Re(F)`.
///
/// `F` gathers the constant, holomorphic-linear and holomorphic-quadratic terms.
pub fn normalize_gauge<T: Real>(phi: &WeightPolynomial<T>) -> (WeightPolynomial<T>, WeightPolynomial<T>) {
    let mut removed = WeightPolynomial::zero(phi.n());
    for (a, b, c) in phi.terms() {
        let pure = a.order() == 0 || b.order() == 0;
        if pure && a.order() + b.order() <= 2 {
            removed.set((a.clone(), b.clone()), c);
        }
    }
    (phi.sub(&removed), removed)
}

/// Complex Hessian `∂²φ/∂zᵢ∂z̄ⱼ` at `at`.
pub fn curvature_matrix<T: Real>(phi: &WeightPolynomial<T>, at: &[Complex<T>]) -> Result<DMatrix<Complex<T>>> {
    let n = phi.n();
    if at.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: at.len() });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let mut d = vec![0u32; n];
        let mut e = vec![0u32; n];
        d[i] = 1;
        e[j] = 1;
        phi.eval_derivative(&d, &e, at)
    }))
}
