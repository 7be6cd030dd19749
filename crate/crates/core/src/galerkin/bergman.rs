use nalgebra::{Complex, DMatrix, DVector};

use super::{check_conditioning, default_quadrature_order, default_reference};
use crate::error::{Error, Result};
use crate::form::FormKernelValue;
use crate::quadrature::PlaneRule;
use crate::scalar::{ln_factorial, Real};
use crate::weight::Weight;

/// Bergman projector onto `span{N_a z^a e^{-φ}}` (or `z̄^a e^{φ}` when `anti`), computed from its Gram matrix.
#[derive(Debug, Clone)]
pub struct HolomorphicBergman<T: Real, W> {
    weight: W,
    anti: bool,
    reference: T,
    norms: Vec<T>,
    inverse: DMatrix<Complex<T>>,
}

impl<T: Real, W: Weight<T>> HolomorphicBergman<T, W> {
    /// `anti = true` uses anti-holomorphic monomials, the kernel of `□¹` for negative curvature.
    pub fn new(weight: W, anti: bool, degree: usize, reference: Option<T>, quadrature_order: Option<usize>) -> Result<Self> {
        if weight.dim() != 1 {
            return Err(Error::Unsupported("numeric Bergman kernels are limited to n = 1".into()));
        }
        let reference = reference.unwrap_or_else(|| default_reference(&weight));
        let order = quadrature_order.unwrap_or_else(|| default_quadrature_order(degree, weight.polynomial_degree()));
        let rule = PlaneRule::new(order, reference)?;
        let ell = reference.as_f64();
        let norms: Vec<T> = (0..=degree)
            .map(|a| {
                let af = a as f64;
                let ln = af * std::f64::consts::LN_2 + (af + 1.0) * ell.ln() - std::f64::consts::PI.ln() - ln_factorial(a as u32);
                T::of((0.5 * ln).exp())
            })
            .collect();
        let two = T::of(2.0);
        let sign = if anti { T::one() } else { -T::one() };
        let n = degree + 1;
        let mut gram = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
        for (&z, &w) in rule.points.iter().zip(&rule.weights) {
            let corr = (two * (sign * weight.value(&[z]) + reference * z.norm_sqr())).exp() * w;
            let m = monomials(z, degree, anti);
            for a in 0..n {
                let ca = m[a].conj() * (norms[a] * corr);
                for b in 0..n {
                    gram[(a, b)] += ca * m[b] * norms[b];
                }
            }
        }
        let gram = (&gram + gram.adjoint()) * Complex::new(T::of(0.5), T::zero());
        check_conditioning(&gram, degree)?;
        let inverse = gram
            .cholesky()
            .ok_or(Error::GramConditioning { degree, ratio: 0.0, threshold: super::GRAM_CONDITION_LIMIT })?
            .inverse();
        Ok(Self { weight, anti, reference, norms, inverse })
    }

    pub fn weight(&self) -> &W {
        &self.weight
    }

    pub fn reference(&self) -> T {
        self.reference
    }

    pub fn degree(&self) -> usize {
        self.norms.len() - 1
    }

    fn elements(&self, z: Complex<T>) -> DVector<Complex<T>> {
        let e = if self.anti { self.weight.value(&[z]) } else { -self.weight.value(&[z]) }.exp();
        let m = monomials(z, self.degree(), self.anti);
        DVector::from_fn(m.len(), |a, _| m[a] * (self.norms[a] * e))
    }

    /// `K(z, w) = Σ e_a(z) (G⁻¹)_{ab} e_b(w)*`.
    pub fn kernel(&self, z: Complex<T>, w: Complex<T>) -> Complex<T> {
        let ez = self.elements(z);
        let ew = self.elements(w).map(|v| v.conj());
        (ez.transpose() * &self.inverse * ew)[(0, 0)]
    }

    pub fn kernel_matrix(&self, zs: &[Complex<T>], ws: &[Complex<T>]) -> DMatrix<Complex<T>> {
        let n = self.norms.len();
        let mut left = DMatrix::from_element(zs.len(), n, Complex::new(T::zero(), T::zero()));
        for (r, &z) in zs.iter().enumerate() {
            left.row_mut(r).copy_from(&self.elements(z).transpose());
        }
        let mut right = DMatrix::from_element(n, ws.len(), Complex::new(T::zero(), T::zero()));
        for (c, &w) in ws.iter().enumerate() {
            right.column_mut(c).copy_from(&self.elements(w).map(|v| v.conj()));
        }
        left * &self.inverse * right
    }

    pub fn form_value(&self, z: Complex<T>, w: Complex<T>) -> FormKernelValue<T> {
        FormKernelValue::leading(1, usize::from(self.anti), self.kernel(z, w)).expect("q ≤ 1")
    }
}

fn monomials<T: Real>(z: Complex<T>, degree: usize, anti: bool) -> Vec<Complex<T>> {
    let v = if anti { z.conj() } else { z };
    let mut out = Vec::with_capacity(degree + 1);
    let mut cur = Complex::new(T::one(), T::zero());
    for _ in 0..=degree {
        out.push(cur);
        cur *= v;
    }
    out
}

/// Numeric Bergman kernel value at `(z, w)`.
pub fn bergman_kernel_numeric<T: Real, W: Weight<T>>(bergman: &HolomorphicBergman<T, W>, z: Complex<T>, w: Complex<T>) -> Complex<T> {
    bergman.kernel(z, w)
}
