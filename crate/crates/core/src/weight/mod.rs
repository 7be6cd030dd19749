//! Real weights `φ(z, z̄)`: polynomials, jets, gauge normalization, scaling and extension.

mod extend;
mod family;
mod gauge;

use std::collections::BTreeMap;

use nalgebra::ComplexField;
use nalgebra::Complex;

pub use extend::{bump_profile, extend_weight, ExtendedWeight};
pub use family::{ball_grid, c2_distance_on_grid, c2_distance_to_model, scale_weight, CkRule, Perturbation, WeightFamily};
pub use gauge::{curvature_matrix, normalize_gauge};

use crate::error::{Error, Result};
use crate::model_kernel::MultiIndex;
use crate::scalar::Real;

/// Value, gradient and Hessian in real coordinates `(x₁, y₁, …, xₙ, yₙ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealJet<T> {
    pub value: T,
    pub grad: Vec<T>,
    /// Row-major `2n × 2n`.
    pub hess: Vec<T>,
}

impl<T: Real> RealJet<T> {
    pub fn zero(n: usize) -> Self {
        Self { value: T::zero(), grad: vec![T::zero(); 2 * n], hess: vec![T::zero(); 4 * n * n] }
    }

    pub fn n(&self) -> usize {
        self.grad.len() / 2
    }

    pub fn h(&self, a: usize, b: usize) -> T {
        self.hess[a * self.grad.len() + b]
    }

    /// `∂φ/∂z̄ᵢ`.
    pub fn dzbar(&self, i: usize) -> Complex<T> {
        let half = T::of(0.5);
        Complex::new(self.grad[2 * i] * half, self.grad[2 * i + 1] * half)
    }

    /// `∂φ/∂zᵢ`.
    pub fn dz(&self, i: usize) -> Complex<T> {
        self.dzbar(i).conj()
    }

    /// `∂²φ/∂zᵢ∂z̄ⱼ`.
    pub fn levi(&self, i: usize, j: usize) -> Complex<T> {
        let q = T::of(0.25);
        let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        Complex::new(
            (self.h(xi, xj) + self.h(yi, yj)) * q,
            (self.h(xi, yj) - self.h(yi, xj)) * q,
        )
    }

    /// Largest absolute value among value, gradient and Hessian entries.
    pub fn c2_norm(&self) -> T {
        std::iter::once(&self.value)
            .chain(&self.grad)
            .chain(&self.hess)
            .fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }
}

/// A real weight that can be differentiated twice.
pub trait Weight<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T>;

    fn value(&self, z: &[Complex<T>]) -> T {
        self.jet(z).value
    }

    /// Total degree when the weight is a polynomial.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

impl<T: Real, W: Weight<T> + ?Sized> Weight<T> for &W {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        (**self).jet(z)
    }

    fn value(&self, z: &[Complex<T>]) -> T {
        (**self).value(z)
    }

    fn polynomial_degree(&self) -> Option<usize> {
        (**self).polynomial_degree()
    }
}

type Key = (MultiIndex, MultiIndex);

/// Real polynomial `φ(z) = Σ c_{αβ} z^α z̄^β` with `c_{αβ} = conj(c_{βα})`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPolynomial<T> {
    n: usize,
    coeffs: BTreeMap<Key, Complex<T>>,
}

fn zero_c<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> WeightPolynomial<T> {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    /// Collects terms, summing duplicates, and checks reality up to `1e-12` relative.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, MultiIndex, Complex<T>)>) -> Result<Self> {
        let mut coeffs: BTreeMap<Key, Complex<T>> = BTreeMap::new();
        for (a, b, c) in terms {
            if a.len() != n || b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.len().max(b.len()) });
            }
            *coeffs.entry((a, b)).or_insert_with(zero_c) += c;
        }
        let scale = coeffs.values().fold(T::zero(), |m, c| if c.modulus() > m { c.modulus() } else { m });
        let tol = T::of(1e-12) * scale.max(T::one());
        for ((a, b), c) in &coeffs {
            let partner = coeffs.get(&(b.clone(), a.clone())).copied().unwrap_or_else(zero_c);
            if (*c - partner.conj()).modulus() > tol {
                return Err(Error::NotReal { key: format!("({:?}, {:?})", a.0, b.0) });
            }
        }
        let mut out = Self { n, coeffs: BTreeMap::new() };
        for ((a, b), c) in &coeffs {
            let partner = coeffs.get(&(b.clone(), a.clone())).copied().unwrap_or_else(zero_c);
            out.set((a.clone(), b.clone()), (*c + partner.conj()) * T::of(0.5));
        }
        Ok(out)
    }

    /// `Σ λᵢ|zᵢ|²`.
    pub fn diagonal_quadratic(lambdas: &[T]) -> Self {
        let n = lambdas.len();
        let mut p = Self::zero(n);
        for (i, &l) in lambdas.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.set((MultiIndex(e.clone()), MultiIndex(e)), Complex::new(l, T::zero()));
        }
        p
    }

    /// `Re(c · z^α z̄^β)`.
    pub fn real_part(alpha: MultiIndex, beta: MultiIndex, c: Complex<T>) -> Result<Self> {
        let n = alpha.len();
        let half = T::of(0.5);
        Self::from_terms(n, [(alpha.clone(), beta.clone(), c * half), (beta, alpha, c.conj() * half)])
    }

    /// One-variable shorthand for `Re(c · z^a z̄^b)`.
    pub fn re_monomial(a: u32, b: u32, c: Complex<T>) -> Self {
        Self::real_part(MultiIndex(vec![a]), MultiIndex(vec![b]), c).expect("conjugate pair is real")
    }

    fn set(&mut self, key: Key, c: Complex<T>) {
        if c.re == T::zero() && c.im == T::zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, c);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Complex<T> {
        self.coeffs.get(&(alpha.clone(), beta.clone())).copied().unwrap_or_else(zero_c)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, Complex<T>)> {
        self.coeffs.iter().map(|((a, b), c)| (a, b, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|(a, b)| (a.order() + b.order()) as usize).max().unwrap_or(0)
    }

    /// True when `c_{αβ} = conj(c_{βα})` holds exactly.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|((a, b), c)| self.coefficient(b, a) == c.conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        assert_eq!(self.n, other.n, "weight dimensions differ");
        let mut out = self.clone();
        for (key, c) in &other.coeffs {
            let cur = out.coeffs.get(key).copied().unwrap_or_else(zero_c);
            out.set(key.clone(), cur + *c * sign);
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = Self::zero(self.n);
        for (key, c) in &self.coeffs {
            out.set(key.clone(), *c * s);
        }
        out
    }

    /// `z ↦ φ(s·z)`: multiplies `c_{αβ}` by `s^{|α|+|β|}`.
    pub fn dilate(&self, s: T) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.coeffs {
            let k = (a.order() + b.order()) as i32;
            out.set((a.clone(), b.clone()), *c * s.powi(k));
        }
        out
    }

    /// `u ↦ φ(p + u)` re-expanded around `p`.
    pub fn translate(&self, p: &[Complex<T>]) -> Result<Self> {
        if p.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: p.len() });
        }
        let mut acc: BTreeMap<Key, Complex<T>> = BTreeMap::new();
        for ((a, b), c) in &self.coeffs {
            let mut partial: Vec<(Vec<u32>, Vec<u32>, Complex<T>)> = vec![(Vec::new(), Vec::new(), *c)];
            for i in 0..self.n {
                let mut next = Vec::new();
                for (pa, pb, v) in &partial {
                    for j in 0..=a.0[i] {
                        let fa = p[i].powu(a.0[i] - j) * binomial::<T>(a.0[i], j);
                        for l in 0..=b.0[i] {
                            let fb = p[i].conj().powu(b.0[i] - l) * binomial::<T>(b.0[i], l);
                            let mut na = pa.clone();
                            na.push(j);
                            let mut nb = pb.clone();
                            nb.push(l);
                            next.push((na, nb, *v * fa * fb));
                        }
                    }
                }
                partial = next;
            }
            for (na, nb, v) in partial {
                *acc.entry((MultiIndex(na), MultiIndex(nb))).or_insert_with(zero_c) += v;
            }
        }
        let mut out = Self::zero(self.n);
        for (key, v) in acc {
            out.set(key, v);
        }
        let symmetric = out.symmetrized();
        Ok(symmetric)
    }

    fn symmetrized(&self) -> Self {
        let mut out = Self::zero(self.n);
        let half = T::of(0.5);
        for ((a, b), c) in &self.coeffs {
            let partner = self.coefficient(b, a);
            out.set((a.clone(), b.clone()), (*c + partner.conj()) * half);
        }
        for ((a, b), c) in &self.coeffs {
            if !self.coeffs.contains_key(&(b.clone(), a.clone())) {
                out.set((b.clone(), a.clone()), c.conj() * half);
            }
        }
        out
    }

    /// Terms of total degree at most `max_degree`.
    pub fn truncated(&self, max_degree: u32) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.coeffs {
            if a.order() + b.order() <= max_degree {
                out.set((a.clone(), b.clone()), *c);
            }
        }
        out
    }

    /// `∂^{|d|}∂̄^{|e|} φ` at `z`.
    pub fn eval_derivative(&self, d: &[u32], e: &[u32], z: &[Complex<T>]) -> Complex<T> {
        let mut sum = zero_c();
        'terms: for ((a, b), c) in &self.coeffs {
            let mut term = *c;
            for i in 0..self.n {
                if a.0[i] < d[i] || b.0[i] < e[i] {
                    continue 'terms;
                }
                term *= falling::<T>(a.0[i], d[i]) * falling::<T>(b.0[i], e[i]);
                term *= z[i].powu(a.0[i] - d[i]) * z[i].conj().powu(b.0[i] - e[i]);
            }
            sum += term;
        }
        sum
    }

    pub fn eval(&self, z: &[Complex<T>]) -> T {
        self.eval_derivative(&vec![0; self.n], &vec![0; self.n], z).re
    }
}

fn binomial<T: Real>(n: u32, k: u32) -> T {
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    T::of(r)
}

fn falling<T: Real>(n: u32, k: u32) -> T {
    T::of((0..k).map(|i| f64::from(n - i)).product())
}

impl<T: Real> Weight<T> for WeightPolynomial<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, z: &[Complex<T>]) -> T {
        self.eval(z)
    }

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        let n = self.n;
        let two = T::of(2.0);
        let unit = |i: usize| {
            let mut v = vec![0u32; n];
            v[i] = 1;
            v
        };
        let zero = vec![0u32; n];
        let mut jet = RealJet::zero(n);
        jet.value = self.eval(z);
        let dz: Vec<Complex<T>> = (0..n).map(|i| self.eval_derivative(&unit(i), &zero, z)).collect();
        for i in 0..n {
            jet.grad[2 * i] = two * dz[i].re;
            jet.grad[2 * i + 1] = -two * dz[i].im;
        }
        let m = 2 * n;
        for i in 0..n {
            for j in 0..n {
                let mut dd = unit(i);
                dd[j] += 1;
                let b = self.eval_derivative(&dd, &zero, z);
                let a = self.eval_derivative(&unit(i), &unit(j), z);
                let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
                jet.hess[xi * m + xj] = two * (b.re + a.re);
                jet.hess[yi * m + yj] = two * (a.re - b.re);
                jet.hess[xi * m + yj] = two * (a.im - b.im);
                jet.hess[yj * m + xi] = jet.hess[xi * m + yj];
            }
        }
        jet
    }

    fn polynomial_degree(&self) -> Option<usize> {
        Some(self.degree())
    }
}

/// `z ↦ φ(s·z)` for any weight.
#[derive(Debug, Clone)]
pub struct DilatedWeight<W, T> {
    pub inner: W,
    pub factor: T,
}

impl<T: Real, W: Weight<T>> Weight<T> for DilatedWeight<W, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        let s = self.factor;
        let zs: Vec<Complex<T>> = z.iter().map(|&v| v * s).collect();
        let mut jet = self.inner.jet(&zs);
        jet.grad.iter_mut().for_each(|g| *g *= s);
        jet.hess.iter_mut().for_each(|h| *h *= s * s);
        jet
    }

    fn value(&self, z: &[Complex<T>]) -> T {
        let zs: Vec<Complex<T>> = z.iter().map(|&v| v * self.factor).collect();
        self.inner.value(&zs)
    }

    fn polynomial_degree(&self) -> Option<usize> {
        self.inner.polynomial_degree()
    }
}
