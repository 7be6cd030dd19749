//! Closed-form model kernel and orthonormal basis on `C^n` for `φ₀ = Σ λᵢ|zᵢ|²`.

use nalgebra::ComplexField;
use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::form::FormKernelValue;
use crate::galerkin::SystemBuilder;
use crate::scalar::{ln_factorial, Real};
use crate::weight::WeightPolynomial;

/// Curvature eigenvalues with the negative ones listed first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpectrum<T> {
    lambdas: Vec<T>,
    q0: usize,
}

impl<T: Real> ModelSpectrum<T> {
    /// Validates a spectrum already in negatives-first order.
    pub fn new(lambdas: Vec<T>) -> Result<Self> {
        for (index, &l) in lambdas.iter().enumerate() {
            if l == T::zero() || !l.is_finite() {
                return Err(Error::DegenerateSpectrum { index });
            }
        }
        let q0 = lambdas.iter().take_while(|&&l| l < T::zero()).count();
        if lambdas[q0..].iter().any(|&l| l < T::zero()) {
            return Err(Error::NotNegativesFirst);
        }
        Ok(Self { lambdas, q0 })
    }

    /// Stable reordering into negatives-first order, then validation.
    pub fn sorted(lambdas: Vec<T>) -> Result<Self> {
        let (mut neg, pos): (Vec<T>, Vec<T>) = lambdas.into_iter().partition(|&l| l < T::zero());
        neg.extend(pos);
        Self::new(neg)
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn q0(&self) -> usize {
        self.q0
    }

    /// `|λ₁⋯λₙ| / πⁿ`.
    pub fn prefactor(&self) -> T {
        self.lambdas.iter().fold(T::one(), |acc, &l| acc * l.abs()) / T::pi().powi(self.n() as i32)
    }

    /// The model weight `Σ λᵢ|zᵢ|²`.
    pub fn weight(&self) -> WeightPolynomial<T> {
        WeightPolynomial::diagonal_quadratic(&self.lambdas)
    }
}

/// Multi-index `α = (α₁, …, αₙ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All multi-indices of length `n` with `|α| ≤ max_order`, in graded lexicographic order.
    pub fn up_to(n: usize, max_order: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for order in 0..=max_order {
            let mut cur = vec![0u32; n];
            fill(&mut out, &mut cur, 0, order);
        }
        out
    }
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if cur.is_empty() {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

fn check_point<T>(n: usize, z: &[Complex<T>]) -> Result<()> {
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    Ok(())
}

/// Closed-form model Bergman kernel in the localized convention.
pub fn eval_model_bergman<T: Real>(
    spec: &ModelSpectrum<T>,
    q: usize,
    z: &[Complex<T>],
    w: &[Complex<T>],
) -> Result<FormKernelValue<T>> {
    let n = spec.n();
    if q > n {
        return Err(Error::DegreeOutOfRange { q, n });
    }
    check_point(n, z)?;
    check_point(n, w)?;
    if q != spec.q0() {
        return FormKernelValue::zero(n, q);
    }
    let two = T::of(2.0);
    let mut exponent = Complex::new(T::zero(), T::zero());
    for (i, &l) in spec.lambdas().iter().enumerate() {
        let a = l.abs();
        let cross = if i < spec.q0() { z[i].conj() * w[i] } else { z[i] * w[i].conj() };
        exponent += cross * (two * a);
        exponent -= Complex::new(a * (z[i].norm_sqr() + w[i].norm_sqr()), T::zero());
    }
    FormKernelValue::leading(n, q, exponent.exp() * spec.prefactor())
}

/// Orthonormal model basis element `Ψ_α(z)`.
pub fn eval_model_basis<T: Real>(spec: &ModelSpectrum<T>, alpha: &MultiIndex, z: &[Complex<T>]) -> Result<Complex<T>> {
    let n = spec.n();
    check_point(n, z)?;
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
    }
    let mut log_norm = f64::from(alpha.order()) * std::f64::consts::LN_2 - n as f64 * std::f64::consts::PI.ln();
    let mut monomial = Complex::new(T::one(), T::zero());
    let mut gauss = T::zero();
    for (i, (&l, &a)) in spec.lambdas().iter().zip(&alpha.0).enumerate() {
        let abs = l.abs();
        log_norm += f64::from(a + 1) * abs.as_f64().ln() - ln_factorial(a);
        let var = if i < spec.q0() { z[i].conj() } else { z[i] };
        monomial *= var.powu(a);
        gauss += abs * z[i].norm_sqr();
    }
    Ok(monomial * (T::of(0.5 * log_norm).exp() * (-gauss).exp()))
}

/// Truncated expansion `Σ_{|α| ≤ D} Ψ_α(z) Ψ_α(w)*`.
pub fn model_kernel_from_basis<T: Real>(
    spec: &ModelSpectrum<T>,
    q: usize,
    degree: u32,
    z: &[Complex<T>],
    w: &[Complex<T>],
) -> Result<FormKernelValue<T>> {
    let n = spec.n();
    if q > n {
        return Err(Error::DegreeOutOfRange { q, n });
    }
    check_point(n, z)?;
    check_point(n, w)?;
    if q != spec.q0() {
        return FormKernelValue::zero(n, q);
    }
    let mut sum = Complex::new(T::zero(), T::zero());
    for alpha in MultiIndex::up_to(n, degree) {
        sum += eval_model_basis(spec, &alpha, z)? * eval_model_basis(spec, &alpha, w)?.conj();
    }
    FormKernelValue::leading(n, q, sum)
}

/// Heat kernel of the model Laplacian on `C` through a Galerkin eigen-expansion of degree `degree`.
pub fn eval_model_heat<T: Real>(
    spec: &ModelSpectrum<T>,
    q: usize,
    t: T,
    z: Complex<T>,
    w: Complex<T>,
    degree: usize,
) -> Result<FormKernelValue<T>> {
    if spec.n() != 1 {
        return Err(Error::Unsupported("heat kernel eigensolves are limited to n = 1".into()));
    }
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter("heat time must be positive".into()));
    }
    let system = SystemBuilder::new(q, degree)
        .reference(spec.lambdas()[0].abs())
        .build(&spec.weight())?;
    system.check_semidefinite()?;
    Ok(system.heat_kernel(t, z, w))
}
