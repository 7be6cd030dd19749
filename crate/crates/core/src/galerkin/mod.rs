//! Galerkin discretization of the localized Kodaira Laplacian on `C`.

mod basis;
mod bergman;
mod hodge;

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;

pub use basis::{BasisKind, GalerkinBasis, ReducedValues};
pub use bergman::{bergman_kernel_numeric, HolomorphicBergman};
pub use hodge::{hodge_residual, HodgeComplex};

use crate::error::{Error, Result};
use crate::form::FormKernelValue;
use crate::quadrature::PlaneRule;
use crate::scalar::Real;
use crate::weight::Weight;

/// Smallest-to-largest eigenvalue ratio of `G` below which assembly is rejected.
pub const GRAM_CONDITION_LIMIT: f64 = 1e-12;

/// Relative tolerance separating zero eigenvalues from the gap.
pub const KERNEL_TOLERANCE: f64 = 1e-7;

/// Absolute curvature `|∂²φ/∂z∂z̄|` at the origin, or `1` when it vanishes.
pub fn default_reference<T: Real, W: Weight<T> + ?Sized>(weight: &W) -> T {
    let origin = vec![Complex::new(T::zero(), T::zero()); weight.dim()];
    let l = weight.jet(&origin).levi(0, 0).re.abs();
    if l > T::of(1e-8) && l.is_finite() {
        l
    } else {
        T::one()
    }
}

/// Default Gauss–Hermite order for degree `degree`.
pub fn default_quadrature_order(degree: usize, weight_degree: Option<usize>) -> usize {
    match weight_degree {
        Some(w) => degree + w.max(2) + 2,
        None => degree + 12,
    }
}

/// Builder for [`GalerkinSystem`].
#[derive(Debug, Clone)]
pub struct SystemBuilder<T> {
    q: usize,
    degree: usize,
    reference: Option<T>,
    quadrature_order: Option<usize>,
    kind: BasisKind,
}

impl<T: Real> SystemBuilder<T> {
    pub fn new(q: usize, degree: usize) -> Self {
        Self { q, degree, reference: None, quadrature_order: None, kind: BasisKind::Hermite }
    }

    pub fn reference(mut self, reference: T) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn maybe_reference(mut self, reference: Option<T>) -> Self {
        self.reference = reference;
        self
    }

    pub fn quadrature_order(mut self, order: usize) -> Self {
        self.quadrature_order = Some(order);
        self
    }

    pub fn maybe_quadrature_order(mut self, order: Option<usize>) -> Self {
        self.quadrature_order = order;
        self
    }

    pub fn basis_kind(mut self, kind: BasisKind) -> Self {
        self.kind = kind;
        self
    }

    pub(crate) fn resolve<W: Weight<T> + ?Sized>(&self, weight: &W) -> Result<(GalerkinBasis<T>, PlaneRule<T>)> {
        if weight.dim() != 1 {
            return Err(Error::Unsupported("Galerkin eigensolves are limited to n = 1".into()));
        }
        let reference = self.reference.unwrap_or_else(|| default_reference(weight));
        let basis = GalerkinBasis::new(self.q, self.degree, reference, self.kind)?;
        let order = self
            .quadrature_order
            .unwrap_or_else(|| default_quadrature_order(self.degree, weight.polynomial_degree()));
        let rule = PlaneRule::new(order, reference)?;
        Ok((basis, rule))
    }

    pub fn build<W: Weight<T> + ?Sized>(&self, weight: &W) -> Result<GalerkinSystem<T>> {
        let (basis, rule) = self.resolve(weight)?;
        let samples = sample_basis(&basis, &rule, weight);
        let gram = weighted_inner(&samples.value, &samples.value, &rule.weights);
        let laplacian = weighted_inner(&samples.op, &samples.op, &rule.weights);
        GalerkinSystem::from_matrices(basis, gram, laplacian)
    }
}

/// Reduced basis values and operator values at each node, stored as `points × basis` matrices.
pub(crate) struct Samples<T: Real> {
    pub value: DMatrix<Complex<T>>,
    pub op: DMatrix<Complex<T>>,
}

pub(crate) fn sample_basis<T: Real, W: Weight<T> + ?Sized>(
    basis: &GalerkinBasis<T>,
    rule: &PlaneRule<T>,
    weight: &W,
) -> Samples<T> {
    let rows: Vec<(Vec<Complex<T>>, Vec<Complex<T>>)> = rule
        .points
        .par_iter()
        .map(|&z| {
            let dzbar = weight.jet(&[z]).dzbar(0);
            let r = basis.reduced(z);
            let op = basis.apply_operator(z, dzbar, &r);
            (r.value, op)
        })
        .collect();
    let (p, n) = (rows.len(), basis.len());
    let value = DMatrix::from_fn(p, n, |i, j| rows[i].0[j]);
    let op = DMatrix::from_fn(p, n, |i, j| rows[i].1[j]);
    Samples { value, op }
}

/// `M_ij = Σ_p w_p conj(A_pi) B_pj`.
pub(crate) fn weighted_inner<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>, w: &[T]) -> DMatrix<Complex<T>> {
    let (p, n, m) = (a.nrows(), a.ncols(), b.ncols());
    let scaled_b: Vec<Vec<Complex<T>>> =
        (0..m).map(|j| (0..p).map(|k| b[(k, j)] * w[k]).collect()).collect();
    let cols: Vec<Vec<Complex<T>>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let bj = &scaled_b[j];
            (0..n)
                .map(|i| {
                    let ai = a.column(i);
                    ai.iter()
                        .zip(bj)
                        .fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * *y)
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, m, |i, j| cols[j][i])
}

fn hermitian_part<T: Real>(m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    (m + m.adjoint()) * Complex::new(T::of(0.5), T::zero())
}

/// Assembled Gram and Laplacian matrices with the generalized eigensystem `Q v = μ G v`.
#[derive(Debug, Clone)]
pub struct GalerkinSystem<T: Real> {
    basis: GalerkinBasis<T>,
    gram: DMatrix<Complex<T>>,
    laplacian: DMatrix<Complex<T>>,
    eigenvalues: Vec<T>,
    eigenvectors: DMatrix<Complex<T>>,
}

impl<T: Real> GalerkinSystem<T> {
    /// Solves `Q v = μ G v` by Cholesky whitening; rejects ill-conditioned `G`.
    pub fn from_matrices(
        basis: GalerkinBasis<T>,
        gram: DMatrix<Complex<T>>,
        laplacian: DMatrix<Complex<T>>,
    ) -> Result<Self> {
        let gram = hermitian_part(&gram);
        let laplacian = hermitian_part(&laplacian);
        check_conditioning(&gram, basis.degree())?;
        let chol = gram.clone().cholesky().ok_or(Error::GramConditioning {
            degree: basis.degree(),
            ratio: 0.0,
            threshold: GRAM_CONDITION_LIMIT,
        })?;
        let l = chol.l();
        let x = l.solve_lower_triangular(&laplacian).expect("Cholesky factor is invertible");
        let a = l.solve_lower_triangular(&x.adjoint()).expect("Cholesky factor is invertible");
        let eig = hermitian_part(&a).symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).expect("finite eigenvalues"));
        let eigenvalues: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let y = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        let eigenvectors = l.ad_solve_lower_triangular(&y).expect("Cholesky factor is invertible");
        Ok(Self { basis, gram, laplacian, eigenvalues, eigenvectors })
    }

    pub fn basis(&self) -> &GalerkinBasis<T> {
        &self.basis
    }

    pub fn q(&self) -> usize {
        self.basis.q()
    }

    pub fn gram(&self) -> &DMatrix<Complex<T>> {
        &self.gram
    }

    pub fn laplacian(&self) -> &DMatrix<Complex<T>> {
        &self.laplacian
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `G`-orthonormal eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DMatrix<Complex<T>> {
        &self.eigenvectors
    }

    pub fn largest_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// Absolute threshold below which eigenvalues count as zero.
    pub fn kernel_tolerance(&self) -> T {
        T::of(KERNEL_TOLERANCE) * self.largest_eigenvalue().abs().max(T::one())
    }

    pub fn check_semidefinite(&self) -> Result<()> {
        let min = self.eigenvalues.first().copied().unwrap_or_else(T::zero);
        if min < -T::of(1e-9) * self.largest_eigenvalue().abs().max(T::one()) {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min.as_f64() });
        }
        Ok(())
    }

    /// Number of eigenvalues `≤ c`.
    pub fn count_below(&self, c: T) -> usize {
        self.eigenvalues.iter().take_while(|&&m| m <= c).count()
    }

    /// Dimension of the numerical kernel.
    pub fn kernel_dimension(&self) -> usize {
        self.count_below(self.kernel_tolerance())
    }

    /// Smallest eigenvalue above the kernel tolerance.
    pub fn spectral_gap(&self) -> T {
        let tol = self.kernel_tolerance();
        self.eigenvalues.iter().copied().find(|&m| m > tol).unwrap_or_else(T::zero)
    }

    /// `ψ_j(z)` for every mode `j`.
    pub fn eigenfunctions_at(&self, z: Complex<T>) -> DVector<Complex<T>> {
        let b = DVector::from_vec(self.basis.values(z));
        self.eigenvectors.transpose() * b
    }

    /// `Σ_j f(μ_j) ψ_j(z) ψ_j(w)*` for every pair in `zs × ws`.
    pub fn kernel_matrix(&self, f: impl Fn(T) -> T + Sync, zs: &[Complex<T>], ws: &[Complex<T>]) -> DMatrix<Complex<T>> {
        let modes = self.eigenvalues.len();
        let fz: Vec<T> = self.eigenvalues.iter().map(|&m| f(m)).collect();
        let mut left = DMatrix::from_fn(zs.len(), modes, |_, _| Complex::new(T::zero(), T::zero()));
        for (r, &z) in zs.iter().enumerate() {
            let psi = self.eigenfunctions_at(z);
            for j in 0..modes {
                left[(r, j)] = psi[j] * fz[j];
            }
        }
        let mut right = DMatrix::from_fn(modes, ws.len(), |_, _| Complex::new(T::zero(), T::zero()));
        for (c, &w) in ws.iter().enumerate() {
            let psi = self.eigenfunctions_at(w);
            for j in 0..modes {
                right[(j, c)] = psi[j].conj();
            }
        }
        left * right
    }

    pub fn kernel_with(&self, f: impl Fn(T) -> T + Sync, z: Complex<T>, w: Complex<T>) -> FormKernelValue<T> {
        let v = self.kernel_matrix(f, &[z], &[w])[(0, 0)];
        FormKernelValue::leading(1, self.q(), v).expect("q ≤ 1 by construction")
    }

    /// Kernel of `𝟙_{[0,c]}(□)`.
    pub fn spectral_projector_kernel(&self, c: T, z: Complex<T>, w: Complex<T>) -> FormKernelValue<T> {
        self.kernel_with(|m| if m <= c { T::one() } else { T::zero() }, z, w)
    }

    /// Kernel of `e^{-t□}`.
    pub fn heat_kernel(&self, t: T, z: Complex<T>, w: Complex<T>) -> FormKernelValue<T> {
        self.kernel_with(|m| (-t * m).exp(), z, w)
    }

    /// Coefficient-space matrix `V_S V_S^H G` of the spectral projector at threshold `c`.
    pub fn projector_matrix(&self, c: T) -> DMatrix<Complex<T>> {
        let k = self.count_below(c);
        let vs = self.eigenvectors.columns(0, k);
        &vs * vs.adjoint() * &self.gram
    }

    /// Trace of the truncated heat operator, `Σ e^{-tμ_j}`.
    pub fn heat_trace(&self, t: T) -> T {
        self.eigenvalues.iter().fold(T::zero(), |s, &m| s + (-t * m).exp())
    }
}

fn check_conditioning<T: Real>(gram: &DMatrix<Complex<T>>, degree: usize) -> Result<()> {
    let ev = gram.clone().symmetric_eigenvalues();
    let max = ev.iter().fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m });
    let min = ev.iter().fold(max, |m, &v| if v < m { v } else { m });
    let ratio = if max > T::zero() { (min / max).as_f64() } else { 0.0 };
    if !(ratio >= GRAM_CONDITION_LIMIT) {
        return Err(Error::GramConditioning { degree, ratio, threshold: GRAM_CONDITION_LIMIT });
    }
    Ok(())
}

/// Assembles the Galerkin system for `weight`.
pub fn build_system<T: Real, W: Weight<T> + ?Sized>(
    weight: &W,
    q: usize,
    degree: usize,
    quadrature_order: Option<usize>,
) -> Result<GalerkinSystem<T>> {
    SystemBuilder::new(q, degree).maybe_quadrature_order(quadrature_order).build(weight)
}

pub fn spectral_projector_kernel<T: Real>(system: &GalerkinSystem<T>, c: T, z: Complex<T>, w: Complex<T>) -> FormKernelValue<T> {
    system.spectral_projector_kernel(c, z, w)
}

pub fn heat_kernel_numeric<T: Real>(system: &GalerkinSystem<T>, t: T, z: Complex<T>, w: Complex<T>) -> FormKernelValue<T> {
    system.heat_kernel(t, z, w)
}

pub fn spectral_gap<T: Real>(system: &GalerkinSystem<T>) -> T {
    system.spectral_gap()
}
