use nalgebra::{Complex, DMatrix, DVector};

use super::{sample_basis, weighted_inner, GalerkinSystem, SystemBuilder};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weight::Weight;

/// The two-term complex `0 → Λ⁰ → Λ^{0,1} → 0` on `C` sharing one truncated basis.
#[derive(Debug, Clone)]
pub struct HodgeComplex<T: Real> {
    functions: GalerkinSystem<T>,
    forms: GalerkinSystem<T>,
    /// `D_ij = ⟨∂̄_s b_j, b_i dz̄⟩`.
    pairing: DMatrix<Complex<T>>,
}

impl<T: Real> HodgeComplex<T> {
    pub fn new<W: Weight<T> + ?Sized>(weight: &W, degree: usize, reference: Option<T>, quadrature_order: Option<usize>) -> Result<Self> {
        let lower = SystemBuilder::new(0, degree)
            .maybe_reference(reference)
            .maybe_quadrature_order(quadrature_order);
        let upper = SystemBuilder::new(1, degree)
            .maybe_reference(reference)
            .maybe_quadrature_order(quadrature_order);
        let (basis0, rule) = lower.resolve(weight)?;
        let (basis1, _) = upper.resolve(weight)?;
        let s0 = sample_basis(&basis0, &rule, weight);
        let s1 = sample_basis(&basis1, &rule, weight);
        let pairing = weighted_inner(&s1.value, &s0.op, &rule.weights);
        let functions = GalerkinSystem::from_matrices(
            basis0,
            weighted_inner(&s0.value, &s0.value, &rule.weights),
            weighted_inner(&s0.op, &s0.op, &rule.weights),
        )?;
        let forms = GalerkinSystem::from_matrices(
            basis1,
            weighted_inner(&s1.value, &s1.value, &rule.weights),
            weighted_inner(&s1.op, &s1.op, &rule.weights),
        )?;
        Ok(Self { functions, forms, pairing })
    }

    pub fn system(&self, q: usize) -> &GalerkinSystem<T> {
        if q == 0 {
            &self.functions
        } else {
            &self.forms
        }
    }

    /// Coefficient matrix of `∂̄_s`, functions to forms.
    pub fn dbar(&self) -> DMatrix<Complex<T>> {
        solve_gram(&self.forms, &self.pairing)
    }

    /// Coefficient matrix of `∂̄*_s`, forms to functions.
    pub fn dbar_adjoint(&self) -> DMatrix<Complex<T>> {
        solve_gram(&self.functions, &self.pairing.adjoint())
    }

    /// Residual of `B = Id − ∂̄*N∂̄ − ∂̄N∂̄*` at degree `q` over `samples`, in the `G`-norm.
    pub fn residual(&self, q: usize, samples: &[DVector<Complex<T>>]) -> Result<T> {
        let n = self.functions.basis().len();
        let ident = DMatrix::<Complex<T>>::identity(n, n);
        let rhs = match q {
            0 => &ident - self.dbar_adjoint() * green(&self.forms) * self.dbar(),
            1 => &ident - self.dbar() * green(&self.functions) * self.dbar_adjoint(),
            _ => return Err(Error::DegreeOutOfRange { q, n: 1 }),
        };
        let system = self.system(q);
        let r = kernel_projector(system) - rhs;
        let mut worst = T::zero();
        for u in samples {
            if u.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: u.len() });
            }
            let den = g_norm(system, u);
            if den > T::zero() {
                let v = g_norm(system, &(&r * u)) / den;
                if v > worst {
                    worst = v;
                }
            }
        }
        Ok(worst)
    }
}

fn solve_gram<T: Real>(system: &GalerkinSystem<T>, rhs: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    system.gram().clone().cholesky().expect("Gram checked at assembly").solve(rhs)
}

fn g_norm<T: Real>(system: &GalerkinSystem<T>, u: &DVector<Complex<T>>) -> T {
    (u.adjoint() * system.gram() * u)[(0, 0)].re.max(T::zero()).sqrt()
}

/// `N = V M⁺ V^H G`, the Green operator on the complement of the kernel.
fn green<T: Real>(system: &GalerkinSystem<T>) -> DMatrix<Complex<T>> {
    let tol = system.kernel_tolerance();
    let v = system.eigenvectors();
    let inv = DMatrix::from_fn(v.ncols(), v.ncols(), |i, j| {
        let m = system.eigenvalues()[i];
        if i == j && m > tol {
            Complex::new(m.recip(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    v * inv * v.adjoint() * system.gram()
}

fn kernel_projector<T: Real>(system: &GalerkinSystem<T>) -> DMatrix<Complex<T>> {
    system.projector_matrix(system.kernel_tolerance())
}

/// Hodge residual of the complex at degree `q`.
pub fn hodge_residual<T: Real>(complex: &HodgeComplex<T>, q: usize, samples: &[DVector<Complex<T>>]) -> Result<T> {
    complex.residual(q, samples)
}
