use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spanning set used for the truncated space `span{z^a z̄^b e^{-ℓ|z|²} : a + b ≤ D}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Orthonormal complex Hermite functions (same span, well conditioned).
    #[default]
    Hermite,
    /// Raw monomials `z^a z̄^b e^{-ℓ|z|²}`.
    Monomial,
}

/// Values of reduced basis functions `b/e^{-ℓ|z|²}` and their `∂_z`, `∂_z̄` derivatives at a point.
#[derive(Debug, Clone)]
pub struct ReducedValues<T> {
    pub value: Vec<Complex<T>>,
    pub dz: Vec<Complex<T>>,
    pub dzbar: Vec<Complex<T>>,
}

/// Truncated basis on `C` for `(0,q)`-forms, `q ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinBasis<T> {
    q: usize,
    degree: usize,
    reference: T,
    kind: BasisKind,
    indices: Vec<(usize, usize)>,
}

impl<T: Real> GalerkinBasis<T> {
    pub fn new(q: usize, degree: usize, reference: T, kind: BasisKind) -> Result<Self> {
        if q > 1 {
            return Err(Error::DegreeOutOfRange { q, n: 1 });
        }
        if !(reference > T::zero()) || !reference.is_finite() {
            return Err(Error::InvalidParameter("reference exponent must be positive".into()));
        }
        let mut indices = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for m in 0..=degree {
            for a in (0..=m).rev() {
                indices.push((a, m - a));
            }
        }
        Ok(Self { q, degree, reference, kind, indices })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn reference(&self) -> T {
        self.reference
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `(a, b)` bidegree labels in storage order.
    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    /// Position of label `(a, b)`.
    pub fn position(&self, a: usize, b: usize) -> Option<usize> {
        let m = a + b;
        (m <= self.degree).then(|| m * (m + 1) / 2 + (m - a))
    }

    /// `e^{-ℓ|z|²}`.
    pub fn envelope(&self, z: Complex<T>) -> T {
        (-self.reference * z.norm_sqr()).exp()
    }

    /// Full basis values `b_j(z)`.
    pub fn values(&self, z: Complex<T>) -> Vec<Complex<T>> {
        let e = self.envelope(z);
        self.reduced(z).value.into_iter().map(|v| v * e).collect()
    }

    pub fn reduced(&self, z: Complex<T>) -> ReducedValues<T> {
        match self.kind {
            BasisKind::Hermite => self.reduced_hermite(z),
            BasisKind::Monomial => self.reduced_monomial(z),
        }
    }

    fn reduced_monomial(&self, z: Complex<T>) -> ReducedValues<T> {
        let d = self.degree;
        let zero = Complex::new(T::zero(), T::zero());
        let mut zp = vec![Complex::new(T::one(), T::zero()); d + 1];
        let mut zbp = zp.clone();
        for i in 1..=d {
            zp[i] = zp[i - 1] * z;
            zbp[i] = zbp[i - 1] * z.conj();
        }
        let n = self.len();
        let mut out = ReducedValues { value: vec![zero; n], dz: vec![zero; n], dzbar: vec![zero; n] };
        for (j, &(a, b)) in self.indices.iter().enumerate() {
            out.value[j] = zp[a] * zbp[b];
            if a > 0 {
                out.dz[j] = zp[a - 1] * zbp[b] * T::of(a as f64);
            }
            if b > 0 {
                out.dzbar[j] = zp[a] * zbp[b - 1] * T::of(b as f64);
            }
        }
        out
    }

    fn reduced_hermite(&self, z: Complex<T>) -> ReducedValues<T> {
        let d = self.degree;
        let ell = self.reference;
        let s = (T::of(2.0) * ell).sqrt();
        let zeta = z * s;
        let zero = Complex::new(T::zero(), T::zero());
        // h[p][q] for p + q ≤ d.
        let mut h = vec![vec![zero; d + 1]; d + 1];
        h[0][0] = Complex::new(T::one(), T::zero());
        for p in 1..=d {
            h[p][0] = h[p - 1][0] * zeta / T::of(p as f64).sqrt();
        }
        for q in 0..d {
            for p in 0..=(d - q - 1) {
                let mut v = h[p][q] * zeta.conj();
                if p > 0 {
                    v -= h[p - 1][q] * T::of(p as f64).sqrt();
                }
                h[p][q + 1] = v / T::of((q + 1) as f64).sqrt();
            }
        }
        let norm = (ell / T::pi()).sqrt();
        let n = self.len();
        let mut out = ReducedValues { value: vec![zero; n], dz: vec![zero; n], dzbar: vec![zero; n] };
        for (j, &(p, q)) in self.indices.iter().enumerate() {
            out.value[j] = h[p][q] * norm;
            if p > 0 {
                out.dz[j] = h[p - 1][q] * (norm * s * T::of(p as f64).sqrt());
            }
            if q > 0 {
                out.dzbar[j] = h[p][q - 1] * (norm * s * T::of(q as f64).sqrt());
            }
        }
        out
    }

    /// Reduced values of the localized operator: `∂̄_s` for `q = 0`, `∂̄*_s` for `q = 1`.
    ///
    /// `phi_dzbar` is `∂φ/∂z̄` at `z`.
    pub fn apply_operator(&self, z: Complex<T>, phi_dzbar: Complex<T>, r: &ReducedValues<T>) -> Vec<Complex<T>> {
        let ell = self.reference;
        match self.q {
            0 => {
                let shift = phi_dzbar - z * ell;
                r.dzbar.iter().zip(&r.value).map(|(&d, &v)| d + v * shift).collect()
            }
            _ => {
                let shift = phi_dzbar.conj() + z.conj() * ell;
                r.dz.iter().zip(&r.value).map(|(&d, &v)| v * shift - d).collect()
            }
        }
    }
}
