//! Serializable descriptions of weight families and torus bundles.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_kernel::MultiIndex;
use crate::scalar::Real;
use crate::torus::{PsiMode, TorusBundle};
use crate::weight::{CkRule, Perturbation, WeightFamily, WeightPolynomial};

/// Coefficient `(α, β, re, im)` of `z^α z̄^β`.
pub type TermSpec = (Vec<u32>, Vec<u32>, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    /// `ε_k = C_k^exponent`.
    pub exponent: f64,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub dimension: usize,
    pub base: Vec<TermSpec>,
    pub ck: CkRule,
    #[serde(default)]
    pub perturbations: Vec<PerturbationSpec>,
}

fn polynomial<T: Real>(n: usize, terms: &[TermSpec], path: &str) -> Result<WeightPolynomial<T>> {
    let terms = terms
        .iter()
        .map(|(a, b, re, im)| (MultiIndex(a.clone()), MultiIndex(b.clone()), Complex::new(T::of(*re), T::of(*im))));
    WeightPolynomial::from_terms(n, terms).map_err(|e| Error::InvalidParameter(format!("{path}: {e}")))
}

impl FamilySpec {
    /// `λ|z|²` in one variable.
    pub fn quadratic(lambda: f64, ck: CkRule) -> Self {
        Self { dimension: 1, base: vec![(vec![1], vec![1], lambda, 0.0)], ck, perturbations: Vec::new() }
    }

    /// `λ|z|² + c·Re(z²z̄)` in one variable.
    pub fn cubic(lambda: f64, c: f64, ck: CkRule) -> Self {
        let mut s = Self::quadratic(lambda, ck);
        s.base.push((vec![2], vec![1], c / 2.0, 0.0));
        s.base.push((vec![1], vec![2], c / 2.0, 0.0));
        s
    }

    pub fn build<T: Real>(&self, path: &str) -> Result<WeightFamily<T>> {
        let n = self.dimension;
        let base = polynomial(n, &self.base, &format!("{path}.base"))?;
        let perturbations = self
            .perturbations
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(Perturbation {
                    shape: polynomial(n, &p.terms, &format!("{path}.perturbations[{i}].terms"))?,
                    exponent: p.exponent,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        WeightFamily::new(base, self.ck, perturbations).map_err(|e| Error::InvalidParameter(format!("{path}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub tau_re: f64,
    pub tau_im: f64,
    pub degree: i64,
    /// `(m₁, m₂, amplitude)` modes of `ψ`.
    #[serde(default)]
    pub psi: Vec<(i32, i32, f64)>,
}

impl Default for TorusSpec {
    fn default() -> Self {
        Self { tau_re: 0.0, tau_im: 1.0, degree: 1, psi: Vec::new() }
    }
}

impl TorusSpec {
    pub fn build<T: Real>(&self, path: &str) -> Result<TorusBundle<T>> {
        let psi = self.psi.iter().map(|&(m1, m2, amplitude)| PsiMode { m1, m2, amplitude }).collect();
        TorusBundle::new(Complex::new(T::of(self.tau_re), T::of(self.tau_im)), self.degree, psi)
            .map_err(|e| Error::InvalidParameter(format!("{path}: {e}")))
    }
}
