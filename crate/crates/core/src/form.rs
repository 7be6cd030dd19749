//! Kernel coefficients on `dz̄^I ⊗ ∂/∂w̄^J`.

use std::collections::BTreeMap;

use nalgebra::ComplexField;
use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Strictly increasing list of zero-based coordinate indices.
pub type IndexSet = Vec<usize>;

/// Kernel value of `(0,q)`-form kernels; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FormKernelValue<T> {
    n: usize,
    q: usize,
    entries: BTreeMap<(IndexSet, IndexSet), Complex<T>>,
}

impl<T: Real> FormKernelValue<T> {
    pub fn zero(n: usize, q: usize) -> Result<Self> {
        if q > n {
            return Err(Error::DegreeOutOfRange { q, n });
        }
        Ok(Self { n, q, entries: BTreeMap::new() })
    }

    /// Kernel with the single entry `((0..q), (0..q))`.
    pub fn leading(n: usize, q: usize, value: Complex<T>) -> Result<Self> {
        let mut k = Self::zero(n, q)?;
        let idx: IndexSet = (0..q).collect();
        k.entries.insert((idx.clone(), idx), value);
        Ok(k)
    }

    pub fn insert(&mut self, i: IndexSet, j: IndexSet, value: Complex<T>) -> Result<()> {
        for set in [&i, &j] {
            let increasing = set.windows(2).all(|w| w[0] < w[1]);
            if set.len() != self.q || !increasing || set.iter().any(|&x| x >= self.n) {
                return Err(Error::InvalidParameter(format!(
                    "index set {set:?} is not strictly increasing of length {} below {}",
                    self.q, self.n
                )));
            }
        }
        self.entries.insert((i, j), value);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: &[usize], j: &[usize]) -> Complex<T> {
        self.entries
            .get(&(i.to_vec(), j.to_vec()))
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Value on `((0..q), (0..q))`, the only coefficient for rank-one form bundles.
    pub fn value(&self) -> Complex<T> {
        let idx: IndexSet = (0..self.q).collect();
        self.get(&idx, &idx)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(IndexSet, IndexSet), &Complex<T>)> {
        self.entries.iter()
    }

    /// True when every stored entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.re == T::zero() && v.im == T::zero())
    }

    /// Conjugate transpose in `(I, J)`.
    pub fn adjoint(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|((i, j), v)| ((j.clone(), i.clone()), v.conj()))
            .collect();
        Self { n: self.n, q: self.q, entries }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut keys: Vec<_> = self.entries.keys().collect();
        keys.extend(other.entries.keys());
        keys.into_iter().fold(T::zero(), |m, (i, j)| {
            let d = (self.get(i, j) - other.get(i, j)).modulus();
            if d > m {
                d
            } else {
                m
            }
        })
    }
}
