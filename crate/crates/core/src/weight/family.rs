use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::{normalize_gauge, Weight, WeightPolynomial};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rule `k ↦ C_k` with `C_k → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum CkRule {
    /// `C_k = ratio^k`.
    Geometric { ratio: f64 },
    /// `C_k = slope·k`.
    Linear { slope: f64 },
    /// `C_k = k^exponent`.
    Power { exponent: f64 },
}

impl CkRule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CkRule::Geometric { ratio } => ratio > 1.0 && ratio.is_finite(),
            CkRule::Linear { slope } => slope > 0.0 && slope.is_finite(),
            CkRule::Power { exponent } => exponent > 0.0 && exponent.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("C_k rule {self:?} does not grow to infinity")))
        }
    }

    pub fn value(&self, k: u32) -> f64 {
        let kf = f64::from(k);
        match *self {
            CkRule::Geometric { ratio } => ratio.powf(kf),
            CkRule::Linear { slope } => slope * kf,
            CkRule::Power { exponent } => kf.powf(exponent),
        }
    }
}

/// Perturbation `ε_k · shape` with `ε_k = C_k^exponent`, `exponent < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation<T> {
    pub shape: WeightPolynomial<T>,
    pub exponent: f64,
}

/// `φ_k = C_k·base + Σ ε_k·shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily<T> {
    pub base: WeightPolynomial<T>,
    pub ck: CkRule,
    pub perturbations: Vec<Perturbation<T>>,
}

impl<T: Real> WeightFamily<T> {
    pub fn new(base: WeightPolynomial<T>, ck: CkRule, perturbations: Vec<Perturbation<T>>) -> Result<Self> {
        ck.validate()?;
        for p in &perturbations {
            if p.shape.n() != base.n() {
                return Err(Error::DimensionMismatch { expected: base.n(), got: p.shape.n() });
            }
            if !(p.exponent < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "perturbation exponent {} is not o(C_k)",
                    p.exponent
                )));
            }
        }
        Ok(Self { base, ck, perturbations })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn ck(&self, k: u32) -> T {
        T::of(self.ck.value(k))
    }

    /// Assembled unscaled weight `φ_k`.
    pub fn assemble(&self, k: u32) -> WeightPolynomial<T> {
        let c = self.ck.value(k);
        self.perturbations
            .iter()
            .fold(self.base.scaled(T::of(c)), |acc, p| acc.add(&p.shape.scaled(T::of(c.powf(p.exponent)))))
    }

    /// Family re-expanded at `p` and put in gauge-normal form, term by term.
    pub fn recentered(&self, p: &[Complex<T>]) -> Result<Self> {
        let gauge = |w: &WeightPolynomial<T>| -> Result<WeightPolynomial<T>> { Ok(normalize_gauge(&w.translate(p)?).0) };
        let perturbations = self
            .perturbations
            .iter()
            .map(|q| Ok(Perturbation { shape: gauge(&q.shape)?, exponent: q.exponent }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { base: gauge(&self.base)?, ck: self.ck, perturbations })
    }

    /// Quadratic part of the scaled weights in the limit `k → ∞`.
    pub fn model(&self) -> WeightPolynomial<T> {
        self.base.truncated(2)
    }
}

/// `φ_(k)(z) = φ_k(z/√C_k)`.
pub fn scale_weight<T: Real>(family: &WeightFamily<T>, k: u32) -> WeightPolynomial<T> {
    let c = family.ck.value(k);
    family.assemble(k).dilate(T::of(c.powf(-0.5)))
}

/// Deterministic grid of points in the ball of radius `r` with `per_axis` nodes per real axis.
pub fn ball_grid<T: Real>(n: usize, r: T, per_axis: usize) -> Vec<Vec<Complex<T>>> {
    let per_axis = per_axis.max(2);
    let axis: Vec<T> = (0..per_axis)
        .map(|i| r * (T::of(2.0 * i as f64 / (per_axis - 1) as f64) - T::one()))
        .collect();
    let total = per_axis.pow(2 * n as u32);
    let mut out = Vec::new();
    for mut idx in 0..total {
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            coords.push(axis[idx % per_axis]);
            idx /= per_axis;
        }
        let z: Vec<Complex<T>> = coords.chunks(2).map(|p| Complex::new(p[0], p[1])).collect();
        let norm2 = z.iter().fold(T::zero(), |s, v| s + v.norm_sqr());
        if norm2 <= r * r * T::of(1.0 + 1e-12) {
            out.push(z);
        }
    }
    out
}

/// Default nodes per real axis for a grid in complex dimension `n`.
pub(crate) fn default_per_axis(n: usize) -> usize {
    match n {
        1 => 41,
        2 => 9,
        _ => 5,
    }
}

/// Largest `C²` deviation of `weight` from zero over `points`.
pub fn c2_distance_on_grid<T: Real, W: Weight<T> + ?Sized>(weight: &W, points: &[Vec<Complex<T>>]) -> T {
    points
        .iter()
        .map(|z| weight.jet(z).c2_norm())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

/// `C²` distance between two polynomial weights on the ball of radius `r`.
pub fn c2_distance_to_model<T: Real>(scaled: &WeightPolynomial<T>, model: &WeightPolynomial<T>, r: T) -> Result<T> {
    if scaled.n() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), got: scaled.n() });
    }
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    let diff = scaled.sub(model);
    let grid = ball_grid(scaled.n(), r, default_per_axis(scaled.n()));
    Ok(c2_distance_on_grid(&diff, &grid))
}
