use nalgebra::Complex;

use super::family::ball_grid;
use super::{c2_distance_on_grid, RealJet, Weight, WeightPolynomial};
use crate::error::{Error, Result};
use crate::scalar::Real;

fn f_and_derivs(t: f64) -> (f64, f64, f64) {
    if t < 1.0 / 700.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / t).exp();
    let t2 = t * t;
    (f, f / t2, f * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// Radial profile `g(s)` with `g = 1` for `s ≤ 1`, `g = 0` for `s ≥ 4`; returns `(g, g′, g″)`.
///
/// The bump is `χ(x) = g(|x|²)`, so `χ ≡ 1` on `B(1)` and `supp χ ⊂ B(2)`.
pub fn bump_profile(s: f64) -> (f64, f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 4.0 {
        return (0.0, 0.0, 0.0);
    }
    let (a, fa1, fa2) = f_and_derivs(4.0 - s);
    let (b, fb1, fb2) = f_and_derivs(s - 1.0);
    let (a1, a2) = (-fa1, fa2);
    let (b1, b2) = (fb1, fb2);
    let sum = a + b;
    let num1 = a1 * b - a * b1;
    let g = a / sum;
    let g1 = num1 / (sum * sum);
    let g2 = (a2 * b - a * b2) / (sum * sum) - 2.0 * num1 * (a1 + b1) / (sum * sum * sum);
    (g, g1, g2)
}

/// `φ̃ = χ(z/C^ε)·inner + (1 − χ(z/C^ε))·model`.
#[derive(Debug, Clone)]
pub struct ExtendedWeight<T> {
    inner: WeightPolynomial<T>,
    model: WeightPolynomial<T>,
    delta: WeightPolynomial<T>,
    epsilon: T,
    ck: T,
    radius: T,
}

/// Glues `scaled` to `model` outside `B(C_k^ε)`.
pub fn extend_weight<T: Real>(
    scaled: &WeightPolynomial<T>,
    model: &WeightPolynomial<T>,
    epsilon: T,
    ck: T,
) -> Result<ExtendedWeight<T>> {
    let n = scaled.n();
    if model.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: model.n() });
    }
    let max = (1.0 / (2 * n + 1) as f64).min(1.0 / 6.0);
    let e = epsilon.as_f64();
    if !(e > 0.0 && e < max) {
        return Err(Error::EpsilonOutOfRange { epsilon: e, max });
    }
    if !(ck > T::zero()) {
        return Err(Error::InvalidParameter("C_k must be positive".into()));
    }
    Ok(ExtendedWeight {
        inner: scaled.clone(),
        model: model.clone(),
        delta: scaled.sub(model),
        epsilon,
        ck,
        radius: ck.powf(epsilon),
    })
}

impl<T: Real> ExtendedWeight<T> {
    pub fn inner(&self) -> &WeightPolynomial<T> {
        &self.inner
    }

    pub fn model(&self) -> &WeightPolynomial<T> {
        &self.model
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn ck(&self) -> T {
        self.ck
    }

    /// `C_k^ε`, the radius of the ball where the weight equals `inner`.
    pub fn radius(&self) -> T {
        self.radius
    }

    /// `C²` distance to the model over `C^n`; only `B(2C^ε)` can contribute.
    pub fn c2_distance_to_model(&self, per_axis: usize) -> T {
        let n = self.inner.n();
        let grid = ball_grid(n, self.radius * T::of(2.0), per_axis);
        let diff = DeltaView(self);
        c2_distance_on_grid(&diff, &grid)
    }

    fn bump_jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        let n = z.len();
        let a = (self.radius * self.radius).recip().as_f64();
        let x: Vec<f64> = z.iter().flat_map(|v| [v.re.as_f64(), v.im.as_f64()]).collect();
        let s = a * x.iter().map(|v| v * v).sum::<f64>();
        let (g, g1, g2) = bump_profile(s);
        let m = 2 * n;
        let mut jet = RealJet::zero(n);
        jet.value = T::of(g);
        for k in 0..m {
            jet.grad[k] = T::of(g1 * 2.0 * a * x[k]);
            for l in 0..m {
                let delta = if k == l { 2.0 * a * g1 } else { 0.0 };
                jet.hess[k * m + l] = T::of(g2 * 4.0 * a * a * x[k] * x[l] + delta);
            }
        }
        jet
    }

    fn blended_delta(&self, z: &[Complex<T>]) -> RealJet<T> {
        let chi = self.bump_jet(z);
        let d = self.delta.jet(z);
        let m = d.grad.len();
        let mut out = RealJet::zero(m / 2);
        out.value = chi.value * d.value;
        for k in 0..m {
            out.grad[k] = chi.grad[k] * d.value + chi.value * d.grad[k];
            for l in 0..m {
                out.hess[k * m + l] = chi.hess[k * m + l] * d.value
                    + chi.grad[k] * d.grad[l]
                    + d.grad[k] * chi.grad[l]
                    + chi.value * d.hess[k * m + l];
            }
        }
        out
    }

    fn zone(&self, z: &[Complex<T>]) -> Zone {
        let r2 = self.radius * self.radius;
        let s = z.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()) / r2;
        if s <= T::one() {
            Zone::Inner
        } else if s >= T::of(4.0) {
            Zone::Model
        } else {
            Zone::Blend
        }
    }
}

enum Zone {
    Inner,
    Blend,
    Model,
}

struct DeltaView<'a, T>(&'a ExtendedWeight<T>);

impl<T: Real> Weight<T> for DeltaView<'_, T> {
    fn dim(&self) -> usize {
        self.0.inner.n()
    }

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        match self.0.zone(z) {
            Zone::Inner => self.0.delta.jet(z),
            Zone::Blend => self.0.blended_delta(z),
            Zone::Model => RealJet::zero(z.len()),
        }
    }
}

impl<T: Real> Weight<T> for ExtendedWeight<T> {
    fn dim(&self) -> usize {
        self.inner.n()
    }

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        match self.zone(z) {
            Zone::Inner => self.inner.jet(z),
            Zone::Model => self.model.jet(z),
            Zone::Blend => {
                let mut out = self.model.jet(z);
                let d = self.blended_delta(z);
                out.value += d.value;
                out.grad.iter_mut().zip(&d.grad).for_each(|(a, b)| *a += *b);
                out.hess.iter_mut().zip(&d.hess).for_each(|(a, b)| *a += *b);
                out
            }
        }
    }

    fn value(&self, z: &[Complex<T>]) -> T {
        match self.zone(z) {
            Zone::Inner => self.inner.eval(z),
            Zone::Model => self.model.eval(z),
            Zone::Blend => {
                let a = (self.radius * self.radius).recip();
                let s = z.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()) * a;
                let g = T::of(bump_profile(s.as_f64()).0);
                self.model.eval(z) + g * self.delta.eval(z)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives_match_finite_differences() {
        for s in [1.2, 2.0, 2.5, 3.3, 3.9] {
            let h = 1e-5;
            let (_, g1, g2) = bump_profile(s);
            let fd1 = (bump_profile(s + h).0 - bump_profile(s - h).0) / (2.0 * h);
            let fd2 = (bump_profile(s + h).1 - bump_profile(s - h).1) / (2.0 * h);
            assert!((g1 - fd1).abs() < 1e-7, "s={s}");
            assert!((g2 - fd2).abs() < 1e-6, "s={s}");
        }
    }

    #[test]
    fn epsilon_range_is_enforced() {
        let m = WeightPolynomial::<f64>::diagonal_quadratic(&[1.0]);
        assert!(extend_weight(&m, &m, 0.17, 10.0).is_err());
        assert!(extend_weight(&m, &m, 0.0, 10.0).is_err());
        assert!(extend_weight(&m, &m, 0.1, 10.0).is_ok());
        let m2 = WeightPolynomial::<f64>::diagonal_quadratic(&[1.0, 1.0]);
        assert!(extend_weight(&m2, &m2, 0.15, 10.0).is_ok());
        let m3 = WeightPolynomial::<f64>::diagonal_quadratic(&[1.0, 1.0, -1.0]);
        assert!(matches!(extend_weight(&m3, &m3, 0.15, 10.0), Err(Error::EpsilonOutOfRange { .. })));
    }
}
