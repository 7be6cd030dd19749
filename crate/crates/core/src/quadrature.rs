//! Gauss–Hermite rules on the line and tensor rules on the plane.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss–Hermite rule for `∫ f(x) e^{-x²} dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `m`-point rule by Newton iteration on orthonormal Hermite recurrences.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("quadrature order must be positive".into()));
        }
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = m as f64;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mut z = 0.0f64;
        for i in 0..m.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut converged = false;
            for _ in 0..200 {
                let (p1, p2) = hermite_pair(m, z, pim4);
                let pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::InvalidParameter(format!("Gauss-Hermite order {m} did not converge")));
            }
            let (_, p2) = hermite_pair(m, z, pim4);
            let pp = (2.0 * nf).sqrt() * p2;
            nodes[i] = z;
            nodes[m - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[m - 1 - i] = weights[i];
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Orthonormal Hermite values `(p_m(z), p_{m-1}(z))`.
fn hermite_pair(m: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=m {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Tensor Gauss–Hermite rule on `C` for integrals `∫ f(z) e^{-2ℓ|z|²} dV`, `dV = 2 dm`.
#[derive(Debug, Clone)]
pub struct PlaneRule<T> {
    pub points: Vec<Complex<T>>,
    pub weights: Vec<T>,
    pub reference: T,
}

impl<T: Real> PlaneRule<T> {
    pub fn new(order: usize, reference: T) -> Result<Self> {
        if !(reference > T::zero()) {
            return Err(Error::InvalidParameter("reference exponent must be positive".into()));
        }
        let gh = GaussHermite::new(order)?;
        let ell = reference.as_f64();
        let s = (2.0 * ell).sqrt();
        let mut points = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for (i, &x) in gh.nodes.iter().enumerate() {
            for (j, &y) in gh.nodes.iter().enumerate() {
                points.push(Complex::new(T::of(x / s), T::of(y / s)));
                weights.push(T::of(gh.weights[i] * gh.weights[j] / ell));
            }
        }
        Ok(Self { points, weights, reference })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫ f(z) e^{-2ℓ|z|²} dV`.
    pub fn integrate(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Complex<T> {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&z, &w)| acc + f(z) * w)
    }

    /// Plain `∫ g(z) dV`, dividing out the Gaussian at each node.
    pub fn integrate_plain(&self, g: impl Fn(Complex<T>) -> Complex<T>) -> Complex<T> {
        let two = T::of(2.0);
        self.integrate(|z| g(z) * (two * self.reference * z.norm_sqr()).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_gamma_function() {
        let gh = GaussHermite::new(20).unwrap();
        let pi = std::f64::consts::PI;
        assert!((gh.integrate(|_| 1.0) - pi.sqrt()).abs() < 1e-14);
        assert!((gh.integrate(|x| x * x) - pi.sqrt() / 2.0).abs() < 1e-14);
        assert!((gh.integrate(|x| x.powi(8)) - 105.0 * pi.sqrt() / 16.0).abs() < 1e-12);
        assert!(gh.integrate(|x| x.powi(5)).abs() < 1e-14);
    }

    #[test]
    fn large_orders_converge() {
        for m in [1, 2, 3, 5, 60, 120] {
            let gh = GaussHermite::new(m).unwrap();
            let total: f64 = gh.weights.iter().sum();
            assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn plane_rule_polar_oracle() {
        let rule = PlaneRule::<f64>::new(8, 1.0).unwrap();
        let v = rule.integrate(|_| Complex::new(1.0, 0.0));
        assert!((v.re - std::f64::consts::PI).abs() < 1e-13);
    }
}
