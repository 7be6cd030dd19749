//! Flat tori `C/(Z + τZ)`: curvature classification, Morse integrals, theta functions and Morse audits.
//!
//! Points are written in lattice coordinates `z = x₁ + τx₂`, `(x₁, x₂) ∈ [0,1)²`, with `dV = 2 Im τ dx₁dx₂`.
//! The flat weight of degree `N` is `πN y²/Im τ`, so `∫ R dV = 2πd` per unit `k`.

use nalgebra::{Complex, ComplexField, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{fmt_float, Table};
use crate::scalar::Real;

/// Sign dead-band for classifying curvature.
pub const DEGENERATE_BAND: f64 = 1e-12;

/// `amplitude · cos(2π(m₁x₁ + m₂x₂))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiMode {
    pub m1: i32,
    pub m2: i32,
    pub amplitude: f64,
}

/// Line bundle of degree `d` on `C/(Z + τZ)` with periodic weight perturbation `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusBundle<T> {
    tau: Complex<T>,
    degree: i64,
    psi: Vec<PsiMode>,
}

/// Curvature sign class of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexClass {
    /// `R > 0`, the set `M(0)`.
    Positive,
    /// `R < 0`, the set `M(1)`.
    Negative,
    Degenerate,
}

impl<T: Real> TorusBundle<T> {
    pub fn new(tau: Complex<T>, degree: i64, psi: Vec<PsiMode>) -> Result<Self> {
        if !(tau.im > T::zero()) {
            return Err(Error::InvalidParameter("Im tau must be positive".into()));
        }
        for m in &psi {
            if m.m1 == 0 && m.m2 == 0 {
                return Err(Error::InvalidParameter("psi modes must have nonzero frequency (mean zero)".into()));
            }
            if !m.amplitude.is_finite() {
                return Err(Error::InvalidParameter("psi amplitude must be finite".into()));
            }
        }
        Ok(Self { tau, degree, psi })
    }

    pub fn tau(&self) -> Complex<T> {
        self.tau
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn psi(&self) -> &[PsiMode] {
        &self.psi
    }

    /// `2 Im τ`.
    pub fn area(&self) -> T {
        T::of(2.0) * self.tau.im
    }

    /// `z = x₁ + τx₂`.
    pub fn point(&self, x1: T, x2: T) -> Complex<T> {
        Complex::new(x1, T::zero()) + self.tau * x2
    }

    fn phase(&self, m: &PsiMode, x1: T, x2: T) -> T {
        T::two_pi() * (T::of(f64::from(m.m1)) * x1 + T::of(f64::from(m.m2)) * x2)
    }

    /// `ψ` at lattice coordinates.
    pub fn psi_value(&self, x1: T, x2: T) -> T {
        self.psi
            .iter()
            .fold(T::zero(), |s, m| s + T::of(m.amplitude) * self.phase(m, x1, x2).cos())
    }

    /// `|∇θ|²` of the phase `θ = m₁x₁ + m₂x₂` as a function of `(x, y)`.
    fn grad_sq(&self, m: &PsiMode) -> T {
        let m1 = T::of(f64::from(m.m1));
        let m2 = T::of(f64::from(m.m2));
        let gy = (m2 - m1 * self.tau.re) / self.tau.im;
        m1 * m1 + gy * gy
    }

    /// Limit curvature `R = 2πd/area + 2∂²ψ/∂z∂z̄` at lattice coordinates.
    pub fn curvature(&self, x1: T, x2: T) -> T {
        let flat = T::two_pi() * T::of(self.degree as f64) / self.area();
        let pi2 = T::pi() * T::pi();
        self.psi.iter().fold(flat, |s, m| {
            s - T::of(2.0) * pi2 * self.grad_sq(m) * T::of(m.amplitude) * self.phase(m, x1, x2).cos()
        })
    }

    /// Highest frequency among `ψ` modes.
    pub fn max_frequency(&self) -> u32 {
        self.psi.iter().map(|m| m.m1.unsigned_abs().max(m.m2.unsigned_abs())).max().unwrap_or(0)
    }

    /// `N = k·d`, rejecting the flat case.
    pub fn bundle_degree(&self, k: u32) -> Result<i64> {
        let n = i64::from(k) * self.degree;
        if n == 0 {
            return Err(Error::FlatBundle);
        }
        Ok(n)
    }
}

pub fn classify<T: Real>(r: T) -> IndexClass {
    let band = T::of(DEGENERATE_BAND);
    if r > band {
        IndexClass::Positive
    } else if r < -band {
        IndexClass::Negative
    } else {
        IndexClass::Degenerate
    }
}

/// Pointwise curvature on an `n × n` lattice grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<T> {
    pub n: usize,
    /// Row-major by `x₂`, then `x₁`.
    pub values: Vec<T>,
    pub classes: Vec<IndexClass>,
}

impl<T: Real> CurvatureField<T> {
    pub fn count(&self, class: IndexClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Grid edges whose endpoints lie in different classes.
    pub fn boundary_crossings(&self) -> usize {
        let n = self.n;
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                let c = self.classes[i * n + j];
                if c != self.classes[i * n + (j + 1) % n] {
                    count += 1;
                }
                if c != self.classes[((i + 1) % n) * n + j] {
                    count += 1;
                }
            }
        }
        count
    }
}

fn check_grid<T: Real>(bundle: &TorusBundle<T>, n: usize) -> Result<()> {
    let need = (8 * bundle.max_frequency() as usize).max(2);
    if n < need {
        return Err(Error::InvalidParameter(format!(
            "grid of {n} points per axis does not resolve psi (need at least {need})"
        )));
    }
    Ok(())
}

/// Limit curvature and its sign classes on an `n × n` grid.
///
/// The limit curvature does not depend on `k`; `k` only has to give a non-flat bundle.
pub fn curvature_field<T: Real>(bundle: &TorusBundle<T>, k: u32, n: usize) -> Result<CurvatureField<T>> {
    bundle.bundle_degree(k)?;
    check_grid(bundle, n)?;
    let h = T::one() / T::of(n as f64);
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(bundle.curvature(T::of(j as f64) * h, T::of(i as f64) * h));
        }
    }
    let classes = values.iter().map(|&r| classify(r)).collect();
    Ok(CurvatureField { n, values, classes })
}

/// `(k/2π) ∫_{M(q)} |R| dV` with an error estimate from the half grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorseIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub boundary_crossings: usize,
}

fn morse_sum<T: Real>(bundle: &TorusBundle<T>, k: u32, q: usize, n: usize) -> Result<(f64, usize)> {
    let field = curvature_field(bundle, k, n)?;
    let target = if q == 0 { IndexClass::Positive } else { IndexClass::Negative };
    let sum = compensated_sum(
        field
            .values
            .iter()
            .zip(&field.classes)
            .filter(|(_, &c)| c == target)
            .map(|(&r, _)| r.abs().as_f64()),
    );
    let cell = bundle.area().as_f64() / (n * n) as f64;
    let value = f64::from(k) / (2.0 * std::f64::consts::PI) * sum * cell;
    Ok((value, field.boundary_crossings()))
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Morse integral over `M(q)`, `q ∈ {0, 1}`, on an `n × n` trapezoid grid.
pub fn morse_integrals<T: Real>(bundle: &TorusBundle<T>, k: u32, q: usize, n: usize) -> Result<MorseIntegral> {
    if q > 1 {
        return Err(Error::DegreeOutOfRange { q, n: 1 });
    }
    let (value, boundary_crossings) = morse_sum(bundle, k, q, n)?;
    let half = n / 2;
    let error_estimate = if boundary_crossings > 0 && half >= (8 * bundle.max_frequency() as usize).max(2) {
        (value - morse_sum(bundle, k, q, half)?.0).abs()
    } else {
        0.0
    };
    Ok(MorseIntegral { value, error_estimate, boundary_crossings })
}

/// `(h⁰, h¹)` of `L^k` from Riemann–Roch on a genus-one curve.
pub fn dolbeault_dims<T: Real>(bundle: &TorusBundle<T>, k: u32) -> Result<(u64, u64)> {
    let n = bundle.bundle_degree(k)?;
    Ok(if n > 0 { (n as u64, 0) } else { (0, n.unsigned_abs()) })
}

/// Theta basis of `H⁰(L^k)` in the localized convention `θ_j e^{-φ}`.
#[derive(Debug, Clone)]
pub struct ThetaBasis<'a, T> {
    bundle: &'a TorusBundle<T>,
    k: u32,
    n: usize,
    shells: i64,
}

impl<'a, T: Real> ThetaBasis<'a, T> {
    pub fn new(bundle: &'a TorusBundle<T>, k: u32) -> Result<Self> {
        let n = bundle.bundle_degree(k)?;
        if n < 0 {
            return Err(Error::InvalidParameter("theta basis needs k·d > 0".into()));
        }
        let scale = std::f64::consts::PI * n as f64 * bundle.tau.im.as_f64();
        let shells = (37.0 / scale).sqrt().ceil() as i64 + 2;
        Ok(Self { bundle, k, n: n as usize, shells })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Lattice shells kept on each side of the dominant term.
    pub fn shells(&self) -> i64 {
        self.shells
    }

    /// Bound on the relative size of the first dropped term.
    pub fn truncation_bound(&self) -> f64 {
        let s = (self.shells - 1) as f64;
        (-std::f64::consts::PI * self.n as f64 * self.bundle.tau.im.as_f64() * s * s).exp()
    }

    /// `θ_j(z) e^{-πN y²/Im τ - kψ}` for all `j` at lattice coordinates.
    pub fn values(&self, x1: T, x2: T) -> Vec<Complex<T>> {
        let tau = self.bundle.tau;
        let nf = T::of(self.n as f64);
        let pi = T::pi();
        let z = self.bundle.point(x1, x2);
        let y = z.im;
        let damp = (-T::of(f64::from(self.k)) * self.bundle.psi_value(x1, x2)).exp();
        (0..self.n)
            .map(|j| {
                let shift = T::of(j as f64) / nf;
                let centre = (-(x2 + shift)).round().as_f64() as i64;
                let mut sum = Complex::new(T::zero(), T::zero());
                for m in (centre - self.shells)..=(centre + self.shells) {
                    let a = T::of(m as f64) + shift;
                    let u = a * tau.im + y;
                    let re = -pi * nf * u * u / tau.im;
                    let im = pi * nf * a * a * tau.re + T::two_pi() * nf * a * z.re;
                    sum += Complex::new(re, im).exp();
                }
                sum * damp
            })
            .collect()
    }

    /// `∫ conj(s_i) s_j dV` by the periodic trapezoid rule on an `n × n` grid offset by `offset` cells.
    pub fn gram(&self, grid: usize, offset: T) -> DMatrix<Complex<T>> {
        let h = T::one() / T::of(grid as f64);
        let cell = self.bundle.area() * h * h;
        let rows: Vec<DMatrix<Complex<T>>> = (0..grid)
            .into_par_iter()
            .map(|i| {
                let mut acc = DMatrix::from_element(self.n, self.n, Complex::new(T::zero(), T::zero()));
                let x2 = (T::of(i as f64) + offset) * h;
                for j in 0..grid {
                    let x1 = (T::of(j as f64) + offset) * h;
                    let s = self.values(x1, x2);
                    for a in 0..self.n {
                        let ca = s[a].conj();
                        for b in 0..self.n {
                            acc[(a, b)] += ca * s[b];
                        }
                    }
                }
                acc
            })
            .collect();
        let total = rows
            .into_iter()
            .fold(DMatrix::from_element(self.n, self.n, Complex::new(T::zero(), T::zero())), |a, b| a + b);
        total * Complex::new(cell, T::zero())
    }
}

/// Outcome of the theta trace identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceCheck {
    pub dimension: u64,
    pub trace: f64,
    pub deviation: f64,
    /// `|tr(G⁻¹G) − N|` on the assembly grid (projector trace against its rank).
    pub projector_deviation: f64,
    pub truncation_bound: f64,
    pub grid: usize,
}

/// Default trapezoid grid for `N = k·d` theta functions.
pub fn default_theta_grid(n: u64, max_frequency: u32) -> usize {
    (8 * n as usize + 32).max(64).max(16 * max_frequency as usize)
}

/// `|∫ Tr P dV − k·d|` with the Gram matrix and the trace integral on staggered grids.
pub fn theta_trace_check<T: Real>(bundle: &TorusBundle<T>, k: u32, grid: Option<usize>) -> Result<TraceCheck> {
    let theta = ThetaBasis::new(bundle, k)?;
    let n = theta.len();
    let grid = grid.unwrap_or_else(|| default_theta_grid(n as u64, bundle.max_frequency()));
    let gram = theta.gram(grid, T::zero());
    let gram = (&gram + gram.adjoint()) * Complex::new(T::of(0.5), T::zero());
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("theta Gram matrix is not positive definite".into()))?;
    let offset = theta.gram(grid, T::of(0.5));
    let trace = chol.solve(&offset).trace().re;
    let projector = chol.solve(&gram).trace().re;
    let nf = T::of(n as f64);
    Ok(TraceCheck {
        dimension: n as u64,
        trace: trace.as_f64(),
        deviation: (trace - nf).abs().as_f64(),
        projector_deviation: (projector - nf).abs().as_f64(),
        truncation_bound: theta.truncation_bound(),
        grid,
    })
}

/// Local Morse comparison on the sub-rectangle `[a₁,b₁] × [a₂,b₂]` of lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMorse {
    /// `∫_K P(z,z) dV`.
    pub kernel_mass: f64,
    /// `(k/2π) ∫_{K ∩ M(0)} |R| dV`.
    pub morse_bound: f64,
}

pub fn local_morse_check<T: Real>(bundle: &TorusBundle<T>, k: u32, rect: [f64; 4], grid: usize) -> Result<LocalMorse> {
    let [a1, b1, a2, b2] = rect;
    if !(0.0 <= a1 && a1 < b1 && b1 <= 1.0 && 0.0 <= a2 && a2 < b2 && b2 <= 1.0) {
        return Err(Error::InvalidParameter("rectangle must lie in [0,1]²".into()));
    }
    let theta = ThetaBasis::new(bundle, k)?;
    let full = default_theta_grid(theta.len() as u64, bundle.max_frequency()).max(grid);
    let gram = theta.gram(full, T::zero());
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("theta Gram matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    let (h1, h2) = ((b1 - a1) / grid as f64, (b2 - a2) / grid as f64);
    let cell = bundle.area().as_f64() * h1 * h2;
    let mut mass = 0.0;
    let mut bound = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let x1 = a1 + (j as f64 + 0.5) * h1;
            let x2 = a2 + (i as f64 + 0.5) * h2;
            let s = nalgebra::DVector::from_vec(theta.values(T::of(x1), T::of(x2)));
            let diag = (s.transpose() * &inv * s.conjugate())[(0, 0)].re;
            mass += diag.as_f64() * cell;
            let r = bundle.curvature(T::of(x1), T::of(x2));
            if classify(r) == IndexClass::Positive {
                bound += r.as_f64() * cell;
            }
        }
    }
    Ok(LocalMorse { kernel_mass: mass, morse_bound: f64::from(k) / (2.0 * std::f64::consts::PI) * bound })
}

/// One `k` of a Morse audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseRow {
    pub k: u32,
    pub h0: u64,
    pub h1: u64,
    pub i0: f64,
    pub i1: f64,
    /// `I₀ + I₁`, the integral over `M(≤1)`.
    pub i_le1: f64,
    /// `I₀ − h⁰`.
    pub morse1_margin: f64,
    /// `(I₁ − I₀) − (h¹ − h⁰)`.
    pub morse2_margin: f64,
    /// `h⁰ − h¹ − k·c₁` with `c₁ = (1/2π)∫R` from Chern–Weil.
    pub morse3_margin: i64,
    /// `h⁰ − h¹ − (k/2π)∫R` with the integral done by quadrature.
    pub morse3_numeric: f64,
    pub error_estimate: f64,
    pub boundary_crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseReport {
    pub rows: Vec<MorseRow>,
    pub grid: usize,
}

impl MorseReport {
    pub fn morse1_holds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.morse1_margin >= -tol)
    }

    pub fn morse3_exact(&self) -> bool {
        self.rows.iter().all(|r| r.morse3_margin == 0)
    }
}

impl Table for MorseReport {
    fn header(&self) -> Vec<String> {
        [
            "k",
            "h0",
            "h1",
            "I0",
            "I1",
            "I_le1",
            "morse1_margin",
            "morse2_margin",
            "morse3_margin",
            "morse3_numeric",
            "error_estimate",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.h0.to_string(),
                    r.h1.to_string(),
                    fmt_float(r.i0),
                    fmt_float(r.i1),
                    fmt_float(r.i_le1),
                    fmt_float(r.morse1_margin),
                    fmt_float(r.morse2_margin),
                    r.morse3_margin.to_string(),
                    fmt_float(r.morse3_numeric),
                    fmt_float(r.error_estimate),
                ]
            })
            .collect()
    }
}

/// Checks the weak, strong and asymptotic Riemann–Roch forms of the Morse inequalities for each `k`.
pub fn audit_morse<T: Real>(bundle: &TorusBundle<T>, ks: &[u32], grid: usize) -> Result<MorseReport> {
    let rows = ks
        .iter()
        .map(|&k| {
            let (h0, h1) = dolbeault_dims(bundle, k)?;
            let m0 = morse_integrals(bundle, k, 0, grid)?;
            let m1 = morse_integrals(bundle, k, 1, grid)?;
            let field = curvature_field(bundle, k, grid)?;
            let cell = bundle.area().as_f64() / (grid * grid) as f64;
            let total = compensated_sum(field.values.iter().map(|r| r.as_f64())) * cell;
            let euler = h0 as i64 - h1 as i64;
            let chern = bundle.degree;
            Ok(MorseRow {
                k,
                h0,
                h1,
                i0: m0.value,
                i1: m1.value,
                i_le1: m0.value + m1.value,
                morse1_margin: m0.value - h0 as f64,
                morse2_margin: (m1.value - m0.value) - (h1 as f64 - h0 as f64),
                morse3_margin: euler - i64::from(k) * chern,
                morse3_numeric: euler as f64 - f64::from(k) / (2.0 * std::f64::consts::PI) * total,
                error_estimate: m0.error_estimate.max(m1.error_estimate),
                boundary_crossings: m0.boundary_crossings,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MorseReport { rows, grid })
}
