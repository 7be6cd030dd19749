//! Convergence experiments for scaled kernels: Bergman limits, vanishing, diagonal bounds, heat route.

use nalgebra::{Complex, ComplexField, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, HolomorphicBergman, SystemBuilder};
use crate::model_kernel::{eval_model_bergman, ModelSpectrum, MultiIndex};
use crate::report::{fit_line, fmt_float, fmt_opt, LineFit, Table};
use crate::scalar::Real;
use crate::weight::{extend_weight, scale_weight, DilatedWeight, ExtendedWeight, RealJet, Weight, WeightFamily, WeightPolynomial};

/// Numerical knobs shared by the scaling experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabSettings {
    /// Truncation degree `D`.
    pub degree: usize,
    /// Cutoff exponent for extended weights.
    pub epsilon: f64,
    /// Gauss–Hermite order; `None` picks the default rule.
    pub quadrature_order: Option<usize>,
    /// Grid nodes per real axis.
    pub grid_per_axis: usize,
    /// Radius of the disc containing the grid.
    pub grid_radius: f64,
}

impl Default for LabSettings {
    fn default() -> Self {
        Self { degree: 30, epsilon: 0.1, quadrature_order: None, grid_per_axis: 3, grid_radius: 1.5 }
    }
}

/// Square grid inscribed in the disc of radius `radius`.
pub fn square_grid<T: Real>(per_axis: usize, radius: T) -> Vec<Complex<T>> {
    let a = radius / T::of(2.0).sqrt();
    let axis: Vec<T> = if per_axis <= 1 {
        vec![T::zero()]
    } else {
        (0..per_axis)
            .map(|i| a * (T::of(2.0 * i as f64 / (per_axis - 1) as f64) - T::one()))
            .collect()
    };
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for &y in &axis {
        for &x in &axis {
            out.push(Complex::new(x, y));
        }
    }
    out
}

/// Scaled weight at one `k`: the polynomial itself when quadratic, else its extension.
#[derive(Debug, Clone)]
pub enum LabWeight<T> {
    Polynomial(WeightPolynomial<T>),
    Extended(ExtendedWeight<T>),
    /// `z ↦ φ̃(s·z)`, the unscaled view of an extended weight.
    Dilated(Box<DilatedWeight<ExtendedWeight<T>, T>>),
}

impl<T: Real> Weight<T> for LabWeight<T> {
    fn dim(&self) -> usize {
        match self {
            LabWeight::Polynomial(p) => p.n(),
            LabWeight::Extended(e) => e.dim(),
            LabWeight::Dilated(d) => d.dim(),
        }
    }

    fn jet(&self, z: &[Complex<T>]) -> RealJet<T> {
        match self {
            LabWeight::Polynomial(p) => p.jet(z),
            LabWeight::Extended(e) => e.jet(z),
            LabWeight::Dilated(d) => d.jet(z),
        }
    }

    fn value(&self, z: &[Complex<T>]) -> T {
        match self {
            LabWeight::Polynomial(p) => p.eval(z),
            LabWeight::Extended(e) => e.value(z),
            LabWeight::Dilated(d) => d.value(z),
        }
    }

    fn polynomial_degree(&self) -> Option<usize> {
        match self {
            LabWeight::Polynomial(p) => Some(p.degree()),
            LabWeight::Extended(_) | LabWeight::Dilated(_) => None,
        }
    }
}

/// Curvature `λ` of a gauge-normal quadratic model `λ|z|²` in one variable.
pub fn model_lambda<T: Real>(model: &WeightPolynomial<T>) -> Result<T> {
    if model.n() != 1 {
        return Err(Error::Unsupported("scaling experiments are limited to n = 1".into()));
    }
    let one = MultiIndex(vec![1]);
    let lambda = model.coefficient(&one, &one).re;
    let expected = WeightPolynomial::diagonal_quadratic(&[lambda]);
    if lambda == T::zero() || model.sub(&expected).terms().count() != 0 {
        return Err(Error::InvalidParameter(
            "quadratic part of the base must be gauge-normal and nondegenerate".into(),
        ));
    }
    Ok(lambda)
}

/// Scaled weight for index `k` and its model curvature.
pub fn lab_weight<T: Real>(family: &WeightFamily<T>, k: u32, settings: &LabSettings) -> Result<(LabWeight<T>, T)> {
    let model = family.model();
    let lambda = model_lambda(&model)?;
    let scaled = scale_weight(family, k);
    if scaled.degree() <= 2 {
        return Ok((LabWeight::Polynomial(scaled), lambda));
    }
    let ext = extend_weight(&scaled, &model, T::of(settings.epsilon), family.ck(k))?;
    Ok((LabWeight::Extended(ext), lambda))
}

/// Unscaled weight `φ_k` for index `k`, independent of the scaled route when polynomial.
fn unscaled_weight<T: Real>(family: &WeightFamily<T>, k: u32, scaled: &LabWeight<T>) -> LabWeight<T> {
    match scaled {
        LabWeight::Polynomial(_) => LabWeight::Polynomial(family.assemble(k)),
        other => other.clone().dilated(family.ck(k).sqrt()),
    }
}

impl<T: Real> LabWeight<T> {
    fn dilated(self, factor: T) -> LabWeight<T> {
        match self {
            LabWeight::Polynomial(p) => LabWeight::Polynomial(p.dilate(factor)),
            LabWeight::Extended(e) => LabWeight::Dilated(Box::new(DilatedWeight { inner: e, factor })),
            LabWeight::Dilated(d) => {
                let DilatedWeight { inner, factor: f } = *d;
                LabWeight::Dilated(Box::new(DilatedWeight { inner, factor: f * factor }))
            }
        }
    }
}

fn sup_abs<T: Real>(m: &DMatrix<Complex<T>>) -> f64 {
    m.iter().map(|v| v.modulus().as_f64()).fold(0.0, f64::max)
}

fn model_matrix<T: Real>(spec: &ModelSpectrum<T>, q: usize, grid: &[Complex<T>]) -> Result<DMatrix<Complex<T>>> {
    let mut m = DMatrix::from_element(grid.len(), grid.len(), Complex::new(T::zero(), T::zero()));
    for (i, &z) in grid.iter().enumerate() {
        for (j, &w) in grid.iter().enumerate() {
            m[(i, j)] = eval_model_bergman(spec, q, &[z], &[w])?.value();
        }
    }
    Ok(m)
}

fn scaled_points<T: Real>(grid: &[Complex<T>], s: T) -> Vec<Complex<T>> {
    grid.iter().map(|&z| z * s).collect()
}

/// One `k` of a convergence run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: u32,
    pub ck: f64,
    pub error: Option<f64>,
    pub rank: Option<usize>,
    pub gap: Option<f64>,
    pub route_deviation: Option<f64>,
    pub slope_so_far: Option<f64>,
    pub failure: Option<String>,
}

impl ConvergenceRow {
    fn new(k: u32, ck: f64) -> Self {
        Self { k, ck, error: None, rank: None, gap: None, route_deviation: None, slope_so_far: None, failure: None }
    }
}

/// Per-`k` sup-grid errors with a log-log slope fit over the largest four `C_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub slope: Option<LineFit>,
    pub threshold_exponent: Option<f64>,
    pub grid: Vec<[f64; 2]>,
}

/// Number of trailing points used by slope fits.
pub const SLOPE_WINDOW: usize = 4;

fn slope_over(rows: &[ConvergenceRow]) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.error.filter(|e| *e > 0.0 && e.is_finite()).map(|e| (r.ck.ln(), e.ln())))
        .collect();
    let tail = &pts[pts.len().saturating_sub(SLOPE_WINDOW)..];
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail.iter().copied().unzip();
    fit_line(&xs, &ys)
}

impl ConvergenceReport {
    fn assemble<T: Real>(mut rows: Vec<ConvergenceRow>, threshold_exponent: Option<f64>, grid: &[Complex<T>]) -> Self {
        rows.sort_by_key(|r| r.k);
        for i in 0..rows.len() {
            rows[i].slope_so_far = slope_over(&rows[..=i]).map(|f| f.slope);
        }
        let slope = slope_over(&rows);
        let grid = grid.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect();
        Self { rows, slope, threshold_exponent, grid }
    }

    pub fn errors(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// True when every error exists and each is strictly below its predecessor.
    pub fn strictly_decreasing(&self) -> bool {
        let e: Option<Vec<f64>> = self.errors().into_iter().collect();
        e.is_some_and(|e| e.windows(2).all(|w| w[1] < w[0]))
    }

    pub fn max_error(&self) -> Option<f64> {
        self.errors().into_iter().try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))
    }

    pub fn failures(&self) -> Vec<(u32, String)> {
        self.rows.iter().filter_map(|r| r.failure.clone().map(|f| (r.k, f))).collect()
    }
}

impl Table for ConvergenceReport {
    fn header(&self) -> Vec<String> {
        ["k", "C_k", "error", "rank", "slope_so_far", "gap", "route_deviation", "failure"]
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
                    fmt_float(r.ck),
                    fmt_opt(r.error),
                    r.rank.map(|v| v.to_string()).unwrap_or_default(),
                    fmt_opt(r.slope_so_far),
                    fmt_opt(r.gap),
                    fmt_opt(r.route_deviation),
                    r.failure.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }
}

fn check_ks(ks: &[u32]) -> Result<()> {
    if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("k schedule must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

fn bergman_pair<T: Real>(
    family: &WeightFamily<T>,
    k: u32,
    settings: &LabSettings,
    grid: &[Complex<T>],
) -> Result<(DMatrix<Complex<T>>, DMatrix<Complex<T>>)> {
    let (weight, lambda) = lab_weight(family, k, settings)?;
    let anti = lambda < T::zero();
    let ck = family.ck(k);
    let unscaled = unscaled_weight(family, k, &weight);
    let scaled = HolomorphicBergman::new(weight, anti, settings.degree, Some(lambda.abs()), settings.quadrature_order)?
        .kernel_matrix(grid, grid);
    let zoom = scaled_points(grid, ck.sqrt().recip());
    let direct = HolomorphicBergman::new(unscaled, anti, settings.degree, Some(lambda.abs() * ck), settings.quadrature_order)?
        .kernel_matrix(&zoom, &zoom)
        * Complex::new(ck.recip(), T::zero());
    Ok((scaled, direct))
}

/// Scaled Bergman kernels against the model kernel along `ks`.
pub fn scaled_bergman_convergence<T: Real>(family: &WeightFamily<T>, ks: &[u32], settings: &LabSettings) -> Result<ConvergenceReport> {
    check_ks(ks)?;
    let lambda = model_lambda(&family.model())?;
    let spec = ModelSpectrum::new(vec![lambda])?;
    let q = spec.q0();
    let grid = square_grid(settings.grid_per_axis, T::of(settings.grid_radius));
    let reference = model_matrix(&spec, q, &grid)?;
    let rows = ks
        .par_iter()
        .map(|&k| {
            let mut row = ConvergenceRow::new(k, family.ck(k).as_f64());
            match bergman_pair(family, k, settings, &grid) {
                Ok((scaled, direct)) => {
                    row.error = Some(sup_abs(&(&scaled - &reference)));
                    row.route_deviation = Some(sup_abs(&(&scaled - &direct)));
                }
                Err(e) => row.failure = Some(format!("k={k}, D={}: {e}", settings.degree)),
            }
            row
        })
        .collect();
    Ok(ConvergenceReport::assemble(rows, None, &grid))
}

fn scaled_system<T: Real>(family: &WeightFamily<T>, k: u32, q: usize, settings: &LabSettings) -> Result<GalerkinSystem<T>> {
    let (weight, lambda) = lab_weight(family, k, settings)?;
    SystemBuilder::new(q, settings.degree)
        .reference(lambda.abs())
        .maybe_quadrature_order(settings.quadrature_order)
        .build(&weight)
}

/// Spectral projectors at `c = C_k^{-d}` for the unscaled operator, i.e. `C_k^{-d-1}` after scaling.
pub fn vanishing_convergence<T: Real>(
    family: &WeightFamily<T>,
    q: usize,
    ks: &[u32],
    d: f64,
    settings: &LabSettings,
) -> Result<ConvergenceReport> {
    check_ks(ks)?;
    model_lambda(&family.model())?;
    let grid = square_grid(settings.grid_per_axis, T::of(settings.grid_radius));
    let rows = ks
        .par_iter()
        .map(|&k| {
            let ck = family.ck(k);
            let mut row = ConvergenceRow::new(k, ck.as_f64());
            match scaled_system(family, k, q, settings) {
                Ok(system) => {
                    let c = ck.powf(T::of(-d - 1.0));
                    let rank = system.count_below(c);
                    let sup = if rank == 0 {
                        0.0
                    } else {
                        sup_abs(&system.kernel_matrix(|m| if m <= c { T::one() } else { T::zero() }, &grid, &grid))
                    };
                    row.rank = Some(rank);
                    row.error = Some(sup);
                    row.gap = Some(system.spectral_gap().as_f64());
                }
                Err(e) => row.failure = Some(format!("k={k}, D={}: {e}", settings.degree)),
            }
            row
        })
        .collect();
    Ok(ConvergenceReport::assemble(rows, Some(d), &grid))
}

/// Diagonal values `C_k^{-1}|P_k(p, p)|` per point and `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalScan {
    pub ks: Vec<u32>,
    pub cks: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// `values[i][j]` for `ks[i]` and `points[j]`.
    pub values: Vec<Vec<f64>>,
    /// `|λ(p)|/π` when matched, `0` otherwise.
    pub limits: Vec<f64>,
    pub maxima: Vec<f64>,
    pub bound: f64,
    /// False when the maxima grow over the last three `k` without slowing down.
    pub bounded: bool,
}

impl Table for DiagonalScan {
    fn header(&self) -> Vec<String> {
        ["k", "C_k", "re_p", "im_p", "value", "limit"].iter().map(|s| s.to_string()).collect()
    }

    fn records(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for (i, k) in self.ks.iter().enumerate() {
            for (j, p) in self.points.iter().enumerate() {
                out.push(vec![
                    k.to_string(),
                    fmt_float(self.cks[i]),
                    fmt_float(p[0]),
                    fmt_float(p[1]),
                    fmt_float(self.values[i][j]),
                    fmt_float(self.limits[j]),
                ]);
            }
        }
        out
    }
}

/// Growth over the last three entries that does not slow down.
fn sustained_growth(values: &[f64]) -> bool {
    let tail = &values[values.len().saturating_sub(3)..];
    if tail.len() < 3 {
        return false;
    }
    let (d1, d2) = (tail[1] - tail[0], tail[2] - tail[1]);
    d1 > tail[0].abs() * 1e-9 && d2 >= 0.9 * d1
}

/// Re-centers the family at each point and records the scaled kernel on the diagonal.
pub fn diagonal_bound_scan<T: Real>(
    family: &WeightFamily<T>,
    q: usize,
    ks: &[u32],
    d: f64,
    points: &[Complex<T>],
    settings: &LabSettings,
) -> Result<DiagonalScan> {
    check_ks(ks)?;
    let local: Vec<WeightFamily<T>> = points.iter().map(|p| family.recentered(&[*p])).collect::<Result<_>>()?;
    let lambdas: Vec<T> = local.iter().map(|f| model_lambda(&f.model())).collect::<Result<_>>()?;
    let origin = Complex::new(T::zero(), T::zero());
    let jobs: Vec<(usize, usize)> = (0..ks.len()).flat_map(|i| (0..points.len()).map(move |j| (i, j))).collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let k = ks[i];
            let lambda = lambdas[j];
            let matched = usize::from(lambda < T::zero()) == q;
            let value = if matched {
                let (weight, _) = lab_weight(&local[j], k, settings)?;
                HolomorphicBergman::new(weight, lambda < T::zero(), settings.degree, Some(lambda.abs()), settings.quadrature_order)?
                    .kernel(origin, origin)
            } else {
                let system = scaled_system(&local[j], k, q, settings)?;
                let c = local[j].ck(k).powf(T::of(-d - 1.0));
                system.spectral_projector_kernel(c, origin, origin).value()
            };
            Ok(value.modulus().as_f64())
        })
        .collect();
    let mut values = vec![vec![0.0; points.len()]; ks.len()];
    for (&(i, j), r) in jobs.iter().zip(results) {
        values[i][j] = r?;
    }
    let limits = lambdas
        .iter()
        .map(|&l| if usize::from(l < T::zero()) == q { l.abs().as_f64() / std::f64::consts::PI } else { 0.0 })
        .collect();
    let maxima: Vec<f64> = values.iter().map(|v| v.iter().copied().fold(0.0, f64::max)).collect();
    let bound = maxima.iter().copied().fold(0.0, f64::max);
    let growing = sustained_growth(&maxima);
    Ok(DiagonalScan {
        ks: ks.to_vec(),
        cks: ks.iter().map(|&k| family.ck.value(k)).collect(),
        points: points.iter().map(|p| [p.re.as_f64(), p.im.as_f64()]).collect(),
        values,
        limits,
        maxima,
        bound: bound.max(0.0),
        bounded: bound.is_finite() && !growing,
    })
}

/// One `(k, t)` cell of the heat comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatRow {
    pub k: u32,
    pub ck: f64,
    pub t: f64,
    /// Sup-grid `|H(t) − P|` through the unscaled operator at time `t/C_k`.
    pub difference: f64,
    /// Same quantity computed directly with the scaled weight.
    pub scaled_difference: f64,
    pub gap: f64,
}

/// Log-linear fit of the heat difference in `t` for one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatFit {
    pub k: u32,
    pub gap: f64,
    pub fit: Option<LineFit>,
    /// `|slope + gap| / gap`.
    pub relative_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatReport {
    pub rows: Vec<HeatRow>,
    pub fits: Vec<HeatFit>,
    /// Largest spread over `k` of the per-`t` differences.
    pub k_spread: f64,
    /// Largest disagreement between the scaled and unscaled routes.
    pub route_deviation: f64,
}

impl Table for HeatReport {
    fn header(&self) -> Vec<String> {
        ["k", "C_k", "t", "difference", "scaled_difference", "gap"].iter().map(|s| s.to_string()).collect()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    fmt_float(r.ck),
                    fmt_float(r.t),
                    fmt_float(r.difference),
                    fmt_float(r.scaled_difference),
                    fmt_float(r.gap),
                ]
            })
            .collect()
    }
}

fn heat_differences<T: Real>(system: &GalerkinSystem<T>, ts: &[T], zs: &[Complex<T>], factor: T) -> Vec<f64> {
    let tol = system.kernel_tolerance();
    ts.iter()
        .map(|&t| {
            let m = system.kernel_matrix(|mu| if mu <= tol { T::zero() } else { (-t * mu).exp() }, zs, zs);
            sup_abs(&m) * factor.as_f64()
        })
        .collect()
}

/// `sup |H(t) − P|` over the grid for each `(k, t)`, by both scaling routes.
pub fn heat_route_comparison<T: Real>(family: &WeightFamily<T>, ks: &[u32], ts: &[f64], settings: &LabSettings) -> Result<HeatReport> {
    check_ks(ks)?;
    if ts.is_empty() || ts.windows(2).any(|w| w[1] <= w[0]) || ts[0] <= 0.0 {
        return Err(Error::InvalidParameter("t schedule must be positive and increasing".into()));
    }
    let lambda = model_lambda(&family.model())?;
    let q = usize::from(lambda < T::zero());
    let grid = square_grid(settings.grid_per_axis, T::of(settings.grid_radius));
    let per_k: Vec<Result<(Vec<HeatRow>, HeatFit)>> = ks
        .par_iter()
        .map(|&k| {
            let ck = family.ck(k);
            let (weight, _) = lab_weight(family, k, settings)?;
            let unscaled = unscaled_weight(family, k, &weight);
            let scaled_sys = SystemBuilder::new(q, settings.degree)
                .reference(lambda.abs())
                .maybe_quadrature_order(settings.quadrature_order)
                .build(&weight)?;
            let direct_sys = SystemBuilder::new(q, settings.degree)
                .reference(lambda.abs() * ck)
                .maybe_quadrature_order(settings.quadrature_order)
                .build(&unscaled)?;
            let tt: Vec<T> = ts.iter().map(|&t| T::of(t)).collect();
            let scaled = heat_differences(&scaled_sys, &tt, &grid, T::one());
            let t_direct: Vec<T> = tt.iter().map(|&t| t / ck).collect();
            let direct = heat_differences(&direct_sys, &t_direct, &scaled_points(&grid, ck.sqrt().recip()), ck.recip());
            let gap = scaled_sys.spectral_gap().as_f64();
            let rows: Vec<HeatRow> = ts
                .iter()
                .enumerate()
                .map(|(i, &t)| HeatRow { k, ck: ck.as_f64(), t, difference: direct[i], scaled_difference: scaled[i], gap })
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.difference > 0.0).map(|r| (r.t, r.difference.ln())).unzip();
            let fit = fit_line(&xs, &ys);
            let relative_deviation = fit.map(|f| (f.slope + gap).abs() / gap);
            Ok((rows, HeatFit { k, gap, fit, relative_deviation }))
        })
        .collect();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for r in per_k {
        let (rs, f) = r?;
        rows.extend(rs);
        fits.push(f);
    }
    let mut k_spread = 0.0f64;
    for &t in ts {
        let vals: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.difference).collect();
        let hi = vals.iter().copied().fold(f64::MIN, f64::max);
        let lo = vals.iter().copied().fold(f64::MAX, f64::min);
        k_spread = k_spread.max(hi - lo);
    }
    let route_deviation = rows.iter().map(|r| (r.difference - r.scaled_difference).abs()).fold(0.0, f64::max);
    Ok(HeatReport { rows, fits, k_spread, route_deviation })
}
