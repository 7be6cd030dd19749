use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use kernel_lab::galerkin::{bergman_kernel_numeric, HolomorphicBergman};
use kernel_lab::model_kernel::{eval_model_basis, eval_model_bergman, model_kernel_from_basis, ModelSpectrum, MultiIndex};
use kernel_lab::quadrature::PlaneRule;
use kernel_lab::report::fmt_float;
use kernel_lab::scaling::square_grid;
use kernel_lab::weight::WeightPolynomial;
use kernel_lab::{Complex, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_numerical, Outcome, Rows, Rule};
use crate::config::ModelConfig;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn join(ls: &[f64]) -> String {
    ls.iter().map(|l| fmt_float(*l)).collect::<Vec<_>>().join(";")
}

/// Origin plus four rings of eight points, rotated per ring.
fn disc_points(radius: f64) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0)];
    for i in 1..=4 {
        let r = radius * f64::from(i) / 4.0;
        for j in 0..8 {
            let t = f64::from(j) * PI / 4.0 + 0.1 * f64::from(i);
            out.push(c(r * t.cos(), r * t.sin()));
        }
    }
    out
}

fn random_spectrum(rng: &mut ChaCha8Rng, max_n: usize) -> Vec<f64> {
    let n = rng.gen_range(1..=max_n);
    (0..n)
        .map(|_| {
            let m: f64 = rng.gen_range(0.2..3.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

pub fn run(cfg: &ModelConfig, seed: u64) -> Result<Outcome> {
    if cfg.max_dimension == 0 {
        bail!("model.max_dimension must be positive");
    }
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut row = |case: &str, i: usize, ls: &[f64], dev: f64| {
        rows.push(vec![case.to_string(), i.to_string(), join(ls), fmt_float(dev)]);
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..cfg.spectra {
        let ls = random_spectrum(&mut rng, cfg.max_dimension);
        let expected = ls.iter().map(|l| l.abs()).product::<f64>() / PI.powi(ls.len() as i32);
        let spec = ModelSpectrum::sorted(ls.clone())?;
        let origin = vec![c(0.0, 0.0); ls.len()];
        let v = eval_model_bergman(&spec, spec.q0(), &origin, &origin)?.value();
        let dev = (v - c(expected, 0.0)).norm();
        worst = worst.max(dev);
        row("prefactor", i, &ls, dev);
    }
    out.check("prefactor", worst, Rule::AtMost { tolerance: cfg.prefactor_tolerance });

    let mut worst = 0.0f64;
    for (i, &lambda) in cfg.lambdas.iter().enumerate() {
        let spec = ModelSpectrum::new(vec![lambda]).context("model.lambdas")?;
        let rule = PlaneRule::new(cfg.quadrature_order, lambda.abs()).context("model.quadrature_order")?;
        let samples = (0..=cfg.max_order)
            .map(|a| rule.points.iter().map(|z| eval_model_basis(&spec, &MultiIndex(vec![a]), &[*z])).collect())
            .collect::<kernel_lab::Result<Vec<Vec<C64>>>>()?;
        let mut dev = 0.0f64;
        for (a, sa) in samples.iter().enumerate() {
            for (b, sb) in samples.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for (j, z) in rule.points.iter().enumerate() {
                    let gauss = (2.0 * lambda.abs() * z.norm_sqr()).exp();
                    acc += sa[j].conj() * sb[j] * (rule.weights[j] * gauss);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((acc - c(target, 0.0)).norm());
            }
        }
        worst = worst.max(dev);
        row("orthonormality", i, &[lambda], dev);
    }
    out.check("orthonormality", worst, Rule::AtMost { tolerance: cfg.orthonormality_tolerance });

    let spec = ModelSpectrum::new(vec![1.0])?;
    let pts = disc_points(cfg.expansion_radius);
    let mut worst = 0.0f64;
    for z in &pts {
        for w in &pts {
            let a = model_kernel_from_basis(&spec, 0, cfg.expansion_degree, &[*z], &[*w])?;
            let b = eval_model_bergman(&spec, 0, &[*z], &[*w])?;
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    row("expansion", 0, &[1.0], worst);
    out.check("expansion", worst, Rule::AtMost { tolerance: cfg.expansion_tolerance });

    let grid = square_grid(cfg.grid_per_axis, cfg.grid_radius);
    let mut worst = 0.0f64;
    let mut broken = false;
    for (i, &lambda) in cfg.galerkin_lambdas.iter().enumerate() {
        let spec = ModelSpectrum::new(vec![lambda]).context("model.galerkin_lambdas")?;
        let q = spec.q0();
        let weight = WeightPolynomial::diagonal_quadratic(&[lambda]);
        let bergman = match HolomorphicBergman::new(weight, lambda < 0.0, cfg.galerkin_degree, None, None) {
            Ok(b) => b,
            Err(e) if is_numerical(&e) => {
                out.failures.push(format!("lambda={lambda}, D={}: {e}", cfg.galerkin_degree));
                broken = true;
                continue;
            }
            Err(e) => return Err(e).context("model.galerkin_lambdas"),
        };
        let mut dev = 0.0f64;
        for z in &grid {
            for w in &grid {
                let exact = eval_model_bergman(&spec, q, &[*z], &[*w])?.value();
                dev = dev.max((bergman_kernel_numeric(&bergman, *z, *w) - exact).norm());
            }
        }
        worst = worst.max(dev);
        row("galerkin", i, &[lambda], dev);
    }
    let worst = if broken { f64::NAN } else { worst };
    out.check("galerkin", worst, Rule::AtMost { tolerance: cfg.galerkin_tolerance });

    out.table(&Rows { header: vec!["case", "index", "lambdas", "deviation"], rows })?;
    Ok(out)
}
