use anyhow::{bail, Result};
use kernel_lab::galerkin::{HodgeComplex, SystemBuilder};
use kernel_lab::report::fmt_float;
use kernel_lab::weight::WeightPolynomial;
use kernel_lab::{Complex, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_numerical, Outcome, Rows, Rule};
use crate::config::GapConfig;

struct Run {
    out: Outcome,
    rows: Vec<Vec<String>>,
}

impl Run {
    fn row(&mut self, case: &str, lambda: f64, q: usize, degree: usize, value: Option<f64>) {
        let value = value.map(fmt_float).unwrap_or_default();
        self.rows.push(vec![case.into(), fmt_float(lambda), q.to_string(), degree.to_string(), value]);
    }

    /// Records numerical failures and passes other errors up.
    fn attempt<V>(&mut self, lambda: f64, degree: usize, r: kernel_lab::Result<V>) -> Result<Option<V>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_numerical(&e) => {
                self.out.failures.push(format!("lambda={lambda}, D={degree}: {e}"));
                Ok(None)
            }
            Err(e) => Err(anyhow::Error::new(e).context("gap")),
        }
    }

    fn gap(&mut self, lambda: f64, q: usize, degree: usize) -> Result<Option<f64>> {
        let weight = WeightPolynomial::diagonal_quadratic(&[lambda]);
        let built = SystemBuilder::new(q, degree).build(&weight);
        let g = self.attempt(lambda, degree, built)?.map(|s| s.spectral_gap());
        self.row("gap", lambda, q, degree, g);
        Ok(g)
    }
}

pub fn run(cfg: &GapConfig, seed: u64) -> Result<Outcome> {
    if cfg.degrees.len() < 2 {
        bail!("gap.degrees needs at least two entries");
    }
    let mut run = Run { out: Outcome::default(), rows: Vec::new() };

    let mut plateau = Vec::new();
    for &d in &cfg.degrees {
        plateau.push(run.gap(cfg.lambda, cfg.q, d)?);
    }
    let n = plateau.len();
    let rel = match (plateau[n - 2], plateau[n - 1]) {
        (Some(a), Some(b)) => (a - b).abs() / b,
        _ => f64::NAN,
    };
    run.out.check("plateau", rel, Rule::AtMost { tolerance: cfg.plateau_tolerance });
    run.out.detail("plateau_gap", plateau[n - 1]);

    let base = run.gap(cfg.lambda, cfg.q, cfg.ratio_degree)?;
    let mut worst = 0.0f64;
    for &s in &cfg.scales {
        let g = run.gap(s * cfg.lambda, cfg.q, cfg.ratio_degree)?;
        let dev = match (g, base) {
            (Some(g), Some(b)) => (g / (s * b) - 1.0).abs(),
            _ => f64::NAN,
        };
        worst = if dev.is_nan() || worst.is_nan() { f64::NAN } else { worst.max(dev) };
    }
    run.out.check("ratio_deviation", worst, Rule::AtMost { tolerance: cfg.ratio_tolerance });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual = 0.0f64;
    for &lambda in &cfg.hodge_lambdas {
        let q = usize::from(lambda < 0.0);
        let weight = WeightPolynomial::diagonal_quadratic(&[lambda]);
        let built = HodgeComplex::new(&weight, cfg.hodge_degree, None, None);
        let Some(complex) = run.attempt(lambda, cfg.hodge_degree, built)? else {
            residual = f64::NAN;
            continue;
        };
        let n = complex.system(q).basis().len();
        let samples: Vec<DVector<C64>> = (0..cfg.hodge_samples)
            .map(|_| DVector::from_fn(n, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        let r = complex.residual(q, &samples);
        let r = run.attempt(lambda, cfg.hodge_degree, r)?;
        run.row("hodge_residual", lambda, q, cfg.hodge_degree, r);
        residual = match r {
            Some(r) if !residual.is_nan() => residual.max(r),
            _ => f64::NAN,
        };
    }
    run.out.check("hodge_residual", residual, Rule::AtMost { tolerance: cfg.hodge_tolerance });

    let Run { mut out, rows } = run;
    out.table(&Rows { header: vec!["case", "lambda", "q", "D", "value"], rows })?;
    Ok(out)
}
