use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use kernel_lab::galerkin::{bergman_kernel_numeric, HodgeComplex, HolomorphicBergman, SystemBuilder};
use kernel_lab::model_kernel::{eval_model_basis, eval_model_bergman, model_kernel_from_basis, ModelSpectrum, MultiIndex};
use kernel_lab::quadrature::PlaneRule;
use kernel_lab::scaling::{heat_route_comparison, scaled_bergman_convergence, square_grid, vanishing_convergence, LabSettings};
use kernel_lab::torus::{audit_morse, curvature_field, theta_trace_check, PsiMode, TorusBundle};
use kernel_lab::weight::{CkRule, WeightFamily, WeightPolynomial};
use kernel_lab::{Complex, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn quadratic(lambda: f64, ck: CkRule) -> WeightFamily<f64> {
    WeightFamily::new(WeightPolynomial::diagonal_quadratic(&[lambda]), ck, Vec::new()).unwrap()
}

fn cubic(lambda: f64, coeff: f64, ck: CkRule) -> WeightFamily<f64> {
    let base = WeightPolynomial::diagonal_quadratic(&[lambda]).add(&WeightPolynomial::re_monomial(2, 1, c(coeff, 0.0)));
    WeightFamily::new(base, ck, Vec::new()).unwrap()
}

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

fn model_prefactor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let origin = [c(0.0, 0.0); 3];
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let lambdas: Vec<f64> = (0..n)
            .map(|_| {
                let m: f64 = rng.gen_range(0.2..3.0);
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let expected = lambdas.iter().map(|l| l.abs()).product::<f64>() / PI.powi(n as i32);
        let spec = ModelSpectrum::sorted(lambdas).map_err(|e| e.to_string())?;
        let v = eval_model_bergman(&spec, spec.q0(), &origin[..n], &origin[..n]).map_err(|e| e.to_string())?;
        worst = worst.max((v.value() - c(expected, 0.0)).norm());
    }
    verdict(worst <= 1e-12, format!("max deviation {worst:.3e} (tol 1e-12)"))
}

fn basis_orthonormality() -> Outcome {
    let mut worst = 0.0f64;
    for lambda in [0.5, 1.0, 3.0] {
        let spec = ModelSpectrum::new(vec![lambda]).unwrap();
        let rule = PlaneRule::new(16, lambda).unwrap();
        let samples: Vec<Vec<C64>> = (0..=6u32)
            .map(|a| rule.points.iter().map(|z| eval_model_basis(&spec, &MultiIndex(vec![a]), &[*z]).unwrap()).collect())
            .collect();
        for a in 0..=6 {
            for b in 0..=6 {
                let mut acc = c(0.0, 0.0);
                for (i, z) in rule.points.iter().enumerate() {
                    let gauss = (2.0 * lambda * z.norm_sqr()).exp();
                    acc += samples[a][i].conj() * samples[b][i] * (rule.weights[i] * gauss);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc - c(target, 0.0)).norm());
            }
        }
    }
    verdict(worst <= 1e-8, format!("max |<Ψa,Ψb> - δ| {worst:.3e} (tol 1e-8)"))
}

fn expansion_consistency() -> Outcome {
    let spec = ModelSpectrum::new(vec![1.0]).unwrap();
    let pts = disc_points(1.0);
    let mut worst = 0.0f64;
    for z in &pts {
        for w in &pts {
            let a = model_kernel_from_basis(&spec, 0, 40, &[*z], &[*w]).unwrap();
            let b = eval_model_bergman(&spec, 0, &[*z], &[*w]).unwrap();
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    verdict(worst <= 1e-6, format!("sup over bidisk {worst:.3e} (tol 1e-6)"))
}

fn galerkin_bergman() -> Outcome {
    let grid = square_grid(3, 1.5);
    let mut worst = 0.0f64;
    for lambda in [1.0, 2.0] {
        let spec = ModelSpectrum::new(vec![lambda]).unwrap();
        let weight = WeightPolynomial::diagonal_quadratic(&[lambda]);
        let bergman = HolomorphicBergman::new(weight, false, 30, None, None).map_err(|e| e.to_string())?;
        for z in &grid {
            for w in &grid {
                let exact = eval_model_bergman(&spec, 0, &[*z], &[*w]).unwrap().value();
                worst = worst.max((bergman_kernel_numeric(&bergman, *z, *w) - exact).norm());
            }
        }
    }
    verdict(worst <= 1e-6, format!("max deviation on 9x9 grid {worst:.3e} (tol 1e-6)"))
}

fn scaling_convergence() -> Outcome {
    let ks: Vec<u32> = (1..=7).collect();
    let rule = CkRule::Geometric { ratio: 4.0 };
    let settings = LabSettings::default();
    let report = scaled_bergman_convergence(&cubic(1.0, 0.5, rule), &ks, &settings).map_err(|e| e.to_string())?;
    let control = scaled_bergman_convergence(&quadratic(1.0, rule), &ks, &settings).map_err(|e| e.to_string())?;
    let slope = report.slope.map(|f| f.slope);
    let control_max = control.max_error();
    let ok = report.strictly_decreasing()
        && slope.is_some_and(|s| (s + 0.5).abs() <= 0.2)
        && control_max.is_some_and(|e| e <= 1e-6);
    verdict(
        ok,
        format!(
            "slope {:?} (target -0.5 ± 0.2), decreasing {}, control max {:?} (tol 1e-6)",
            slope,
            report.strictly_decreasing(),
            control_max
        ),
    )
}

fn vanishing() -> Outcome {
    let ks: Vec<u32> = (1..=7).collect();
    let rule = CkRule::Geometric { ratio: 4.0 };
    let settings = LabSettings { degree: 16, ..LabSettings::default() };
    let mut worst_rank = 0usize;
    for d in [1.0, 2.0] {
        for (lambda, q) in [(1.0, 1usize), (-1.0, 0usize)] {
            let report = vanishing_convergence(&quadratic(lambda, rule), q, &ks, d, &settings).map_err(|e| e.to_string())?;
            for row in report.rows.iter().filter(|r| r.ck >= 16.0) {
                let rank = row.rank.ok_or_else(|| format!("k={} failed: {:?}", row.k, row.failure))?;
                worst_rank = worst_rank.max(rank);
            }
        }
    }
    let control = vanishing_convergence(&quadratic(1.0, rule), 0, &ks, 1.0, &settings).map_err(|e| e.to_string())?;
    let control_min = control.rows.iter().filter(|r| r.ck >= 16.0).filter_map(|r| r.rank).min().unwrap_or(0);
    verdict(
        worst_rank == 0 && control_min >= 1,
        format!("max mismatched rank {worst_rank} (want 0), min matched rank {control_min} (want >= 1)"),
    )
}

fn spectral_gap() -> Outcome {
    let gap = |lambda: f64, degree: usize| -> Result<f64, String> {
        let weight = WeightPolynomial::diagonal_quadratic(&[lambda]);
        let system = SystemBuilder::new(1, degree).build(&weight).map_err(|e| e.to_string())?;
        Ok(system.spectral_gap())
    };
    let g24 = gap(1.0, 24)?;
    let g32 = gap(1.0, 32)?;
    let plateau = (g24 - g32).abs() / g32;
    let base = gap(1.0, 16)?;
    let mut ratio_dev = 0.0f64;
    for k in [2.0, 4.0] {
        ratio_dev = ratio_dev.max((gap(k, 16)? / (k * base) - 1.0).abs());
    }
    verdict(
        plateau <= 0.02 && ratio_dev <= 0.05,
        format!("g(24) {g24:.6}, g(32) {g32:.6}, plateau {plateau:.2e} (tol 0.02), k-ratio deviation {ratio_dev:.2e} (tol 0.05)"),
    )
}

fn hodge_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for (lambda, q) in [(1.0, 0usize), (-1.0, 1usize)] {
        let weight = WeightPolynomial::diagonal_quadratic(&[lambda]);
        let complex = HodgeComplex::new(&weight, 16, None, None).map_err(|e| e.to_string())?;
        let n = complex.system(q).basis().len();
        let samples: Vec<DVector<C64>> = (0..20)
            .map(|_| DVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        worst = worst.max(complex.residual(q, &samples).map_err(|e| e.to_string())?);
    }
    verdict(worst <= 1e-6, format!("max residual {worst:.3e} (tol 1e-6)"))
}

fn heat_route() -> Outcome {
    let settings = LabSettings { degree: 20, ..LabSettings::default() };
    let family = quadratic(1.0, CkRule::Linear { slope: 1.0 });
    let report = heat_route_comparison(&family, &[1, 2, 3], &[1.0, 2.0, 4.0, 8.0], &settings).map_err(|e| e.to_string())?;
    let worst = report.fits.iter().map(|f| f.relative_deviation.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let decreasing = report.rows.windows(2).filter(|w| w[0].k == w[1].k).all(|w| w[1].difference < w[0].difference);
    verdict(
        worst <= 0.1 && decreasing && report.k_spread <= 1e-8,
        format!(
            "slope deviation {worst:.3e} (tol 0.1), decreasing in t {decreasing}, k-spread {:.3e} (tol 1e-8)",
            report.k_spread
        ),
    )
}

fn sign_changing() -> TorusBundle<f64> {
    TorusBundle::new(c(0.0, 1.0), 1, vec![PsiMode { m1: 1, m2: 0, amplitude: 0.3 }]).unwrap()
}

fn torus_trace() -> Outcome {
    let flat = TorusBundle::new(c(0.0, 1.0), 1, Vec::new()).unwrap();
    let mut worst = 0.0f64;
    for bundle in [&flat, &sign_changing()] {
        for k in 1..=6 {
            worst = worst.max(theta_trace_check(bundle, k, None).map_err(|e| e.to_string())?.deviation);
        }
    }
    verdict(worst <= 1e-6, format!("max trace deviation {worst:.3e} (tol 1e-6)"))
}

fn morse_audit() -> Outcome {
    let ks: Vec<u32> = (1..=10).collect();
    let flat = audit_morse(&TorusBundle::new(c(0.0, 1.0), 1, Vec::new()).unwrap(), &ks, 256).map_err(|e| e.to_string())?;
    let bundle = sign_changing();
    let field = curvature_field(&bundle, 1, 256).map_err(|e| e.to_string())?;
    let lo = field.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let wavy = audit_morse(&bundle, &ks, 256).map_err(|e| e.to_string())?;
    let equality = flat.rows.iter().map(|r| r.morse1_margin.abs()).fold(0.0, f64::max);
    let strict = wavy.rows.iter().all(|r| r.morse1_margin >= 0.1 * f64::from(r.k));
    let min_ratio = wavy.rows.iter().map(|r| r.morse1_margin / f64::from(r.k)).fold(f64::INFINITY, f64::min);
    let exact = flat.morse3_exact() && wavy.morse3_exact();
    let numeric = flat.rows.iter().chain(&wavy.rows).map(|r| r.morse3_numeric.abs() / f64::from(r.k)).fold(0.0, f64::max);
    verdict(
        exact && numeric <= 1e-9 && equality <= 1e-10 && strict && lo < 0.0 && hi > 0.0,
        format!(
            "morse3 exact {exact}, quadrature |margin|/k {numeric:.3e} (tol 1e-9), flat morse1 |margin| {equality:.3e} (tol 1e-10), R in [{lo:.3}, {hi:.3}], min margin/k {min_ratio:.4} (want >= 0.1)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("model prefactor", model_prefactor),
        ("basis orthonormality", basis_orthonormality),
        ("expansion consistency", expansion_consistency),
        ("galerkin bergman vs closed form", galerkin_bergman),
        ("scaling convergence", scaling_convergence),
        ("vanishing", vanishing),
        ("spectral gap", spectral_gap),
        ("hodge identity", hodge_identity),
        ("heat route", heat_route),
        ("torus trace identity", torus_trace),
        ("morse audit", morse_audit),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
