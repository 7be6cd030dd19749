use approx::assert_relative_eq;
use kernel_lab::model_kernel::MultiIndex;
use kernel_lab::weight::{
    c2_distance_to_model, curvature_matrix, extend_weight, normalize_gauge, scale_weight, CkRule, Perturbation, Weight, WeightFamily,
    WeightPolynomial,
};
use kernel_lab::{Complex, Error, C64};
use proptest::prelude::*;

type Poly = WeightPolynomial<f64>;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn quad(l: f64) -> Poly {
    Poly::diagonal_quadratic(&[l])
}

fn re(a: u32, b: u32, k: f64) -> Poly {
    Poly::re_monomial(a, b, c(k, 0.0))
}

fn coeff_distance(a: &Poly, b: &Poly) -> f64 {
    a.sub(b).terms().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
}

#[test]
fn gauge_examples() {
    let (n, r) = normalize_gauge(&quad(1.0));
    assert_eq!(n, quad(1.0));
    assert!(r.is_zero());

    let (n, r) = normalize_gauge(&re(1, 0, 1.0).add(&quad(1.0)));
    assert_eq!(n, quad(1.0));
    assert_eq!(r, re(1, 0, 1.0));

    let phi = quad(1.0).add(&re(2, 0, 1.0)).add(&re(2, 1, 1.0));
    let (n, r) = normalize_gauge(&phi);
    assert_eq!(n, quad(1.0).add(&re(2, 1, 1.0)));
    assert_eq!(r, re(2, 0, 1.0));
    assert_eq!(n.add(&r), phi);
}

#[test]
fn gauge_removes_constants_and_two_variable_pure_terms() {
    let z1z2 = Poly::real_part(MultiIndex(vec![1, 1]), MultiIndex(vec![0, 0]), c(0.5, -0.3)).unwrap();
    let constant = Poly::from_terms(2, [(MultiIndex(vec![0, 0]), MultiIndex(vec![0, 0]), c(4.0, 0.0))]).unwrap();
    let mixed = Poly::real_part(MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1]), c(0.2, 0.1)).unwrap();
    let pure_cubic = Poly::real_part(MultiIndex(vec![3, 0]), MultiIndex(vec![0, 0]), c(1.0, 0.0)).unwrap();
    let base = Poly::diagonal_quadratic(&[1.0, -2.0]).add(&mixed).add(&pure_cubic);
    let (n, r) = normalize_gauge(&base.add(&z1z2).add(&constant));
    assert_eq!(n, base);
    assert_eq!(r, z1z2.add(&constant));
}

#[test]
fn curvature_examples() {
    let m = curvature_matrix(&quad(2.5), &[c(0.0, 0.0)]).unwrap();
    assert_eq!(m[(0, 0)], c(2.5, 0.0));

    let m = curvature_matrix(&Poly::diagonal_quadratic(&[1.0, -2.0]), &[c(0.0, 0.0); 2]).unwrap();
    assert_eq!(m[(0, 0)], c(1.0, 0.0));
    assert_eq!(m[(1, 1)], c(-2.0, 0.0));
    assert_eq!(m[(0, 1)], c(0.0, 0.0));
}

#[test]
fn curvature_matches_finite_differences() {
    let phi = quad(1.0).add(&re(2, 1, 1.0));
    let f = |x: f64, y: f64| phi.eval(&[c(x, y)]);
    let h = 1e-4;
    for p in [c(1.0, 0.0), c(0.3, -0.7), c(-1.2, 0.4)] {
        let (x, y) = (p.re, p.im);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let oracle = (fxx + fyy) / 4.0;
        let m = curvature_matrix(&phi, &[p]).unwrap();
        assert!((m[(0, 0)].re - oracle).abs() <= 1e-6, "{p}: {} vs {oracle}", m[(0, 0)].re);
        assert!(m[(0, 0)].im.abs() < 1e-15);
    }
    let m = curvature_matrix(&phi, &[c(1.0, 0.0)]).unwrap();
    assert_relative_eq!(m[(0, 0)].re, 3.0, epsilon = 1e-14);
}

#[test]
fn curvature_of_two_variable_weight_is_hermitian() {
    let mixed = Poly::real_part(MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1]), c(0.2, 0.1)).unwrap();
    let cubic = Poly::real_part(MultiIndex(vec![1, 1]), MultiIndex(vec![1, 0]), c(0.3, -0.4)).unwrap();
    let phi = Poly::diagonal_quadratic(&[1.0, 2.0]).add(&mixed).add(&cubic);
    let m = curvature_matrix(&phi, &[c(0.4, 0.1), c(-0.3, 0.8)]).unwrap();
    assert!((&m - m.adjoint()).norm() < 1e-14);
    let m0 = curvature_matrix(&phi, &[c(0.0, 0.0); 2]).unwrap();
    assert_eq!(m0[(0, 1)], c(0.1, 0.05));
}

#[test]
fn scale_examples() {
    let fam = WeightFamily::new(quad(1.0), CkRule::Linear { slope: 4.0 }, Vec::new()).unwrap();
    assert!(coeff_distance(&scale_weight(&fam, 1), &quad(1.0)) < 1e-15);

    let fam = WeightFamily::new(quad(1.0).add(&re(2, 1, 1.0)), CkRule::Linear { slope: 100.0 }, Vec::new()).unwrap();
    let expected = quad(1.0).add(&re(2, 1, 0.1));
    assert!(coeff_distance(&scale_weight(&fam, 1), &expected) < 1e-15);

    let pert = Perturbation { shape: quad(1.0), exponent: 2.0 / 3.0 };
    let fam = WeightFamily::new(quad(1.0), CkRule::Geometric { ratio: 10.0 }, vec![pert]).unwrap();
    let scaled = scale_weight(&fam, 4);
    let one = MultiIndex(vec![1]);
    let extra = scaled.coefficient(&one, &one).re - 1.0;
    assert_relative_eq!(extra, 10f64.powf(-4.0 / 3.0), max_relative = 1e-12);
    assert!((extra - 0.0464).abs() < 5e-5);
}

#[test]
fn rejects_non_decaying_perturbations() {
    let pert = Perturbation { shape: quad(1.0), exponent: 1.0 };
    assert!(WeightFamily::new(quad(1.0), CkRule::Linear { slope: 1.0 }, vec![pert]).is_err());
    assert!(WeightFamily::new(quad(1.0), CkRule::Geometric { ratio: 1.0 }, Vec::new()).is_err());
    let bad = Poly::from_terms(1, [(MultiIndex(vec![2]), MultiIndex(vec![0]), c(1.0, 0.0))]);
    assert!(matches!(bad, Err(Error::NotReal { .. })));
}

#[test]
fn c2_distance_examples() {
    let model = quad(1.0);
    assert_eq!(c2_distance_to_model(&model, &model, 1.0).unwrap(), 0.0);
    let a = c2_distance_to_model(&model.add(&re(2, 1, 0.1)), &model, 1.0).unwrap();
    let b = c2_distance_to_model(&model.add(&re(2, 1, 0.1 / 10f64.sqrt())), &model, 1.0).unwrap();
    assert!(a > 0.0);
    assert_relative_eq!(b / a, 1.0 / 10f64.sqrt(), max_relative = 1e-12);
}

#[test]
fn c2_distance_decays_like_inverse_square_root() {
    let fam = WeightFamily::new(quad(1.0).add(&re(2, 1, 1.0)), CkRule::Geometric { ratio: 10.0 }, Vec::new()).unwrap();
    let model = fam.model();
    let pts: Vec<(f64, f64)> = (2..=4)
        .map(|k| {
            let d = c2_distance_to_model(&scale_weight(&fam, k), &model, 1.0).unwrap();
            (fam.ck.value(k).ln(), d.ln())
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let fit = kernel_lab::report::fit_line(&xs, &ys).unwrap();
    assert!((fit.slope + 0.5).abs() <= 0.05, "slope {}", fit.slope);
}

#[test]
fn scaled_curvature_converges_to_base() {
    let pert = Perturbation { shape: quad(1.0), exponent: 2.0 / 3.0 };
    let fam = WeightFamily::new(quad(1.5).add(&re(2, 1, 1.0)), CkRule::Geometric { ratio: 4.0 }, vec![pert]).unwrap();
    let o = [c(0.0, 0.0)];
    let target = curvature_matrix(&fam.base, &o).unwrap()[(0, 0)].re;
    let devs: Vec<f64> = (1..=8)
        .map(|k| (curvature_matrix(&fam.assemble(k), &o).unwrap()[(0, 0)].re / fam.ck.value(k) - target).abs())
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]));
    for (k, d) in (1..=8).zip(&devs) {
        assert_relative_eq!(*d, fam.ck.value(k).powf(-1.0 / 3.0), max_relative = 1e-12);
    }
}

#[test]
fn extension_matches_inner_and_model_zones() {
    let model = quad(1.0);
    let scaled = model.add(&re(2, 1, 0.2));
    let ck = 1e4;
    let ext = extend_weight(&scaled, &model, 0.1, ck).unwrap();
    let r = ext.radius();
    assert_relative_eq!(r, ck.powf(0.1), max_relative = 1e-15);
    for t in [0.0f64, 0.7, 1.9, 3.3] {
        let inside = [c(r * 0.99 * t.cos(), r * 0.99 * t.sin())];
        assert_eq!(ext.value(&inside), scaled.eval(&inside));
        let outside = [c(2.0 * r * t.cos(), 2.0 * r * t.sin())];
        assert_eq!(ext.value(&outside), model.eval(&outside));
        let far = [c(7.0 * r * t.cos(), 7.0 * r * t.sin())];
        assert_eq!(ext.value(&far), model.eval(&far));
    }

    let same = extend_weight(&model, &model, 0.1, ck).unwrap();
    for z in [c(0.0, 0.0), c(1.2, 1.2), c(r * 1.5, 0.0), c(0.0, 5.0 * r)] {
        assert_eq!(same.value(&[z]), model.eval(&[z]));
        assert_eq!(same.jet(&[z]), model.jet(&[z]));
    }
}

#[test]
fn extension_jet_matches_finite_differences_in_the_blend() {
    let model = quad(1.0);
    let scaled = model.add(&re(2, 1, 0.2));
    let ext = extend_weight(&scaled, &model, 0.1, 100.0).unwrap();
    let r = ext.radius();
    let f = |x: f64, y: f64| ext.value(&[c(x, y)]);
    let h = 1e-4;
    for (x, y) in [(1.3 * r, 0.2), (0.5 * r, -1.2 * r), (-1.1 * r, 0.9 * r)] {
        let jet = ext.jet(&[c(x, y)]);
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        assert!((jet.grad[0] - fx).abs() < 1e-6);
        assert!((jet.h(1, 1) - fyy).abs() < 1e-4);
    }
}

#[test]
fn extension_distance_decreases_along_the_family() {
    let fam = WeightFamily::new(quad(1.0).add(&re(2, 1, 1.0)), CkRule::Geometric { ratio: 10.0 }, Vec::new()).unwrap();
    let model = fam.model();
    let ds: Vec<f64> = (2..=6)
        .map(|k| extend_weight(&scale_weight(&fam, k), &model, 0.1, fam.ck.value(k)).unwrap().c2_distance_to_model(41))
        .collect();
    assert!(ds.windows(2).all(|w| w[1] < w[0]), "{ds:?}");
}

#[test]
fn extension_preserves_curvature_sign() {
    for (lambda, sign) in [(1.0, 1.0), (-1.0, -1.0)] {
        let fam = WeightFamily::new(quad(lambda).add(&re(2, 1, 1.0)), CkRule::Geometric { ratio: 10.0 }, Vec::new()).unwrap();
        let k = 6;
        let ext = extend_weight(&scale_weight(&fam, k), &fam.model(), 0.1, fam.ck.value(k)).unwrap();
        let r = 3.0 * ext.radius();
        for i in 0..=40 {
            for j in 0..=40 {
                let z = c(r * (f64::from(i) / 20.0 - 1.0), r * (f64::from(j) / 20.0 - 1.0));
                let levi = ext.jet(&[z]).levi(0, 0).re;
                assert!(sign * levi > 0.5, "{z}: {levi}");
            }
        }
    }
}

#[test]
fn extension_rejects_epsilon_out_of_range() {
    let m = Poly::diagonal_quadratic(&[1.0, 1.0]);
    assert!(extend_weight(&m, &m, 0.15, 10.0).is_ok());
    assert!(matches!(extend_weight(&m, &m, 0.2, 10.0), Err(Error::EpsilonOutOfRange { .. })));
    assert!(extend_weight(&quad(1.0), &quad(1.0), 0.0, 10.0).is_err());
    assert!(extend_weight(&quad(1.0), &quad(1.0), 1.0 / 6.0, 10.0).is_err());
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((0u32..=3, 0u32..=3, -2.0..2.0f64, -2.0..2.0f64), 0..8)
        .prop_map(|terms| terms.into_iter().fold(Poly::zero(1), |acc, (a, b, x, y)| acc.add(&Poly::re_monomial(a, b, c(x, y)))))
}

proptest! {
    #[test]
    fn gauge_is_idempotent(phi in poly()) {
        let (n, r) = normalize_gauge(&phi);
        let (n2, r2) = normalize_gauge(&n);
        prop_assert!(r2.is_zero());
        prop_assert_eq!(n2, n.clone());
        prop_assert!(coeff_distance(&n.add(&r), &phi) < 1e-14);
    }

    #[test]
    fn transforms_preserve_reality(phi in poly(), s in 0.1..3.0f64, px in -1.0..1.0f64, py in -1.0..1.0f64) {
        prop_assert!(phi.is_real());
        prop_assert!(phi.dilate(s).is_real());
        prop_assert!(phi.translate(&[c(px, py)]).unwrap().is_real());
        prop_assert!(normalize_gauge(&phi).0.is_real());
        prop_assert!(phi.scaled(s).sub(&phi.truncated(2)).is_real());
        let z = [c(py, px)];
        prop_assert!(phi.eval_derivative(&[0], &[0], &z).im.abs() < 1e-12 * (1.0 + phi.eval(&z).abs()));
    }

    #[test]
    fn translation_is_evaluation_shift(phi in poly(), px in -1.0..1.0f64, py in -1.0..1.0f64, zx in -1.0..1.0f64, zy in -1.0..1.0f64) {
        let p = c(px, py);
        let z = c(zx, zy);
        let moved = phi.translate(&[p]).unwrap();
        prop_assert!((moved.eval(&[z]) - phi.eval(&[z + p])).abs() < 1e-11);
    }

    #[test]
    fn scaling_at_unit_scale_is_identity(phi in poly(), shape in poly(), exponent in -1.0..0.9f64) {
        let pert = Perturbation { shape: shape.clone(), exponent };
        let fam = WeightFamily::new(phi.clone(), CkRule::Linear { slope: 1.0 }, vec![pert]).unwrap();
        prop_assert!(coeff_distance(&scale_weight(&fam, 1), &phi.add(&shape)) < 1e-15);
    }
}
