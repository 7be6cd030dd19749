use kernel_lab::report::Table;
use kernel_lab::torus::{
    audit_morse, classify, curvature_field, dolbeault_dims, local_morse_check, morse_integrals, theta_trace_check, IndexClass, PsiMode,
    ThetaBasis, TorusBundle,
};
use kernel_lab::{Complex, Error};

fn bundle(degree: i64, psi: &[(i32, i32, f64)]) -> TorusBundle<f64> {
    let psi = psi.iter().map(|&(m1, m2, amplitude)| PsiMode { m1, m2, amplitude }).collect();
    TorusBundle::new(Complex::new(0.0, 1.0), degree, psi).unwrap()
}

fn wavy() -> TorusBundle<f64> {
    bundle(1, &[(1, 0, 0.3)])
}

#[test]
fn rejects_invalid_bundles() {
    assert!(TorusBundle::<f64>::new(Complex::new(0.0, -1.0), 1, Vec::new()).is_err());
    assert!(TorusBundle::<f64>::new(Complex::new(0.0, 1.0), 1, vec![PsiMode { m1: 0, m2: 0, amplitude: 1.0 }]).is_err());
}

#[test]
fn flat_curvature_normalization() {
    let b = bundle(1, &[]);
    assert_eq!(b.area(), 2.0);
    assert!((b.curvature(0.3, 0.7) - std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn curvature_field_examples() {
    let f = curvature_field(&bundle(1, &[]), 3, 32).unwrap();
    assert_eq!(f.count(IndexClass::Positive), 32 * 32);
    assert_eq!(f.boundary_crossings(), 0);

    let f = curvature_field(&wavy(), 3, 64).unwrap();
    assert!(f.count(IndexClass::Positive) > 0 && f.count(IndexClass::Negative) > 0);
    assert!(f.boundary_crossings() > 0);

    let f = curvature_field(&bundle(-1, &[]), 2, 16).unwrap();
    assert_eq!(f.count(IndexClass::Negative), 16 * 16);
}

#[test]
fn curvature_field_requires_resolution() {
    let b = bundle(1, &[(3, 1, 0.01)]);
    assert!(curvature_field(&b, 1, 8).is_err());
    assert!(curvature_field(&b, 1, 24).is_ok());
}

#[test]
fn classification_dead_band() {
    assert_eq!(classify(1e-13), IndexClass::Degenerate);
    assert_eq!(classify(-1e-13), IndexClass::Degenerate);
    assert_eq!(classify(1e-11), IndexClass::Positive);
    assert_eq!(classify(-1e-11), IndexClass::Negative);
}

#[test]
fn morse_integral_examples() {
    let m = morse_integrals(&bundle(1, &[]), 5, 0, 64).unwrap();
    assert!((m.value - 5.0).abs() <= 1e-10);
    assert_eq!(m.boundary_crossings, 0);

    let m = morse_integrals(&wavy(), 5, 0, 256).unwrap();
    assert!(m.value > 5.0 + 0.5);

    let m = morse_integrals(&bundle(1, &[]), 5, 1, 64).unwrap();
    assert_eq!(m.value, 0.0);
    assert!(morse_integrals(&bundle(1, &[]), 5, 2, 64).is_err());
}

#[test]
fn partition_and_total_curvature() {
    let b = bundle(2, &[(1, 1, 0.2), (0, 2, -0.05)]);
    let n = 256;
    let f = curvature_field(&b, 1, n).unwrap();
    let total = f.count(IndexClass::Positive) + f.count(IndexClass::Negative) + f.count(IndexClass::Degenerate);
    assert_eq!(total, n * n);
    for k in [1, 3] {
        let i0 = morse_integrals(&b, k, 0, n).unwrap().value;
        let i1 = morse_integrals(&b, k, 1, n).unwrap().value;
        assert!(i1 > 0.0);
        assert!((i0 - i1 - 2.0 * f64::from(k)).abs() < 1e-10, "{i0} {i1}");
    }
}

#[test]
fn morse_integral_stabilizes_under_refinement() {
    let diffs = |b: &TorusBundle<f64>| -> Vec<f64> {
        let v: Vec<f64> = [16, 32, 64, 128, 256].iter().map(|&n| morse_integrals(b, 1, 0, n).unwrap().value).collect();
        v.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    };
    let smooth = bundle(1, &[(1, 1, 0.02), (2, 0, 0.01)]);
    let f = curvature_field(&smooth, 1, 64).unwrap();
    assert_eq!(f.count(IndexClass::Positive), 64 * 64);
    for w in diffs(&smooth).windows(2) {
        assert!(w[1] <= w[0] / 4.0 || w[1] < 1e-13, "{w:?}");
    }

    let d = diffs(&wavy());
    assert!(d[3] < d[0] && d[3] < 1e-4, "{d:?}");
    let m = morse_integrals(&wavy(), 1, 0, 256).unwrap();
    assert!(m.error_estimate > 0.0 && m.error_estimate < 1e-3);
    assert!(m.boundary_crossings > 0);
}

#[test]
fn dolbeault_examples() {
    assert_eq!(dolbeault_dims(&bundle(1, &[]), 5).unwrap(), (5, 0));
    assert_eq!(dolbeault_dims(&bundle(-2, &[]), 3).unwrap(), (0, 6));
    assert_eq!(dolbeault_dims(&bundle(1, &[]), 1).unwrap(), (1, 0));
    assert_eq!(dolbeault_dims(&bundle(0, &[]), 1).unwrap_err(), Error::FlatBundle);
}

#[test]
fn theta_trace_examples() {
    let t = theta_trace_check(&bundle(1, &[]), 1, None).unwrap();
    assert_eq!(t.dimension, 1);
    assert!(t.deviation <= 1e-8);
    let t = theta_trace_check(&bundle(1, &[]), 6, None).unwrap();
    assert!(t.deviation <= 1e-6);
    let t = theta_trace_check(&wavy(), 4, None).unwrap();
    assert!(t.deviation <= 1e-6);
    assert!(t.projector_deviation <= 1e-8);
    assert!(t.truncation_bound <= 1e-16);
    assert!(theta_trace_check(&bundle(-1, &[]), 2, None).is_err());
}

#[test]
fn theta_trace_on_a_skew_lattice() {
    let psi = vec![PsiMode { m1: 1, m2: 2, amplitude: 0.05 }];
    let b = TorusBundle::new(Complex::new(0.3, 0.8), 1, psi).unwrap();
    for k in [1, 3, 5] {
        assert!(theta_trace_check(&b, k, None).unwrap().deviation <= 1e-6);
    }
}

#[test]
fn theta_basis_is_quasi_periodic_in_norm() {
    let b = bundle(1, &[]);
    let theta = ThetaBasis::new(&b, 3).unwrap();
    assert_eq!(theta.len(), 3);
    let g = theta.gram(48, 0.0);
    assert!((&g - g.adjoint()).camax() < 1e-12);
    assert!(g.clone().cholesky().is_some());
}

#[test]
fn audit_examples() {
    let ks: Vec<u32> = (1..=10).collect();
    let flat = audit_morse(&bundle(1, &[]), &ks, 128).unwrap();
    assert!(flat.morse3_exact());
    for r in &flat.rows {
        assert_eq!(r.h0, u64::from(r.k));
        assert!(r.morse1_margin.abs() <= 1e-10);
        assert!(r.morse3_numeric.abs() <= 1e-10);
    }

    let w = audit_morse(&wavy(), &ks, 256).unwrap();
    assert!(w.morse3_exact());
    assert!(w.morse1_holds(0.0));
    for r in &w.rows {
        assert!(r.i0 > r.h0 as f64);
        assert!(r.morse1_margin >= 0.1 * f64::from(r.k));
        assert!(r.morse2_margin >= -1e-10);
    }

    let neg = audit_morse(&bundle(-2, &[]), &[1, 2], 64).unwrap();
    assert!(neg.morse3_exact());
    assert_eq!(neg.rows[1].h1, 4);
}

#[test]
fn audit_table_has_one_row_per_k() {
    let r = audit_morse(&bundle(1, &[]), &[1, 2, 3], 64).unwrap();
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().contains("morse3_margin"));
}

#[test]
fn local_morse_on_a_sub_rectangle() {
    let rect = [0.0, 0.5, 0.0, 1.0];
    let flat = local_morse_check(&bundle(1, &[]), 6, rect, 64).unwrap();
    assert!((flat.kernel_mass - 3.0).abs() < 1e-6);
    assert!((flat.morse_bound - 3.0).abs() < 1e-10);
    let w = local_morse_check(&wavy(), 6, rect, 64).unwrap();
    assert!(w.kernel_mass <= w.morse_bound);
    assert!(local_morse_check(&wavy(), 6, [0.5, 0.2, 0.0, 1.0], 8).is_err());
}

#[test]
fn single_precision_torus() {
    let b = TorusBundle::<f32>::new(Complex::new(0.0, 1.0), 1, Vec::new()).unwrap();
    let m = morse_integrals(&b, 4, 0, 32).unwrap();
    assert!((m.value - 4.0).abs() < 1e-4);
}
