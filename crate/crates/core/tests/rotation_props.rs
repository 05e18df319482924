use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use polariton_core::angmom::{build_spin_operators, compose_check, max_abs_diff, rotation_matrix, CMatrix, Rotor};
use polariton_core::HalfInt;
use proptest::prelude::*;

fn spin() -> impl Strategy<Value = HalfInt> {
    (0..=8i32).prop_map(HalfInt::from_twice)
}

fn direction() -> impl Strategy<Value = Vector3<f64>> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(th, ph)| {
        Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
    })
}

fn eye(n: usize) -> CMatrix {
    DMatrix::identity(n, n)
}

#[test]
fn operator_algebra_up_to_f4() {
    let i = Complex64::i();
    for tf in 0..=8 {
        let ops = build_spin_operators(HalfInt::from_twice(tf)).unwrap();
        let f = tf as f64 / 2.0;
        for m in [&ops.fx, &ops.fy, &ops.fz] {
            assert!(max_abs_diff(m, &m.adjoint()) < 1e-14);
        }
        let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
        assert!(max_abs_diff(&comm(&ops.fx, &ops.fy), &(&ops.fz * i)) < 1e-12);
        assert!(max_abs_diff(&comm(&ops.fy, &ops.fz), &(&ops.fx * i)) < 1e-12);
        assert!(max_abs_diff(&comm(&ops.fz, &ops.fx), &(&ops.fy * i)) < 1e-12);
        let cas = ops.casimir();
        assert!(max_abs_diff(&cas, &(eye(ops.dim()) * Complex64::from(f * (f + 1.0)))) < 1e-12);
        for (k, m) in HalfInt::from_twice(tf).projections().enumerate() {
            assert_eq!(ops.fz[(k, k)], Complex64::from(m.value()));
        }
    }
}

#[test]
fn ladder_elements_match_formula() {
    let f = HalfInt::from_int(3);
    let ops = build_spin_operators(f).unwrap();
    let raise = ops.raising();
    for (k, m) in f.projections().enumerate().take(6) {
        let want = (12.0 - m.value() * (m.value() + 1.0)).sqrt();
        assert!((raise[(k + 1, k)].re - want).abs() < 1e-14);
    }
}

#[test]
fn half_period_squared_is_full_period() {
    let ops = build_spin_operators(HalfInt::from_int(2)).unwrap();
    let omega = Vector3::new(0.3, -0.5, 0.8) * 2.0e6;
    let period = std::f64::consts::TAU / omega.norm();
    let half = rotation_matrix(&ops, &omega, 1.0, period / 2.0);
    let full = rotation_matrix(&ops, &omega, 1.0, period);
    let sq = compose_check(&half, &half).unwrap();
    assert!(max_abs_diff(&sq.elements, &full.elements) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unitary(f in spin(), n in direction(), g in -2.0..2.0f64, t in -5.0..5.0f64) {
        let ops = build_spin_operators(f).unwrap();
        let d = rotation_matrix(&ops, &(n * 3.0), g, t);
        prop_assert!(d.unitarity_residual() < 1e-12);
        let det = d.elements.clone().determinant();
        prop_assert!((det.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_parameter_group(f in spin(), n in direction(), g in -2.0..2.0f64, t1 in -3.0..3.0f64, t2 in -3.0..3.0f64) {
        let ops = build_spin_operators(f).unwrap();
        let omega = n * 1.7;
        let d1 = rotation_matrix(&ops, &omega, g, t1);
        let d2 = rotation_matrix(&ops, &omega, g, t2);
        let d12 = rotation_matrix(&ops, &omega, g, t1 + t2);
        prop_assert!(max_abs_diff(&compose_check(&d1, &d2).unwrap().elements, &d12.elements) < 1e-11);
        let back = rotation_matrix(&ops, &omega, g, -t1);
        prop_assert!(max_abs_diff(&compose_check(&d1, &back).unwrap().elements, &eye(ops.dim())) < 1e-12);
    }

    #[test]
    fn z_axis_closed_form(f in spin(), w in 0.1..10.0f64, g in -2.0..2.0f64, t in -3.0..3.0f64) {
        let ops = build_spin_operators(f).unwrap();
        let d = rotation_matrix(&ops, &Vector3::new(0.0, 0.0, w), g, t);
        for (k, m) in f.projections().enumerate() {
            let want = Complex64::from_polar(1.0, -g * w * m.value() * t);
            prop_assert!((d.elements[(k, k)] - want).norm() < 1e-13);
        }
        let off: f64 = (0..ops.dim()).flat_map(|r| (0..ops.dim()).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| d.elements[(r, c)].norm())
            .fold(0.0, f64::max);
        prop_assert!(off < 1e-13);
    }

    #[test]
    fn generator_spectrum(f in spin(), n in direction(), w in 0.1..1e7f64) {
        let ops = build_spin_operators(f).unwrap();
        let rotor = Rotor::new(&ops, &(n * w));
        let spectrum = rotor.generator_spectrum();
        let mut raw: Vec<f64> = (ops.project(&n) * Complex64::from(w)).symmetric_eigen().eigenvalues.iter().copied().collect();
        raw.sort_by(f64::total_cmp);
        for ((lam, raw), m) in spectrum.iter().zip(&raw).zip(f.projections()) {
            let want = w * m.value();
            prop_assert!((lam - want).abs() <= 1e-10 * w.max(1.0));
            prop_assert!((raw - want).abs() <= 1e-10 * w.max(1.0));
        }
    }
}
