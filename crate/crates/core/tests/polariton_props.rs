use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use polariton_core::cg::{dark_state_weights, partial_revival_amplitude, DarkStateWeights};
use polariton_core::fields::{larmor_period_for, omega_magnitude, FieldConfig, GradientModel, LevelConstants};
use polariton_core::polariton::{
    efficiency, efficiency_curve, evolve_coherences, theta_sweep, time_grid, CoherenceMatrix, PolaritonError,
};
use polariton_core::revivals::{find_revivals, revival_envelopes, DEFAULT_THRESHOLD};
use polariton_core::HalfInt;
use proptest::prelude::*;

fn rb85() -> DarkStateWeights {
    dark_state_weights(HalfInt::from_int(3), HalfInt::from_int(2), HalfInt::from_int(3), 1).unwrap()
}

fn consts() -> LevelConstants {
    LevelConstants::default()
}

/// Overlap of the evolved dark-state coherences with the initial ones.
fn eta_via_coherences(w: &DarkStateWeights, field: &FieldConfig, t: f64) -> f64 {
    let c0 = CoherenceMatrix::dark_state(w).unwrap();
    let ct = evolve_coherences(&c0, field, &consts(), t).unwrap();
    let mut acc = Complex64::from(0.0);
    for m in w.f_b.projections() {
        acc += c0.get(m, m) * ct.get(m, m);
    }
    acc.norm_sqr()
}

#[test]
fn perpendicular_half_period_matches_closed_form() {
    let w = rb85();
    let field = FieldConfig::uniform(0.47, FRAC_PI_2);
    let t_r = larmor_period_for(0.47, &consts()).unwrap();
    let eta = efficiency(&w, &field, &consts(), t_r / 2.0).unwrap();
    assert!((eta - partial_revival_amplitude(&w).unwrap()).abs() < 1e-10);
    assert!((eta - 2500.0 / 7569.0).abs() < 1e-10);
}

#[test]
fn perpendicular_half_period_reflects_coherences() {
    let w = rb85();
    let field = FieldConfig::uniform(0.47, FRAC_PI_2);
    let t_r = larmor_period_for(0.47, &consts()).unwrap();
    let c0 = CoherenceMatrix::dark_state(&w).unwrap();
    let ct = evolve_coherences(&c0, &field, &consts(), t_r / 2.0).unwrap();
    for m in w.f_b.projections() {
        let want = -c0.get(-m, -m);
        assert!((ct.get(m, m) - want).norm() < 1e-10, "m={m}");
    }
}

#[test]
fn parallel_field_phases() {
    let w = rb85();
    let field = FieldConfig::uniform(0.47, 0.0);
    let t = 0.37e-6;
    let c0 = CoherenceMatrix::dark_state(&w).unwrap();
    let ct = evolve_coherences(&c0, &field, &consts(), t).unwrap();
    let rate = 2.0 * consts().g_b.abs() * omega_magnitude(0.47, &consts());
    for m in w.f_b.projections() {
        let ratio = ct.get(m, m) / c0.get(m, m);
        assert!((ratio.norm() - 1.0).abs() < 1e-12);
        // conj(D_b) C D_aᵀ gives exp(i (g_b - g_a) |Ω| m t) with g_a = -g_b = 1/3.
        let want = Complex64::from_polar(1.0, -rate * m.value() * t);
        assert!((ratio - want).norm() < 1e-10, "m={m}");
    }
    // Full revival already at half the Larmor period.
    let t_r = larmor_period_for(0.47, &consts()).unwrap();
    assert!((efficiency(&w, &field, &consts(), t_r / 2.0).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn curve_periodic_on_revival_grid() {
    let w = rb85();
    let t_r = larmor_period_for(0.47, &consts()).unwrap();
    for theta in [0.0, 0.3, FRAC_PI_4, FRAC_PI_2, 2.9] {
        let curve = efficiency_curve(&w, &FieldConfig::uniform(0.47, theta), &consts(), &[0.0, t_r, 2.0 * t_r]).unwrap();
        for eta in curve.eta {
            assert!((eta - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn sweep_half_revival_amplitudes() {
    let w = rb85();
    let t_r = larmor_period_for(0.47, &consts()).unwrap();
    let thetas = [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2];
    let curves = theta_sweep(&w, &FieldConfig::uniform(0.47, 0.0), &consts(), &thetas, &[0.0, t_r / 2.0]).unwrap();
    let half: Vec<f64> = curves.iter().map(|c| c.eta[1]).collect();
    assert!((half[0] - 1.0).abs() < 1e-10);
    assert!((half[4] - 2500.0 / 7569.0).abs() < 1e-10);
    let min = half.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(min, half[2]);
    for (c, th) in curves.iter().zip(thetas) {
        assert_eq!(c.field.theta, th);
        assert_eq!(c.eta[0], 1.0);
    }
}

#[test]
fn gradient_damps_successive_revivals() {
    let w = rb85();
    let b = 0.47;
    let t_r = larmor_period_for(b, &consts()).unwrap();
    let field = FieldConfig::uniform(b, FRAC_PI_2).with_gradient(GradientModel::UniformInterval, 0.05 * b, 9);
    let grid: Vec<f64> = (1..=4).map(|k| k as f64 * t_r).collect();
    let curve = efficiency_curve(&w, &field, &consts(), &grid).unwrap();
    assert!(curve.eta.windows(2).all(|p| p[1] < p[0]), "{:?}", curve.eta);
    assert!(curve.eta[0] < 1.0);
}

#[test]
fn gradient_broadens_later_revivals() {
    let w = rb85();
    let b = 0.47;
    let t_r = larmor_period_for(b, &consts()).unwrap();
    let grid = time_grid(0.0, 4.3 * t_r, t_r / 2000.0);
    let uniform = efficiency_curve(&w, &FieldConfig::uniform(b, FRAC_PI_2), &consts(), &grid).unwrap();
    let field = FieldConfig::uniform(b, FRAC_PI_2).with_gradient(GradientModel::UniformInterval, 0.05 * b, 21);
    let curve = efficiency_curve(&w, &field, &consts(), &grid).unwrap();
    let env = revival_envelopes(&curve, t_r, 4);
    let reference = revival_envelopes(&uniform, t_r, 1)[0];
    assert_eq!(env.len(), 4);
    assert!((reference.height - 1.0).abs() < 1e-9);
    assert!(env.windows(2).all(|p| p[1].height < p[0].height), "{env:?}");
    assert!(env.windows(2).all(|p| p[1].half_width >= p[0].half_width), "{env:?}");
    assert!(env[0].half_width > reference.half_width);
    let report = find_revivals(&uniform, DEFAULT_THRESHOLD, Default::default()).unwrap();
    assert!((report.t_r - t_r).abs() < t_r * 1e-3);
}

#[test]
fn unconnected_configuration_rejected() {
    let w = dark_state_weights(HalfInt::from_int(1), HalfInt::from_int(2), HalfInt::from_int(2), 1).unwrap();
    let err = efficiency(&w, &FieldConfig::default(), &consts(), 1e-6).unwrap_err();
    assert!(matches!(err, PolaritonError::Cg(_)));
}

fn theta() -> impl Strategy<Value = f64> {
    0.0..=PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded(th in theta(), b in 0.05..1.5f64, t in 0.0..2e-5f64) {
        let eta = efficiency(&rb85(), &FieldConfig::uniform(b, th), &consts(), t).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&eta));
    }

    #[test]
    fn periodic(th in theta(), b in 0.05..1.5f64, t in 0.0..2e-5f64) {
        let w = rb85();
        let f = FieldConfig::uniform(b, th);
        let t_r = larmor_period_for(b, &consts()).unwrap();
        let a = efficiency(&w, &f, &consts(), t).unwrap();
        let c = efficiency(&w, &f, &consts(), t + t_r).unwrap();
        prop_assert!((a - c).abs() < 1e-10);
    }

    #[test]
    fn azimuth_invariant(th in theta(), phi in 0.0..std::f64::consts::TAU, t in 0.0..1e-5f64) {
        let w = rb85();
        let base = FieldConfig::uniform(0.47, th);
        let rotated = FieldConfig { phi, ..base };
        let a = efficiency(&w, &base, &consts(), t).unwrap();
        let c = efficiency(&w, &rotated, &consts(), t).unwrap();
        prop_assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn parallel_closed_form(b in 0.05..1.5f64, t in 0.0..2e-5f64) {
        let w = rb85();
        let rate = 2.0 * consts().g_b * omega_magnitude(b, &consts());
        let amp: Complex64 = w.entries.iter().map(|e| Complex64::from_polar(e.w(), rate * e.m.value() * t)).sum();
        let eta = efficiency(&w, &FieldConfig::uniform(b, 0.0), &consts(), t).unwrap();
        prop_assert!((eta - amp.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn time_reversal(th in theta(), b in 0.05..1.5f64, t in 0.0..2e-5f64) {
        let w = rb85();
        let f = FieldConfig::uniform(b, th);
        let a = efficiency(&w, &f, &consts(), t).unwrap();
        let c = efficiency(&w, &f, &consts(), -t).unwrap();
        prop_assert!((a - c).abs() < 1e-10);
    }

    #[test]
    fn reflection_symmetry(th in theta(), t in 0.0..1e-5f64) {
        let w = rb85();
        let a = efficiency(&w, &FieldConfig::uniform(0.47, th), &consts(), t).unwrap();
        let c = efficiency(&w, &FieldConfig::uniform(0.47, PI - th), &consts(), t).unwrap();
        prop_assert!((a - c).abs() < 1e-10);
    }

    #[test]
    fn evolution_round_trip_and_norm(th in theta(), b in 0.05..1.5f64, t in -1e-5..1e-5f64, seed in 0u64..1000) {
        let w = rb85();
        let f = FieldConfig::uniform(b, th);
        let mut c0 = CoherenceMatrix::zeros(w.f_b, w.f_a);
        for (k, mb) in w.f_b.projections().enumerate() {
            for (l, ma) in w.f_a.projections().enumerate() {
                let x = ((seed + 7 * k as u64 + 13 * l as u64) as f64 * 0.618).sin();
                c0.set(mb, ma, Complex64::new(x, 0.5 * x * x - 0.2));
            }
        }
        let ct = evolve_coherences(&c0, &f, &consts(), t).unwrap();
        prop_assert!((ct.frobenius_norm() - c0.frobenius_norm()).abs() < 1e-11);
        let back = evolve_coherences(&ct, &f, &consts(), -t).unwrap();
        let diff = (&back.amplitudes - &c0.amplitudes).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-11);
    }

    #[test]
    fn coherence_route_matches_efficiency(th in theta(), b in 0.05..1.5f64, t in 0.0..2e-5f64) {
        let w = rb85();
        let f = FieldConfig::uniform(b, th);
        let direct = efficiency(&w, &f, &consts(), t).unwrap();
        prop_assert!((direct - eta_via_coherences(&w, &f, t)).abs() < 1e-10);
    }

    #[test]
    fn scale_invariance(th in theta(), b in 0.05..1.5f64, s in 0.2..5.0f64, t in 0.0..2e-5f64) {
        let w = rb85();
        let a = efficiency(&w, &FieldConfig::uniform(b, th), &consts(), t).unwrap();
        let c = efficiency(&w, &FieldConfig::uniform(b * s, th), &consts(), t / s).unwrap();
        prop_assert!((a - c).abs() < 1e-10);
    }
}
