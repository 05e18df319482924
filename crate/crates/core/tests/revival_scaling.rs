use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use polariton_core::cg::{dark_state_weights, partial_revival_amplitude, DarkStateWeights};
use polariton_core::fields::{larmor_period_for, FieldConfig, LevelConstants};
use polariton_core::polariton::{efficiency_curve, time_grid, EfficiencyCurve};
use polariton_core::revivals::{
    calibrate_width_definition, collapse_revival_scaling, find_revivals, RevivalError, WidthDefinition, DEFAULT_THRESHOLD,
};
use polariton_core::HalfInt;

fn rb85() -> DarkStateWeights {
    dark_state_weights(HalfInt::from_int(3), HalfInt::from_int(2), HalfInt::from_int(3), 1).unwrap()
}

fn default_grid_curve(theta: f64) -> EfficiencyCurve {
    let grid = time_grid(0.0, 10e-6, 5e-9);
    efficiency_curve(&rb85(), &FieldConfig::uniform(0.47, theta), &LevelConstants::default(), &grid).unwrap()
}

#[test]
fn perpendicular_report() {
    let curve = default_grid_curve(FRAC_PI_2);
    let r = find_revivals(&curve, DEFAULT_THRESHOLD, WidthDefinition::default()).unwrap();
    let period = larmor_period_for(0.47, &LevelConstants::default()).unwrap();
    assert!((r.t_r - period).abs() < 5e-9);
    assert!((r.t_r * 1e6 - 4.5605).abs() < 5e-3);
    let (t_half, amp) = r.half_revivals[0];
    assert!((t_half - period / 2.0).abs() < 5e-9);
    assert!((amp - partial_revival_amplitude(&rb85()).unwrap()).abs() < 1e-8);
    assert!(r.t_c < r.t_r);
    assert_eq!(r.definition, WidthDefinition::FullWidthInvE);
    assert_eq!(r.full_revivals.len(), 2);
}

#[test]
fn parallel_half_revival_is_full() {
    let r = find_revivals(&default_grid_curve(0.0), DEFAULT_THRESHOLD, WidthDefinition::default()).unwrap();
    let period = larmor_period_for(0.47, &LevelConstants::default()).unwrap();
    assert!((r.t_r - period).abs() < 5e-9);
    assert!((r.half_revivals[0].1 - 1.0).abs() < 1e-8);
}

#[test]
fn vanishing_half_revival_near_quarter_pi() {
    let err = find_revivals(&default_grid_curve(FRAC_PI_4), DEFAULT_THRESHOLD, WidthDefinition::default()).unwrap_err();
    match err {
        RevivalError::NoHalfRevival { amplitude, .. } => assert!(amplitude < 0.02),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn flat_curve_for_zero_field() {
    let grid = time_grid(0.0, 5e-6, 5e-9);
    let curve = efficiency_curve(&rb85(), &FieldConfig::uniform(0.0, FRAC_PI_2), &LevelConstants::default(), &grid).unwrap();
    assert!(curve.eta.iter().all(|&e| (e - 1.0).abs() < 1e-15));
    assert!(matches!(find_revivals(&curve, DEFAULT_THRESHOLD, WidthDefinition::default()), Err(RevivalError::NoRevival)));
}

#[test]
fn coarse_grid_rejected() {
    let grid = time_grid(0.0, 10e-6, 50e-9);
    let curve = efficiency_curve(&rb85(), &FieldConfig::uniform(0.47, FRAC_PI_2), &LevelConstants::default(), &grid).unwrap();
    assert!(matches!(find_revivals(&curve, DEFAULT_THRESHOLD, WidthDefinition::default()), Err(RevivalError::GridTooCoarse { .. })));
}

#[test]
fn calibration_selects_default() {
    let cal = calibrate_width_definition(&rb85(), &LevelConstants::default(), 0.47).unwrap();
    assert_eq!(cal.chosen, WidthDefinition::default());
    let ratio = cal.candidates.iter().find(|(d, _)| *d == cal.chosen).unwrap().1;
    assert!((0.074..=0.090).contains(&ratio), "{ratio}");
    assert_eq!(cal.candidates.len(), 4);
}

#[test]
fn ratio_constant_across_field() {
    let b_list = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];
    let pts = collapse_revival_scaling(&rb85(), &LevelConstants::default(), &b_list, FRAC_PI_2, WidthDefinition::default()).unwrap();
    let ratios: Vec<f64> = pts.iter().map(|p| p.ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    for (p, r) in pts.iter().zip(&ratios) {
        assert!(((r - mean) / mean).abs() < 0.01, "{ratios:?}");
        // t_r ∝ 1/B
        let expected = larmor_period_for(p.b_gauss, &LevelConstants::default()).unwrap();
        assert!((p.t_r / expected - 1.0).abs() < 1e-4);
    }
    assert!((0.074..=0.090).contains(&mean));
}

#[test]
fn time_rescaling() {
    let curve = default_grid_curve(FRAC_PI_2);
    let base = find_revivals(&EfficiencyCurve::from_samples(curve.times.clone(), curve.eta.clone()), 0.2, WidthDefinition::default()).unwrap();
    let stretched = EfficiencyCurve::from_samples(curve.times.iter().map(|t| 2.0 * t).collect(), curve.eta.clone());
    let r2 = find_revivals(&stretched, 0.2, WidthDefinition::default()).unwrap();
    assert!((r2.t_r / base.t_r - 2.0).abs() < 1e-12);
    assert!((r2.t_c / base.t_c - 2.0).abs() < 1e-12);
    assert!((r2.ratio - base.ratio).abs() < 1e-12);
}
