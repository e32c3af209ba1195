//! End-to-end numbers for the shipped device parameters. Expected values
//! were computed independently (direct trace-condition scans in double
//! precision) and frozen here.

use metaring::conversion::{
    coupling_efficiency, single_photon_efficiency, tls_quality_factor, ModeLoss, TlsModel,
};
use metaring::dispersion::{conversion_mismatch, fsr_curve, idc_enhancement_sweep, mode_nearest, solve_mode_frequency};
use metaring::fitting::{fit_linear_modes, fit_quadratic_field_shift};
use metaring::model::{capacitance_for_impedance, BiasState, MicroloopSpec, RingSpec, SegmentParams, UnitCell};
use metaring::modes::{analytic_mode_frequency, free_spectral_range};
use metaring::tuning::{fractional_frequency_shift, quadratic_shift_coefficient};

fn two_segment_cell() -> UnitCell {
    UnitCell::new(
        SegmentParams::new(57e-6, 289e-12, 25e-6).unwrap(),
        SegmentParams::new(3e-6, 880e-12, 5e-6).unwrap(),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn signal_mode_near_five_gigahertz() {
    let cell = two_segment_cell();
    let m = mode_nearest(&cell, 3200, 5e9).unwrap();
    assert_eq!(m, 65);
    let f = solve_mode_frequency(&cell, 3200, m).unwrap();
    assert!((f - 5e9).abs() < 40e6, "{f}");
}

#[test]
fn mismatch_at_five_gigahertz() {
    let cell = two_segment_cell();
    let five = conversion_mismatch(&cell, 3200, 65, 5).unwrap();
    let thirty = conversion_mismatch(&cell, 3200, 65, 30).unwrap();
    assert!(rel(five.delta_f, 16.27e3) < 5e-3, "{}", five.delta_f);
    assert!(rel(thirty.delta_f, 586.0e3) < 5e-3, "{}", thirty.delta_f);
}

#[test]
fn enhancement_at_ratio_three() {
    let rows = idc_enhancement_sweep(&two_segment_cell(), 3200, 5e9, &[1e9, 2e9, 3e9], &[3.0]).unwrap();
    let expected = [(17, 567.4e3), (35, 2.406e6), (52, 5.313e6)];
    for (row, (n, df)) in rows.iter().zip(expected) {
        assert_eq!(row.m, 87);
        assert_eq!(row.n, n);
        assert!(rel(row.delta_f, df) < 5e-3, "{row:?}");
    }
}

#[test]
fn enhancement_grows_with_ratio() {
    let ratios = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let rows = idc_enhancement_sweep(&two_segment_cell(), 3200, 5e9, &[1e9, 2e9, 3e9], &ratios).unwrap();
    for k in 0..3 {
        let series: Vec<f64> = rows.iter().skip(k).step_by(3).map(|r| r.delta_f).collect();
        assert!(series.windows(2).all(|w| w[1] > w[0]), "{series:?}");
    }
}

#[test]
fn fsr_falls_across_the_band() {
    let curve = fsr_curve(&two_segment_cell(), 3200, (4e9, 9e9)).unwrap();
    assert!(curve.len() > 40);
    assert!(curve.first().unwrap().1 > curve.last().unwrap().1);
    let ladder: Vec<(i64, f64)> = (55..=120)
        .map(|m| (m, solve_mode_frequency(&two_segment_cell(), 3200, m as usize).unwrap()))
        .filter(|(_, f)| *f >= 4e9 && *f <= 9e9)
        .collect();
    let (ms, fs): (Vec<i64>, Vec<f64>) = ladder.into_iter().unzip();
    let fit = fit_linear_modes(&ms, &fs).unwrap();
    let centre = fsr_curve(&two_segment_cell(), 3200, (6.4e9, 6.6e9)).unwrap()[0].1;
    assert!(rel(fit.get("fsr"), centre) < 0.03);
}

#[test]
fn lumped_ring_fsr_and_rescaling() {
    let l = 57e-6 + 0.25e-6;
    let ring = RingSpec::lumped(3200, 57e-6, 0.25e-6, capacitance_for_impedance(l, 362.0).unwrap(), 25e-6).unwrap();
    let table = free_spectral_range(&ring, (4e9, 10e9)).unwrap();
    assert!(rel(table.fsr_mean, 78.7234e6) < 1e-5, "{}", table.fsr_mean);
    let slow = ring.with_phase_velocity_scaled(76.0 / 79.0).unwrap();
    let (ms, fs): (Vec<i64>, Vec<f64>) = (1..=20)
        .map(|m| (m as i64, analytic_mode_frequency(&slow, m).unwrap()))
        .unzip();
    let fit = fit_linear_modes(&ms, &fs).unwrap();
    assert!(rel(fit.get("fsr"), 76e6) < 5e-3, "{}", fit.get("fsr"));
}

#[test]
fn tuning_calibration_round_trip() {
    let spec = MicroloopSpec::from_wide_wire(0.5, 2e-6, 1e-4, 2.1e-9, 40e-6)
        .unwrap()
        .calibrated_to_shift(0.2e-3, 0.0083)
        .unwrap();
    let fields: Vec<f64> = (0..=10).map(|k| 0.02e-3 * k as f64).collect();
    let shifts: Vec<f64> = fields
        .iter()
        .map(|&b| fractional_frequency_shift(&spec, &BiasState::new(b, &spec).unwrap()))
        .collect();
    let fit = fit_quadratic_field_shift(&fields, &shifts).unwrap();
    assert!(rel(fit.get("quad_coeff"), quadratic_shift_coefficient(&spec)) < 1e-10);
    assert!((shifts[10] + 0.0083).abs() < 1e-15);
    assert!(rel(-shifts[10] * 9.40e9, 78.02e6) < 1e-3);
    assert!(rel(-shifts[10] * 4.85e9, 40.255e6) < 1e-3);
}

#[test]
fn odd_contamination_raises_the_residual() {
    let fields: Vec<f64> = (-10..=10).map(|k| 0.02e-3 * k as f64).collect();
    let clean: Vec<f64> = fields.iter().map(|b| -2e5 * b * b).collect();
    let dirty: Vec<f64> = fields.iter().zip(&clean).map(|(b, y)| y + 20.0 * b).collect();
    let a = fit_quadratic_field_shift(&fields, &clean).unwrap();
    let b = fit_quadratic_field_shift(&fields, &dirty).unwrap();
    assert!(a.residual_norm < 1e-15);
    assert!(b.residual_norm > 1e-3);
}

#[test]
fn single_photon_recovery() {
    let tls = TlsModel::calibrate((1.0, 1e4), (1e5, 3.93e5), 5e5, 1.0).unwrap();
    assert!(rel(tls.n_c, 2.086) < 1e-3, "{tls:?}");
    assert!(rel(tls.q_tls0, 8389.0) < 1e-3, "{tls:?}");
    let mode = ModeLoss { tls, q_ex: 9.6e3 };
    let cold = single_photon_efficiency(&mode, &mode, 0.0).unwrap();
    let hot = single_photon_efficiency(&mode, &mode, 1e5).unwrap();
    assert!((cold - 0.2603).abs() < 1e-3, "{cold}");
    assert!((hot - 0.9526).abs() < 1e-3, "{hot}");
    let matched = coupling_efficiency(tls_quality_factor(1.0, &tls).unwrap(), 1e4);
    assert!((matched * matched - 0.25).abs() < 1e-12);
}
