//! Field tuning and mixing coefficients of the asymmetric microloop.
//!
//! A perpendicular field B drives a circulating supercurrent I_dc = B·d/L_dc.
//! Kinetic inductance grows as L(I) = L_0[1 + (I/I*)²], which lowers every
//! mode by Δf/f = −(γ/2)(I_dc/I_2*)². With γ < 1 the dc bias also leaves a
//! cubic term in the loop energy, the three-wave-mixing coefficient.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::model::{BiasState, MicroloopSpec};

/// Self-Kerr rate K/2π used when none is configured, Hz.
pub const DEFAULT_KERR_RATE_HZ: f64 = 0.1;

/// I_dc = B·d/L_dc; the sign follows the field.
pub fn dc_current(external_field: f64, gap: f64, loop_dc_inductance: f64) -> Result<f64> {
    let d = require_positive("gap", gap)?;
    let l = require_positive("loop dc inductance", loop_dc_inductance)?;
    Ok(external_field * d / l)
}

/// L_0·[1 + (I/I*)²]
pub fn kinetic_inductance(base: f64, current: f64, characteristic_current: f64) -> Result<f64> {
    let i_star = require_positive("characteristic current", characteristic_current)?;
    let x = current / i_star;
    Ok(base * (1.0 + x * x))
}

/// Δf/f = −(γ/2)(I_dc/I_2*)², never positive.
pub fn fractional_frequency_shift(microloop: &MicroloopSpec, bias: &BiasState) -> f64 {
    let x = bias.dc_current / microloop.i2_star;
    -0.5 * microloop.width_ratio * x * x
}

/// The same shift written against the field: −(γ/2)·d²/(L_dc²·I_2*²)·B².
pub fn quadratic_shift_coefficient(microloop: &MicroloopSpec) -> f64 {
    let k = microloop.current_per_field() / microloop.i2_star;
    0.5 * microloop.width_ratio * k * k
}

fn dc_inductances(microloop: &MicroloopSpec, i_dc: f64) -> (f64, f64) {
    let x1 = i_dc / microloop.i1_star;
    let x2 = i_dc / microloop.i2_star;
    (microloop.l1 * (1.0 + x1 * x1), microloop.l2 * (1.0 + x2 * x2))
}

/// Wide-wire rf current implied by the dc-linearized current division
/// I_rf2·L_k2(I_dc) = I_rf1·L_k1(I_dc).
pub fn wide_wire_rf_current(rf_current: f64, microloop: &MicroloopSpec, bias: &BiasState) -> f64 {
    let (lk1, lk2) = dc_inductances(microloop, bias.dc_current);
    rf_current * lk2 / lk1
}

/// E_L = ½L_k1(I_rf1 + I_dc)² + ½L_k2(I_rf2 − I_dc)², in J, with both
/// inductances evaluated at their total wire current.
pub fn loop_energy(rf_current: f64, microloop: &MicroloopSpec, bias: &BiasState) -> Result<f64> {
    let i_dc = bias.dc_current;
    let i1 = wide_wire_rf_current(rf_current, microloop, bias) + i_dc;
    let i2 = rf_current - i_dc;
    if i1.abs() >= microloop.i1_star {
        return Err(Error::Regime {
            wire: "wide wire",
            current: i1.abs(),
            limit: microloop.i1_star,
        });
    }
    if i2.abs() >= microloop.i2_star {
        return Err(Error::Regime {
            wire: "narrow wire",
            current: i2.abs(),
            limit: microloop.i2_star,
        });
    }
    let lk1 = kinetic_inductance(microloop.l1, i1, microloop.i1_star)?;
    let lk2 = kinetic_inductance(microloop.l2, i2, microloop.i2_star)?;
    Ok(0.5 * lk1 * i1 * i1 + 0.5 * lk2 * i2 * i2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearCoefficients {
    /// Closed-form three-wave-mixing coefficient T.
    pub twm: f64,
    /// Closed-form four-wave-mixing coefficient F.
    pub fwm: f64,
    /// Configured self-Kerr rate K/2π, Hz.
    pub kerr_rate: f64,
}

/// Closed forms for T and F with I* taken as I_2*:
///
/// T = (2·I_dc·L_2/I*²)·[(I_dc² + I*²)³/(γ²I_dc² + I*²)³ − 1]
/// F = (L_2/(2I*²))·[1 + (I_dc² + I*²)⁴/(γ·(γ²I_dc² + I*²)⁴)]
pub fn closed_form_coefficients(microloop: &MicroloopSpec, bias: &BiasState, kerr_rate: f64) -> NonlinearCoefficients {
    let g = microloop.width_ratio;
    let i = bias.dc_current;
    let s2 = microloop.i2_star * microloop.i2_star;
    let l2 = microloop.l2;
    let num = i * i + s2;
    let den = g * g * i * i + s2;
    let ratio = num / den;
    let twm = 2.0 * i * l2 / s2 * (ratio.powi(3) - 1.0);
    let fwm = l2 / (2.0 * s2) * (1.0 + ratio.powi(4) / g);
    NonlinearCoefficients {
        twm,
        fwm,
        kerr_rate,
    }
}

/// Third- and fourth-order Taylor coefficients of a scalar function at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorCoefficients {
    /// f'''(0)/3!
    pub c3: f64,
    /// f''''(0)/4!
    pub c4: f64,
}

/// Relative accuracy the Richardson table must reach.
pub const TAYLOR_TARGET: f64 = 1e-6;
const RICHARDSON_LEVELS: usize = 6;

fn third_difference<F: Fn(f64) -> f64>(f: &F, h: f64) -> f64 {
    (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h)
}

fn fourth_difference<F: Fn(f64) -> f64>(f: &F, h: f64) -> f64 {
    (f(2.0 * h) - 4.0 * f(h) + 6.0 * f(0.0) - 4.0 * f(-h) + f(-2.0 * h)) / (h * h * h * h)
}

// Richardson table for an O(h²) stencil with step halving. Returns the best
// estimate and the relative change of the last refinement.
fn richardson<D: Fn(f64) -> f64>(stencil: D, h0: f64) -> (f64, f64) {
    let mut prev_row: Vec<f64> = Vec::new();
    let mut best = f64::NAN;
    let mut change = f64::INFINITY;
    for level in 0..RICHARDSON_LEVELS {
        let h = h0 / f64::powi(2.0, level as i32);
        let mut row = vec![stencil(h)];
        for j in 1..=level {
            let factor = f64::powi(4.0, j as i32);
            let v = (factor * row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        let estimate = row[level];
        if level > 0 {
            let scale = estimate.abs().max(best.abs());
            change = if scale == 0.0 { 0.0 } else { (estimate - best).abs() / scale };
        }
        best = estimate;
        prev_row = row;
        if level >= 2 && change <= 0.1 * TAYLOR_TARGET {
            break;
        }
    }
    (best, change)
}

/// Extracts c3 and c4 of `f` about 0 by central differences with Richardson
/// extrapolation, starting from step `h0`.
///
/// `scale` is the magnitude below which an estimate counts as zero: a
/// coefficient that has collapsed to `|c|·h0^k < scale` is reported as
/// converged even though its relative change is meaningless.
pub fn taylor_oracle<F: Fn(f64) -> f64>(f: F, h0: f64, scale: f64) -> Result<TaylorCoefficients> {
    require_positive("oracle step", h0)?;
    let (d3, change3) = richardson(|h| third_difference(&f, h), h0);
    let (d4, change4) = richardson(|h| fourth_difference(&f, h), h0);
    let negligible = |d: f64, k: i32| d.abs() * h0.powi(k) <= scale;
    for (d, change, k) in [(d3, change3, 3), (d4, change4, 4)] {
        if !d.is_finite() {
            return Err(Error::Precision(f64::NAN));
        }
        if change > TAYLOR_TARGET && !negligible(d, k) {
            return Err(Error::Precision(change));
        }
    }
    Ok(TaylorCoefficients {
        c3: d3 / 6.0,
        c4: d4 / 24.0,
    })
}

/// Closed-form coefficients next to the oracle expansion of [`loop_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientComparison {
    pub closed_form: NonlinearCoefficients,
    pub oracle: TaylorCoefficients,
    /// |c3 − T| / max(|c3|, |T|), 0 when both vanish. T already carries
    /// the factor L_2, so it is directly the cubic energy coefficient.
    pub twm_discrepancy: f64,
    /// |c4 − F| / max(|c4|, |F|)
    pub fwm_discrepancy: f64,
    /// Gap to the expansion written as T·L_2·I³, which counts L_2 twice.
    pub twm_discrepancy_l2_scaled: f64,
    /// Gap to F·L_2·I⁴.
    pub fwm_discrepancy_l2_scaled: f64,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Evaluates the closed forms and checks them against the numerical expansion
/// of the loop energy in the narrow-wire rf current.
pub fn twm_fwm_coefficients(
    microloop: &MicroloopSpec,
    bias: &BiasState,
    kerr_rate: f64,
) -> Result<CoefficientComparison> {
    // Headroom for the ±2h stencil inside both wires.
    let headroom = (microloop.i2_star - bias.dc_current.abs())
        .min(microloop.i1_star - bias.dc_current.abs());
    if headroom <= 0.0 {
        return Err(Error::Regime {
            wire: "narrow wire",
            current: bias.dc_current.abs(),
            limit: microloop.i2_star,
        });
    }
    // A wide first step keeps the fourth difference clear of rounding when
    // the bias sits close to I_2*. The wide wire carries a scaled copy of the
    // rf current, so shrink the step until both wires stay in range.
    let mut h0 = 0.2 * headroom.min(microloop.i2_star);
    for _ in 0..20 {
        if loop_energy(2.0 * h0, microloop, bias).is_ok() && loop_energy(-2.0 * h0, microloop, bias).is_ok() {
            break;
        }
        h0 *= 0.5;
    }
    loop_energy(2.0 * h0, microloop, bias)?;
    loop_energy(-2.0 * h0, microloop, bias)?;

    let energy = |x: f64| loop_energy(x, microloop, bias).unwrap_or(f64::NAN);
    // Rounding floor of the stencils, in energy units.
    let e_scale = 0.5 * (microloop.l1 + microloop.l2) * (bias.dc_current.abs() + h0).powi(2);
    let oracle = taylor_oracle(energy, h0, 1e3 * f64::EPSILON * e_scale)?;
    let closed = closed_form_coefficients(microloop, bias, kerr_rate);
    Ok(CoefficientComparison {
        closed_form: closed,
        oracle,
        twm_discrepancy: relative_gap(oracle.c3, closed.twm),
        fwm_discrepancy: relative_gap(oracle.c4, closed.fwm),
        twm_discrepancy_l2_scaled: relative_gap(oracle.c3, closed.twm * microloop.l2),
        fwm_discrepancy_l2_scaled: relative_gap(oracle.c4, closed.fwm * microloop.l2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop_half() -> MicroloopSpec {
        MicroloopSpec::from_wide_wire(0.5, 2e-6, 1.1e-4, 2.1e-9, 40e-6).unwrap()
    }

    fn bias_at(microloop: &MicroloopSpec, i_dc: f64) -> BiasState {
        BiasState {
            external_field: i_dc / microloop.current_per_field(),
            dc_current: i_dc,
        }
    }

    #[test]
    fn dc_current_scaling() {
        assert_eq!(dc_current(0.0, 2e-6, 1e-4).unwrap(), 0.0);
        let a = dc_current(1e-4, 2e-6, 1e-4).unwrap();
        let b = dc_current(2e-4, 2e-6, 1e-4).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-20);
        assert!(dc_current(1e-4, 0.0, 1e-4).is_err());
        assert!(dc_current(1e-4, 1e-6, -1.0).is_err());
    }

    #[test]
    fn kinetic_inductance_points() {
        assert_eq!(kinetic_inductance(3.0, 0.0, 1.0).unwrap(), 3.0);
        assert_eq!(kinetic_inductance(3.0, 2.0, 2.0).unwrap(), 6.0);
        let l = kinetic_inductance(1.0, 0.245, 1.0).unwrap();
        assert!((l - 1.060).abs() < 1e-3);
    }

    #[test]
    fn shift_halves_with_gamma_at_fixed_ratio() {
        let narrow = loop_half();
        let symmetric = MicroloopSpec::from_wide_wire(1.0, 2e-6, 1.1e-4, 2.1e-9, 20e-6).unwrap();
        // same I_2* = 20 µA in both, same I_dc
        let a = fractional_frequency_shift(&narrow, &bias_at(&narrow, 3e-6));
        let b = fractional_frequency_shift(&symmetric, &bias_at(&symmetric, 3e-6));
        assert!((a / b - 0.5).abs() < 1e-14);
        assert_eq!(fractional_frequency_shift(&narrow, &bias_at(&narrow, 0.0)), 0.0);
    }

    #[test]
    fn calibration_hits_requested_shift() {
        let cal = loop_half().calibrated_to_shift(2e-4, 0.0083).unwrap();
        let bias = BiasState::new(2e-4, &cal).unwrap();
        let shift = fractional_frequency_shift(&cal, &bias);
        assert!((shift + 0.0083).abs() < 1e-15);
        assert!((quadratic_shift_coefficient(&cal) * 4e-8 - 0.0083).abs() < 1e-15);
    }

    #[test]
    fn rf_free_energy() {
        let spec = loop_half();
        let bias = bias_at(&spec, 4e-6);
        let e = loop_energy(0.0, &spec, &bias).unwrap();
        let (lk1, lk2) = dc_inductances(&spec, 4e-6);
        assert!((e - 0.5 * (lk1 + lk2) * 16e-12).abs() <= 1e-15 * e);
    }

    #[test]
    fn regime_violation() {
        let spec = loop_half();
        let bias = bias_at(&spec, 4e-6);
        assert!(matches!(loop_energy(-17e-6, &spec, &bias), Err(Error::Regime { .. })));
    }

    #[test]
    fn closed_forms_vanish_where_expected() {
        let spec = loop_half();
        let c = closed_form_coefficients(&spec, &bias_at(&spec, 0.0), 0.1);
        assert_eq!(c.twm, 0.0);
        let sym = MicroloopSpec::from_wide_wire(1.0, 2e-6, 1.1e-4, 2.1e-9, 20e-6).unwrap();
        let c = closed_form_coefficients(&sym, &bias_at(&sym, 5e-6), 0.1);
        assert_eq!(c.twm, 0.0);
        assert!(c.fwm > 0.0);
    }

    #[test]
    fn oracle_recovers_polynomial() {
        let f = |x: f64| 0.3 - 1.2 * x + 0.7 * x * x - 2.5 * x.powi(3) + 4.25 * x.powi(4);
        let t = taylor_oracle(f, 0.1, 1e-14).unwrap();
        assert!((t.c3 + 2.5).abs() <= 1e-8 * 2.5);
        assert!((t.c4 - 4.25).abs() <= 1e-8 * 4.25);
    }

    #[test]
    fn oracle_on_transcendental() {
        // exp: c3 = 1/6, c4 = 1/24
        let t = taylor_oracle(f64::exp, 0.2, 1e-14).unwrap();
        assert!((t.c3 - 1.0 / 6.0).abs() < 1e-7);
        assert!((t.c4 - 1.0 / 24.0).abs() < 1e-7);
    }

    #[test]
    fn closed_forms_are_the_energy_coefficients() {
        let spec = loop_half();
        for x in [0.1, 0.5, 0.9] {
            let c = twm_fwm_coefficients(&spec, &bias_at(&spec, x * spec.i2_star), 0.1).unwrap();
            assert!(c.twm_discrepancy < 1e-8, "{c:?}");
            assert!(c.fwm_discrepancy < 1e-8, "{c:?}");
            assert!(c.twm_discrepancy_l2_scaled > 0.99);
        }
    }

    #[test]
    fn oracle_reports_precision_failure() {
        // |x|^3.5 has no fourth derivative at 0
        let r = taylor_oracle(|x: f64| x.abs().powf(3.5), 0.1, 0.0);
        assert!(matches!(r, Err(Error::Precision(_))));
    }
}
