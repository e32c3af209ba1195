//! Two-mode beam-splitter converter.
//!
//! Conversion efficiency follows |t|² = η_s·η_i·4C/(1+C)² with cooperativity
//! C = 4g_0²n_eff/(κ_sκ_i). All rates here are cyclic (Hz); the Kerr solver
//! converts to angular units internally.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_fraction, require_non_negative, require_positive, Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// κ = f/Q, the linewidth (cyclic) of a mode with quality factor Q.
pub fn linewidth_from_q(frequency: f64, q: f64) -> f64 {
    frequency / q
}

/// η = κ_ex/κ = Q_in/(Q_in + Q_ex).
pub fn coupling_efficiency(q_in: f64, q_ex: f64) -> f64 {
    q_in / (q_in + q_ex)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverterParams {
    /// Total linewidths, Hz.
    pub kappa_s: f64,
    pub kappa_i: f64,
    /// External coupling fractions.
    pub eta_s: f64,
    pub eta_i: f64,
    /// Single-photon coupling, Hz.
    pub g0: f64,
    /// Effective pump photon number.
    pub n_eff: f64,
    /// Pump power in units of P_0; when present it is the cooperativity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0_norm: Option<f64>,
}

impl ConverterParams {
    pub fn check(&self) -> Vec<crate::model::Violation> {
        use crate::model::Violation;
        let mut out = Vec::new();
        for (name, v) in [("kappa_s", self.kappa_s), ("kappa_i", self.kappa_i)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(Violation::new(name, format!("must be finite and > 0 (got {v})")));
            }
        }
        for (name, v) in [("eta_s", self.eta_s), ("eta_i", self.eta_i)] {
            if !(0.0..=1.0).contains(&v) {
                out.push(Violation::new(name, format!("0 ≤ η ≤ 1 violated (got {v})")));
            }
        }
        for (name, v) in [("g0", self.g0), ("n_eff", self.n_eff)] {
            if !(v.is_finite() && v >= 0.0) {
                out.push(Violation::new(name, format!("must be finite and >= 0 (got {v})")));
            }
        }
        if let Some(p) = self.p0_norm {
            if !(p.is_finite() && p >= 0.0) {
                out.push(Violation::new("p0_norm", format!("must be finite and >= 0 (got {p})")));
            }
        }
        out
    }

    /// Same mode pair driven at `p0_norm`.
    pub fn at_pump(&self, p0_norm: f64) -> Self {
        Self {
            p0_norm: Some(p0_norm),
            ..*self
        }
    }
}

pub fn cooperativity(params: &ConverterParams) -> f64 {
    match params.p0_norm {
        Some(p) => p,
        None => 4.0 * params.g0 * params.g0 * params.n_eff / (params.kappa_s * params.kappa_i),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringResult {
    /// |t|², the conversion efficiency.
    pub t2: f64,
    /// |r|² = 1 − |t|².
    pub r2: f64,
}

/// Zero-detuning transmission and reflection.
pub fn scattering(c: f64, eta_s: f64, eta_i: f64) -> Result<ScatteringResult> {
    let c = require_non_negative("cooperativity", c)?;
    let eta_s = require_fraction("eta_s", eta_s)?;
    let eta_i = require_fraction("eta_i", eta_i)?;
    let t2 = if c.is_infinite() {
        0.0
    } else {
        eta_s * eta_i * 4.0 * c / ((1.0 + c) * (1.0 + c))
    };
    Ok(ScatteringResult { t2, r2: 1.0 - t2 })
}

/// |t(δ)|² for a probe detuned by δ (Hz) from both modes:
/// η_sη_i·4C·(κ_sκ_i/4)² / |(κ_s/2 − iδ)(κ_i/2 − iδ) + C·κ_sκ_i/4|².
/// The reflection is reported as 1 − |t(δ)|², as at zero detuning.
pub fn conversion_spectrum(detuning: f64, params: &ConverterParams) -> ScatteringResult {
    let c = cooperativity(params);
    let (ks, ki) = (params.kappa_s, params.kappa_i);
    let q = 0.25 * ks * ki;
    let den = Complex64::new(0.5 * ks, -detuning) * Complex64::new(0.5 * ki, -detuning) + c * q;
    let t2 = params.eta_s * params.eta_i * 4.0 * c * q * q / den.norm_sqr();
    ScatteringResult { t2, r2: 1.0 - t2 }
}

/// Γ/κ for matched linewidths at cooperativity `c` ≤ 1, where the response
/// peaks at zero detuning.
pub fn matched_bandwidth_ratio(c: f64) -> f64 {
    let a = 1.0 - c;
    let b = 1.0 + c;
    (-a + (a * a + b * b).sqrt()).sqrt()
}

/// Closed-form FWHM of |t(δ)|² for κ_s = κ_i = κ and 0 ≤ C ≤ 1.
pub fn matched_bandwidth(kappa: f64, c: f64) -> Result<f64> {
    require_positive("kappa", kappa)?;
    if !(0.0..=1.0).contains(&c) || c == 0.0 {
        return Err(Error::Domain {
            name: "cooperativity",
            requirement: "within (0, 1] for the single-peak closed form",
            value: c,
        });
    }
    Ok(kappa * matched_bandwidth_ratio(c))
}

/// Matched linewidth that gives bandwidth Γ at cooperativity `c`.
pub fn kappa_for_bandwidth(bandwidth: f64, c: f64) -> Result<f64> {
    Ok(require_positive("bandwidth", bandwidth)? / matched_bandwidth(1.0, c)?)
}

/// Numerical FWHM of |t(δ)|² about its peak, Hz.
pub fn spectrum_bandwidth(params: &ConverterParams) -> Result<f64> {
    let scale = params.kappa_s.max(params.kappa_i);
    require_positive("kappa", scale)?;
    let t2 = |d: f64| conversion_spectrum(d, params).t2;
    // |t(δ)|² is even in δ; locate the peak on δ ≥ 0.
    let samples = 4000;
    let span = 10.0 * scale * (1.0 + cooperativity(params)).sqrt();
    let (mut peak_d, mut peak) = (0.0, t2(0.0));
    for k in 1..=samples {
        let d = span * k as f64 / samples as f64;
        let v = t2(d);
        if v > peak {
            peak = v;
            peak_d = d;
        }
    }
    if !(peak > 0.0) {
        return Err(Error::Invalid("spectrum has no peak (C = 0 or η = 0)".into()));
    }
    let half = 0.5 * peak;
    let mut lo = peak_d;
    let mut hi = peak_d.max(scale);
    while t2(hi) > half {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t2(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(2.0 * 0.5 * (lo + hi))
}

/// On-chip efficiency from bidirectional peak and background magnitudes:
/// (S_is,p·S_si,p)/(S_ss,bg·S_ii,bg). Inputs are linear amplitude
/// magnitudes |S|, so each path gain appears once in a numerator and once in
/// a denominator and the result is the power efficiency |t|².
pub fn calibrated_efficiency(s_is_peak: f64, s_si_peak: f64, s_ss_bg: f64, s_ii_bg: f64) -> Result<f64> {
    let ss = require_positive("signal background", s_ss_bg)?;
    let ii = require_positive("idler background", s_ii_bg)?;
    Ok(s_is_peak * s_si_peak / (ss * ii))
}

/// P_i/P_i0 = |r + t·e^{iφ}|².
pub fn interference_fringe(phase: f64, r_mag: f64, t_mag: f64) -> Result<f64> {
    check_split(r_mag, t_mag)?;
    Ok((Complex64::new(r_mag, 0.0) + Complex64::from_polar(t_mag, phase)).norm_sqr())
}

/// (max − min)/(max + min) of the fringe, 2rt/(r² + t²).
pub fn fringe_visibility(r_mag: f64, t_mag: f64) -> Result<f64> {
    check_split(r_mag, t_mag)?;
    let p = r_mag * r_mag + t_mag * t_mag;
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * r_mag * t_mag / p)
}

fn check_split(r: f64, t: f64) -> Result<()> {
    require_non_negative("|r|", r)?;
    require_non_negative("|t|", t)?;
    if r * r + t * t > 1.0 + 1e-12 {
        return Err(Error::Domain {
            name: "|r|² + |t|²",
            requirement: "<= 1",
            value: r * r + t * t,
        });
    }
    Ok(())
}

/// Added noise, affine in pump power per mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub slope_s: f64,
    pub slope_i: f64,
    pub intercept_s: f64,
    pub intercept_i: f64,
}

impl NoiseModel {
    /// Intercepts chosen so the prediction at P = P_0 equals `at_p0`.
    pub fn through_p0(slopes: (f64, f64), at_p0: (f64, f64)) -> Self {
        Self {
            slope_s: slopes.0,
            slope_i: slopes.1,
            intercept_s: at_p0.0 - slopes.0,
            intercept_i: at_p0.1 - slopes.1,
        }
    }

    /// Violations of non-negative occupancy on [0, max_pump].
    pub fn check(&self, max_pump: f64) -> Vec<crate::model::Violation> {
        use crate::model::Violation;
        let mut out = Vec::new();
        for (name, a, b) in [
            ("signal", self.intercept_s, self.slope_s),
            ("idler", self.intercept_i, self.slope_i),
        ] {
            let ends = [a, a + b * max_pump.max(0.0)];
            if ends.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                out.push(Violation::new(
                    name,
                    format!("predicted occupancy negative on [0, {max_pump}] P0"),
                ));
            }
        }
        out
    }
}

/// (n_s, n_i) added quanta at pump power `p0_norm`.
pub fn added_noise(p0_norm: f64, model: &NoiseModel) -> Result<(f64, f64)> {
    let p = require_non_negative("normalized pump power", p0_norm)?;
    Ok((
        model.intercept_s + model.slope_s * p,
        model.intercept_i + model.slope_i * p,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KerrSteadyState {
    /// Positive real intracavity photon numbers, ascending.
    pub photons: Vec<f64>,
    pub bistable: bool,
}

/// Steady states of a driven self-Kerr mode:
/// n·[(κ/2)² + (δ + K·n)²] = κ_ex·Φ, with δ = ω_drive − ω_0 and K ≥ 0 the
/// downward frequency pull per photon. All rates are cyclic Hz, Φ in photons/s.
pub fn kerr_steady_state(
    detuning: f64,
    drive_flux: f64,
    kerr_rate: f64,
    kappa: f64,
    kappa_ex: f64,
) -> Result<KerrSteadyState> {
    let kappa = 2.0 * PI * require_positive("kappa", kappa)?;
    let kappa_ex = 2.0 * PI * require_non_negative("kappa_ex", kappa_ex)?;
    let k = 2.0 * PI * require_non_negative("kerr rate", kerr_rate)?;
    let d = 2.0 * PI * detuning;
    let rhs = kappa_ex * require_non_negative("drive flux", drive_flux)?;
    if rhs == 0.0 {
        return Ok(KerrSteadyState {
            photons: vec![0.0],
            bistable: false,
        });
    }
    let lin = 0.25 * kappa * kappa + d * d;
    let photons = if k == 0.0 {
        vec![rhs / lin]
    } else {
        // K²n³ + 2δK n² + ((κ/2)² + δ²) n − κ_ex Φ = 0
        let roots = real_cubic_roots(k * k, 2.0 * d * k, lin, -rhs);
        let poly = |n: f64| ((k * k * n + 2.0 * d * k) * n + lin) * n - rhs;
        let dpoly = |n: f64| (3.0 * k * k * n + 4.0 * d * k) * n + lin;
        let mut out: Vec<f64> = roots
            .into_iter()
            .map(|mut n| {
                for _ in 0..3 {
                    let dp = dpoly(n);
                    if dp == 0.0 {
                        break;
                    }
                    let next = n - poly(n) / dp;
                    if !next.is_finite() {
                        break;
                    }
                    n = next;
                }
                n
            })
            .filter(|&n| n > 0.0)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
        out
    };
    let bistable = photons.len() == 3;
    Ok(KerrSteadyState { photons, bistable })
}

/// Relative residual of a steady-state photon number in the cubic.
pub fn kerr_residual(n: f64, detuning: f64, drive_flux: f64, kerr_rate: f64, kappa: f64, kappa_ex: f64) -> f64 {
    let kappa = 2.0 * PI * kappa;
    let d = 2.0 * PI * detuning;
    let k = 2.0 * PI * kerr_rate;
    let rhs = 2.0 * PI * kappa_ex * drive_flux;
    let shifted = d + k * n;
    let lhs = n * (0.25 * kappa * kappa + shifted * shifted);
    (lhs - rhs).abs() / rhs.abs().max(lhs.abs())
}

/// Real roots of a·x³ + b·x² + c·x + d with a ≠ 0.
fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (b, c, d) = (b / a, c / a, d / a);
    // x = y − b/3 → y³ + p·y + q = 0
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        vec![u + v - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| 2.0 * r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}

/// Cusp of the Kerr response, where bistability first appears.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KerrCriticalPoint {
    /// δ_c = −√3·κ/2, Hz.
    pub detuning: f64,
    /// n_c = κ/(√3·K)
    pub photons: f64,
    /// Φ_c = κ³/(3√3·K·κ_ex), photons/s.
    pub drive_flux: f64,
}

pub fn kerr_critical_point(kerr_rate: f64, kappa: f64, kappa_ex: f64) -> Result<KerrCriticalPoint> {
    let k = require_positive("kerr rate", kerr_rate)?;
    let kappa = require_positive("kappa", kappa)?;
    let kex = require_positive("kappa_ex", kappa_ex)?;
    let sqrt3 = 3f64.sqrt();
    // Angular: Φ_c = (2πκ)³/(3√3·2πK·2πκ_ex)
    let flux = (2.0 * PI * kappa).powi(3) / (3.0 * sqrt3 * (2.0 * PI * k) * (2.0 * PI * kex));
    Ok(KerrCriticalPoint {
        detuning: -sqrt3 * kappa / 2.0,
        photons: kappa / (sqrt3 * k),
        drive_flux: flux,
    })
}

/// Drive power (W) carrying `flux` photons/s at `frequency`.
pub fn flux_to_watts(flux: f64, frequency: f64) -> f64 {
    HBAR * 2.0 * PI * frequency * flux
}

pub fn watts_to_dbm(p: f64) -> f64 {
    10.0 * (p / 1e-3).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Power-dependent internal loss from saturable two-level systems:
/// 1/Q_in(n) = 1/q_other + (1/q_tls0)/sqrt(1 + (n/n_c)^α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsModel {
    pub q_tls0: f64,
    pub n_c: f64,
    pub alpha: f64,
    pub q_other: f64,
}

impl TlsModel {
    pub fn new(q_tls0: f64, n_c: f64, alpha: f64, q_other: f64) -> Result<Self> {
        let model = Self {
            q_tls0,
            n_c,
            alpha,
            q_other,
        };
        match model.check().into_iter().next() {
            None => Ok(model),
            Some(v) => Err(Error::Invalid(format!("{}: {}", v.path, v.message))),
        }
    }

    pub fn check(&self) -> Vec<crate::model::Violation> {
        use crate::model::Violation;
        [
            ("q_tls0", self.q_tls0),
            ("n_c", self.n_c),
            ("alpha", self.alpha),
            ("q_other", self.q_other),
        ]
        .into_iter()
        .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
        .map(|(name, v)| Violation::new(name, format!("must be finite and > 0 (got {v})")))
        .collect()
    }

    /// Solves n_c and q_tls0 so that Q_in(n_low) = q_low and Q_in(n_high) = q_high.
    pub fn calibrate(low: (f64, f64), high: (f64, f64), q_other: f64, alpha: f64) -> Result<Self> {
        let (n_lo, q_lo) = low;
        let (n_hi, q_hi) = high;
        require_positive("q_other", q_other)?;
        require_positive("alpha", alpha)?;
        if !(n_lo >= 0.0 && n_hi > n_lo && q_lo > 0.0 && q_hi > q_lo && q_other > q_hi) {
            return Err(Error::Invalid(
                "calibration needs n_low < n_high and q_low < q_high < q_other".into(),
            ));
        }
        let a = 1.0 / q_lo - 1.0 / q_other;
        let b = 1.0 / q_hi - 1.0 / q_other;
        let r2 = (a / b).powi(2);
        // r2·(1 + n_lo^α·u) = 1 + n_hi^α·u with u = n_c^−α
        let den = n_hi.powf(alpha) - r2 * n_lo.powf(alpha);
        if !(den > 0.0) {
            return Err(Error::Invalid("calibration points cannot be reached by the saturation law".into()));
        }
        let u = (r2 - 1.0) / den;
        let n_c = u.powf(-1.0 / alpha);
        let q_tls0 = 1.0 / (a * (1.0 + (n_lo / n_c).powf(alpha)).sqrt());
        Self::new(q_tls0, n_c, alpha, q_other)
    }
}

pub fn tls_quality_factor(n_photon: f64, model: &TlsModel) -> Result<f64> {
    let n = require_non_negative("photon number", n_photon)?;
    let sat = (1.0 + (n / model.n_c).powf(model.alpha)).sqrt();
    Ok(1.0 / (1.0 / model.q_other + 1.0 / (model.q_tls0 * sat)))
}

/// Loss budget of one mode at the single-photon level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeLoss {
    pub tls: TlsModel,
    pub q_ex: f64,
}

/// Intracavity photons contributed by the probe itself.
pub const PROBE_PHOTONS: f64 = 1.0;

/// Coupling efficiency of a mode with `n_sat` saturation photons on top of
/// the single-photon probe.
pub fn saturated_coupling_efficiency(mode: &ModeLoss, n_sat: f64) -> Result<f64> {
    let q_ex = require_positive("q_ex", mode.q_ex)?;
    let n = PROBE_PHOTONS + require_non_negative("saturation photons", n_sat)?;
    Ok(coupling_efficiency(tls_quality_factor(n, &mode.tls)?, q_ex))
}

/// η_s·η_i at C = 1 with both modes held at `n_sat` saturation photons.
pub fn single_photon_efficiency(signal: &ModeLoss, idler: &ModeLoss, n_sat: f64) -> Result<f64> {
    Ok(saturated_coupling_efficiency(signal, n_sat)? * saturated_coupling_efficiency(idler, n_sat)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairEfficiency {
    /// Upper bound η_s·η_i.
    pub eta_product: f64,
    pub t2: f64,
}

/// Efficiency of each (η_s, η_i) pair at a shared cooperativity.
pub fn pair_sweep(mode_pairs: &[(f64, f64)], c: f64) -> Result<Vec<PairEfficiency>> {
    mode_pairs
        .iter()
        .map(|&(es, ei)| {
            Ok(PairEfficiency {
                eta_product: es * ei,
                t2: scattering(c, es, ei)?.t2,
            })
        })
        .collect()
}
