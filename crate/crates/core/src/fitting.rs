//! Damped least squares and the resonator fits built on it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured response against frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Complex(Vec<Complex64>),
    PowerDb(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub frequency: Vec<f64>,
    pub response: Response,
}

pub const MIN_TRACE_POINTS: usize = 5;

impl Trace {
    pub fn complex(frequency: Vec<f64>, response: Vec<Complex64>) -> Result<Self> {
        Self::checked(frequency, Response::Complex(response))
    }

    pub fn power_db(frequency: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        Self::checked(frequency, Response::PowerDb(response))
    }

    fn checked(frequency: Vec<f64>, response: Response) -> Result<Self> {
        let len = match &response {
            Response::Complex(v) => v.len(),
            Response::PowerDb(v) => v.len(),
        };
        if len != frequency.len() {
            return Err(Error::Invalid(format!(
                "trace has {} frequencies but {len} responses",
                frequency.len()
            )));
        }
        if len < MIN_TRACE_POINTS {
            return Err(Error::Invalid(format!("trace needs at least {MIN_TRACE_POINTS} points, got {len}")));
        }
        if !frequency.windows(2).all(|w| w[1] > w[0]) || !frequency.iter().all(|f| f.is_finite()) {
            return Err(Error::Invalid("trace frequencies must be finite and strictly increasing".into()));
        }
        Ok(Self { frequency, response })
    }

    pub fn len(&self) -> usize {
        self.frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency.is_empty()
    }

    /// Trace with every complex sample multiplied by `factor`; power traces
    /// gain 20·log10|factor| dB.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let response = match &self.response {
            Response::Complex(v) => Response::Complex(v.iter().map(|s| s * factor).collect()),
            Response::PowerDb(v) => {
                let gain = 20.0 * factor.norm().log10();
                Response::PowerDb(v.iter().map(|p| p + gain).collect())
            }
        };
        Self {
            frequency: self.frequency.clone(),
            response,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    /// Euclidean norm of the final residual vector.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Residual norm after the initial guess and after each accepted step.
    #[serde(skip)]
    pub residual_history: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> f64 {
        self.parameters.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn error(&self, name: &str) -> f64 {
        self.standard_errors.get(name).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LeastSquaresOptions {
    pub max_iterations: usize,
    /// Converged once ‖g‖∞ falls below this fraction of its initial value.
    pub gradient_tolerance: f64,
    /// Initial damping relative to the Marquardt scale diag(JᵀJ).
    pub initial_damping: f64,
}

impl Default for LeastSquaresOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            initial_damping: 1e-12,
        }
    }
}

/// Raw solver output in the caller's parameterization.
#[derive(Debug, Clone)]
struct Solution {
    x: Vec<f64>,
    standard_errors: Vec<f64>,
    residual_norm: f64,
    converged: bool,
    iterations: usize,
    history: Vec<f64>,
}

fn norm2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn clamp_to(x: &mut [f64], bounds: Option<&[(f64, f64)]>) {
    if let Some(b) = bounds {
        for (v, &(lo, hi)) in x.iter_mut().zip(b) {
            *v = v.clamp(lo, hi);
        }
    }
}

fn jacobian<F>(f: &F, x: &[f64], r0: &[f64], bounds: Option<&[(f64, f64)]>) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = 6e-6 * x[j].abs().max(1.0);
        let (lo, hi) = bounds.map_or((f64::NEG_INFINITY, f64::INFINITY), |b| b[j]);
        let can_up = x[j] + h <= hi;
        let can_down = x[j] - h >= lo;
        let column: Vec<f64> = if can_up && can_down {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        } else if can_up {
            probe[j] = x[j] + h;
            f(&probe).iter().zip(r0).map(|(a, b)| (a - b) / h).collect()
        } else {
            probe[j] = x[j] - h;
            r0.iter().zip(f(&probe)).map(|(a, b)| (a - b) / h).collect()
        };
        probe[j] = x[j];
        for (i, v) in column.into_iter().enumerate() {
            jac[(i, j)] = v;
        }
    }
    jac
}

fn solve<F>(
    residuals: F,
    initial: &[f64],
    bounds: Option<&[(f64, f64)]>,
    options: LeastSquaresOptions,
) -> Result<Solution>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = initial.len();
    if n == 0 {
        return Err(Error::Invalid("no parameters to fit".into()));
    }
    if let Some(b) = bounds {
        if b.len() != n {
            return Err(Error::Invalid(format!("{} bounds for {n} parameters", b.len())));
        }
        for (j, (&x, &(lo, hi))) in initial.iter().zip(b).enumerate() {
            if !(lo <= x && x <= hi) {
                return Err(Error::Invalid(format!("initial parameter {j} = {x} outside [{lo}, {hi}]")));
            }
        }
    }
    let mut x = initial.to_vec();
    let mut r = residuals(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("model is not finite at the initial parameters".into()));
    }
    let m = r.len();
    let mut cost = 0.5 * norm2(&r).powi(2);
    let mut history = vec![norm2(&r)];

    let mut jac = jacobian(&residuals, &x, &r, bounds);
    let mut normal = jac.transpose() * &jac;
    let mut grad = jac.transpose() * DVector::from_column_slice(&r);
    let mut scale: Vec<f64> = (0..n).map(|j| normal[(j, j)]).collect();
    if let Some(j) = scale.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Conditioning(format!("parameter {j} has no influence on the residuals")));
    }
    let g0 = grad.amax();
    let mut mu = options.initial_damping;
    let mut nu = 2.0;
    let mut iterations = 0;

    let gradient_small = |grad: &DVector<f64>, normal: &DMatrix<f64>, r_norm: f64| {
        let g = grad.amax();
        if g <= options.gradient_tolerance * g0 {
            return true;
        }
        // At working precision the gradient cannot shrink below the cosine
        // between the residual and any Jacobian column reaching ~1e-12.
        r_norm > 0.0
            && (0..n).all(|j| grad[j].abs() <= 1e-12 * normal[(j, j)].sqrt() * r_norm)
    };

    let mut converged = gradient_small(&grad, &normal, norm2(&r));
    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let mut damped = normal.clone();
        for j in 0..n {
            damped[(j, j)] += mu * scale[j];
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => {
                mu *= nu;
                nu *= 2.0;
                continue;
            }
        };
        let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        clamp_to(&mut trial, bounds);
        let actual_step = DVector::from_iterator(n, trial.iter().zip(&x).map(|(a, b)| a - b));
        if actual_step.amax() <= f64::EPSILON * x.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300) {
            break;
        }
        let r_trial = residuals(&trial);
        let cost_trial = 0.5 * norm2(&r_trial).powi(2);
        let predicted = -(actual_step.dot(&grad) + 0.5 * actual_step.dot(&(&normal * &actual_step)));
        let rho = if predicted > 0.0 { (cost - cost_trial) / predicted } else { -1.0 };
        if cost_trial.is_finite() && cost_trial <= cost && rho > 0.0 {
            x = trial;
            r = r_trial;
            cost = cost_trial;
            history.push(norm2(&r));
            mu *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
            nu = 2.0;
            jac = jacobian(&residuals, &x, &r, bounds);
            normal = jac.transpose() * &jac;
            grad = jac.transpose() * DVector::from_column_slice(&r);
            for j in 0..n {
                scale[j] = scale[j].max(normal[(j, j)]);
            }
            converged = gradient_small(&grad, &normal, norm2(&r));
        } else {
            mu *= nu;
            nu *= 2.0;
            if mu > 1e30 {
                break;
            }
        }
    }

    let covariance = normal
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Conditioning("JᵀJ is singular at the solution".into()))?
        .inverse();
    let dof = m.saturating_sub(n);
    let s2 = if dof > 0 { 2.0 * cost / dof as f64 } else { 0.0 };
    let standard_errors = (0..n).map(|j| (s2 * covariance[(j, j)]).max(0.0).sqrt()).collect();
    Ok(Solution {
        x,
        standard_errors,
        residual_norm: norm2(&r),
        converged,
        iterations,
        history,
    })
}

fn named(names: &[&str], values: &[f64]) -> BTreeMap<String, f64> {
    names.iter().map(|s| s.to_string()).zip(values.iter().copied()).collect()
}

/// Levenberg–Marquardt minimization of ½‖r(p)‖² with a central-difference
/// Jacobian, Marquardt diagonal scaling and optional box bounds.
pub fn least_squares<F>(
    residuals: F,
    names: &[&str],
    initial: &[f64],
    bounds: Option<&[(f64, f64)]>,
    options: LeastSquaresOptions,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if names.len() != initial.len() {
        return Err(Error::Invalid("one name per parameter required".into()));
    }
    let sol = solve(residuals, initial, bounds, options)?;
    Ok(FitResult {
        parameters: named(names, &sol.x),
        standard_errors: named(names, &sol.standard_errors),
        residual_norm: sol.residual_norm,
        converged: sol.converged,
        iterations: sol.iterations,
        residual_history: sol.history,
    })
}

/// Fits y ≈ model(p, x) pointwise.
pub fn curve_fit<M>(
    model: M,
    x: &[f64],
    y: &[f64],
    names: &[&str],
    initial: &[f64],
    bounds: Option<&[(f64, f64)]>,
) -> Result<FitResult>
where
    M: Fn(&[f64], f64) -> f64,
{
    if x.len() != y.len() {
        return Err(Error::Invalid("x and y differ in length".into()));
    }
    least_squares(
        |p: &[f64]| x.iter().zip(y).map(|(&xi, &yi)| model(p, xi) - yi).collect(),
        names,
        initial,
        bounds,
        LeastSquaresOptions::default(),
    )
}

/// Resonator parameters of the one-port reflection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionParams {
    pub f0: f64,
    pub q_in: f64,
    pub q_ex: f64,
    pub amplitude: f64,
    pub phase_offset: f64,
    /// Cable delay, s. The delay phase is referenced to `reference_frequency`.
    pub delay: f64,
}

/// S11(f) = A·e^{iθ}·e^{i2π(f − f_ref)τ}·((1/Q_ex − 1/Q_in) − 2iδ/f0)/((1/Q_ex + 1/Q_in) + 2iδ/f0)
/// with δ = f − f0.
pub fn reflection_model(f: f64, p: &ReflectionParams, reference_frequency: f64) -> Complex64 {
    normalized_reflection(f - p.f0, p.f0, 1.0 / p.q_in, 1.0 / p.q_ex)
        * Complex64::from_polar(p.amplitude, p.phase_offset + 2.0 * PI * (f - reference_frequency) * p.delay)
}

fn normalized_reflection(detuning: f64, f0: f64, inv_q_in: f64, inv_q_ex: f64) -> Complex64 {
    let x = 2.0 * detuning / f0;
    Complex64::new(inv_q_ex - inv_q_in, -x) / Complex64::new(inv_q_ex + inv_q_in, x)
}

/// Midpoint of the trace, the reference for the delay phase.
pub fn trace_reference_frequency(trace: &Trace) -> f64 {
    0.5 * (trace.frequency[0] + trace.frequency[trace.len() - 1])
}

/// Net phase winding of a complex response, in turns.
pub fn winding_number(response: &[Complex64]) -> i64 {
    let total: f64 = response
        .windows(2)
        .map(|w| (w[1] / w[0]).arg())
        .sum();
    (total / (2.0 * PI)).round() as i64
}

struct Scaling {
    f_guess: f64,
    width_guess: f64,
    span: f64,
    reference: f64,
}

impl Scaling {
    // Internal coordinates: u = (f0 − f_guess)/width, ln Q_in, ln Q_ex, A, θ, τ·span
    fn decode(&self, p: &[f64]) -> ReflectionParams {
        ReflectionParams {
            f0: self.f_guess + p[0] * self.width_guess,
            q_in: p[1].exp(),
            q_ex: p[2].exp(),
            amplitude: p[3],
            phase_offset: p[4],
            delay: p[5] / self.span,
        }
    }

    fn encode(&self, r: &ReflectionParams) -> Vec<f64> {
        vec![
            (r.f0 - self.f_guess) / self.width_guess,
            r.q_in.ln(),
            r.q_ex.ln(),
            r.amplitude,
            r.phase_offset,
            r.delay * self.span,
        ]
    }

    fn model(&self, f: f64, p: &[f64]) -> Complex64 {
        let f0 = self.f_guess + p[0] * self.width_guess;
        let detuning = (f - self.f_guess) - p[0] * self.width_guess;
        normalized_reflection(detuning, f0, (-p[1]).exp(), (-p[2]).exp())
            * Complex64::from_polar(p[3], p[4] + 2.0 * PI * (f - self.reference) * p[5] / self.span)
    }
}

fn moving_average(v: &[f64], half: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(v.len() + 1);
    prefix.push(0.0);
    for x in v {
        prefix.push(prefix.last().unwrap() + x);
    }
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(v.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Starting points from the dip: the background is taken from the trace
/// ends and |S − background|² is treated as a Lorentzian of full width f0/Q.
/// Returns the over- and under-coupled readings of the same dip depth.
fn automatic_guesses(freq: &[f64], s: &[Complex64]) -> Result<[ReflectionParams; 2]> {
    let n = freq.len();
    let edge = (n / 50).max(1);
    let head: Complex64 = s[..edge].iter().sum::<Complex64>() / edge as f64;
    let tail: Complex64 = s[n - edge..].iter().sum::<Complex64>() / edge as f64;
    let background = 0.5 * (head + tail);
    if background.norm() == 0.0 {
        return Err(Error::NoResonance("zero background level".into()));
    }
    let excursion: Vec<f64> = s.iter().map(|z| (z - background).norm_sqr()).collect();
    let smooth = moving_average(&excursion, (n / 200).max(1));
    let (peak_idx, &peak) = smooth
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("trace is non-empty");
    let mut sorted = smooth.clone();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[n / 10];
    // Point-to-point scatter measures the noise power; the resonance itself
    // barely moves between neighbouring samples.
    let noise = s.windows(2).map(|w| (w[1] - w[0]).norm_sqr()).sum::<f64>() / (2.0 * (n - 1) as f64);
    let contrast = peak - sorted[n / 2];
    if !(contrast > 10.0 * noise && peak > 1e-6 * background.norm_sqr()) {
        return Err(Error::NoResonance(format!(
            "peak excursion {peak:.3e} not distinguishable from noise power {noise:.3e}"
        )));
    }
    let half = 0.5 * (peak + floor);
    let left = (0..peak_idx).rev().find(|&i| smooth[i] < half);
    let right = (peak_idx + 1..n).find(|&i| smooth[i] < half);
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::NoResonance("dip is not contained in the trace".into()));
    };
    let f0 = freq[peak_idx];
    let width = (freq[right] - freq[left]).max(freq[1] - freq[0]);
    let q_total = f0 / width;
    let amplitude = background.norm();
    // Far from resonance the normalized response is −1, at resonance
    // 1 − 2Q/Q_ex, so the excursion peak is (2Q/Q_ex)²·A².
    let ratio = ((peak - floor).max(0.0).sqrt() / (2.0 * amplitude)).clamp(0.02, 0.98);
    let guess = |r: f64| ReflectionParams {
        f0,
        q_in: q_total / (1.0 - r),
        q_ex: q_total / r,
        amplitude,
        phase_offset: (-background).arg(),
        delay: 0.0,
    };
    Ok([guess(ratio.max(1.0 - ratio)), guess(ratio.min(1.0 - ratio))])
}

/// Fits the one-port reflection model to a complex trace, or its squared
/// magnitude to a power trace. Power traces carry no phase, so phase_offset
/// and delay are pinned at zero and the over-coupled branch (Q_ex ≤ Q_in) is
/// reported.
pub fn fit_reflection_resonance(trace: &Trace, initial_guess: Option<ReflectionParams>) -> Result<FitResult> {
    let freq = &trace.frequency;
    let (samples, is_power) = match &trace.response {
        Response::Complex(v) => (v.clone(), false),
        Response::PowerDb(v) => (
            v.iter()
                .map(|db| Complex64::new(10f64.powf(db / 20.0), 0.0))
                .collect::<Vec<_>>(),
            true,
        ),
    };
    let starts: Vec<ReflectionParams> = match initial_guess {
        Some(g) => vec![g],
        // A magnitude-only trace works too: the guesses need only the dip
        // location, width and depth.
        None => automatic_guesses(freq, &samples)?.to_vec(),
    };
    let reference = trace_reference_frequency(trace);
    let span = freq[freq.len() - 1] - freq[0];

    let mut best: Option<(Solution, Scaling)> = None;
    for start in starts {
        let scaling = Scaling {
            f_guess: start.f0,
            width_guess: start.f0 * (1.0 / start.q_in + 1.0 / start.q_ex),
            span,
            reference,
        };
        let mut x0 = scaling.encode(&start);
        if is_power {
            x0[3] = x0[3].abs();
            x0.truncate(4);
        }
        let sol = if is_power {
            let residual = |p: &[f64]| -> Vec<f64> {
                let full = [p[0], p[1], p[2], p[3], 0.0, 0.0];
                freq.iter()
                    .zip(&samples)
                    .map(|(&f, z)| scaling.model(f, &full).norm() - z.re)
                    .collect()
            };
            solve(residual, &x0, None, LeastSquaresOptions::default())
        } else {
            let residual = |p: &[f64]| -> Vec<f64> {
                let mut out = Vec::with_capacity(2 * freq.len());
                for (&f, z) in freq.iter().zip(&samples) {
                    let d = scaling.model(f, p) - z;
                    out.push(d.re);
                    out.push(d.im);
                }
                out
            };
            solve(residual, &x0, None, LeastSquaresOptions::default())
        };
        let Ok(sol) = sol else { continue };
        if sol.x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let better = best.as_ref().is_none_or(|(b, _)| sol.residual_norm < b.residual_norm);
        if better {
            best = Some((sol, scaling));
        }
    }
    let (sol, scaling) = best.ok_or_else(|| Error::NoResonance("no start converged to a resonance".into()))?;

    let mut x = sol.x.clone();
    let mut se = sol.standard_errors.clone();
    if is_power {
        x.extend([0.0, 0.0]);
        se.extend([0.0, 0.0]);
        // |S| cannot tell Q_in from Q_ex; report the over-coupled reading.
        if x[1] < x[2] {
            x.swap(1, 2);
            se.swap(1, 2);
        }
    }
    let mut params = scaling.decode(&x);
    if params.amplitude < 0.0 {
        params.amplitude = -params.amplitude;
        params.phase_offset += PI;
    }
    params.phase_offset = params.phase_offset.rem_euclid(2.0 * PI);
    let errors = [
        se[0] * scaling.width_guess,
        params.q_in * se[1],
        params.q_ex * se[2],
        se[3],
        se[4],
        se[5] / scaling.span,
    ];
    let names = ["f0", "q_in", "q_ex", "amplitude", "phase_offset", "delay"];
    let values = [
        params.f0,
        params.q_in,
        params.q_ex,
        params.amplitude,
        params.phase_offset,
        params.delay,
    ];
    Ok(FitResult {
        parameters: named(&names, &values),
        standard_errors: named(&names, &errors),
        residual_norm: sol.residual_norm,
        converged: sol.converged,
        iterations: sol.iterations,
        residual_history: sol.history,
    })
}

/// Least squares of Δf/f = −q·B², solved in closed form.
pub fn fit_quadratic_field_shift(fields: &[f64], fractional_shifts: &[f64]) -> Result<FitResult> {
    if fields.len() != fractional_shifts.len() {
        return Err(Error::Invalid("fields and shifts differ in length".into()));
    }
    if fields.len() < 3 {
        return Err(Error::Invalid(format!("need at least 3 points, got {}", fields.len())));
    }
    let s4: f64 = fields.iter().map(|b| b.powi(4)).sum();
    if !(s4 > 0.0) {
        return Err(Error::Conditioning("all fields are zero".into()));
    }
    let sy: f64 = fields.iter().zip(fractional_shifts).map(|(b, y)| y * b * b).sum();
    let q = -sy / s4;
    let resid: Vec<f64> = fields
        .iter()
        .zip(fractional_shifts)
        .map(|(b, y)| y + q * b * b)
        .collect();
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let se = (rss / (fields.len() - 1) as f64 / s4).sqrt();
    Ok(FitResult {
        parameters: named(&["quad_coeff"], &[q]),
        standard_errors: named(&["quad_coeff"], &[se]),
        residual_norm: rss.sqrt(),
        converged: true,
        iterations: 0,
        residual_history: vec![rss.sqrt()],
    })
}

/// Ordinary least squares f = fsr·m + offset.
pub fn fit_linear_modes(mode_numbers: &[i64], frequencies: &[f64]) -> Result<FitResult> {
    if mode_numbers.len() != frequencies.len() {
        return Err(Error::Invalid("mode numbers and frequencies differ in length".into()));
    }
    let n = mode_numbers.len();
    let mut distinct = mode_numbers.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Invalid("need at least 2 distinct mode numbers".into()));
    }
    let mean_m = mode_numbers.iter().map(|&m| m as f64).sum::<f64>() / n as f64;
    let mean_f = frequencies.iter().sum::<f64>() / n as f64;
    let sxx: f64 = mode_numbers.iter().map(|&m| (m as f64 - mean_m).powi(2)).sum();
    let sxy: f64 = mode_numbers
        .iter()
        .zip(frequencies)
        .map(|(&m, f)| (m as f64 - mean_m) * (f - mean_f))
        .sum();
    let fsr = sxy / sxx;
    let offset = mean_f - fsr * mean_m;
    let rss: f64 = mode_numbers
        .iter()
        .zip(frequencies)
        .map(|(&m, f)| (f - fsr * m as f64 - offset).powi(2))
        .sum();
    let s2 = if n > 2 { rss / (n - 2) as f64 } else { 0.0 };
    let se_fsr = (s2 / sxx).sqrt();
    let se_offset = (s2 * (1.0 / n as f64 + mean_m * mean_m / sxx)).sqrt();
    Ok(FitResult {
        parameters: named(&["fsr", "offset"], &[fsr, offset]),
        standard_errors: named(&["fsr", "offset"], &[se_fsr, se_offset]),
        residual_norm: rss.sqrt(),
        converged: true,
        iterations: 0,
        residual_history: vec![rss.sqrt()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_in_two_iterations() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.25 * v - 1.5).collect();
        let fit = curve_fit(|p, x| p[0] * x + p[1], &x, &y, &["a", "b"], &[0.0, 0.0], None).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!(fit.iterations <= 2, "{}", fit.iterations);
        // Exact up to the rounding in the central-difference Jacobian.
        assert!((fit.get("a") - 3.25).abs() < 1e-8);
        assert!((fit.get("b") + 1.5).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_valley() {
        let fit = least_squares(
            |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &["x", "y"],
            &[-1.2, 1.0],
            None,
            LeastSquaresOptions::default(),
        )
        .unwrap();
        assert!(fit.converged);
        assert!((fit.get("x") - 1.0).abs() < 1e-8);
        assert!((fit.get("y") - 1.0).abs() < 1e-8);
        assert!(fit.residual_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn bounds_are_respected() {
        let fit = least_squares(
            |p: &[f64]| vec![p[0] - 3.0],
            &["x"],
            &[0.0],
            Some(&[(-1.0, 2.0)]),
            LeastSquaresOptions::default(),
        )
        .unwrap();
        assert!(fit.get("x") <= 2.0);
        assert!((fit.get("x") - 2.0).abs() < 1e-12);
        assert!(least_squares(|p: &[f64]| vec![p[0]], &["x"], &[5.0], Some(&[(-1.0, 2.0)]), LeastSquaresOptions::default()).is_err());
    }

    #[test]
    fn irrelevant_parameter_is_a_conditioning_error() {
        let err = least_squares(
            |p: &[f64]| vec![p[0] - 1.0, p[0] + 1.0],
            &["a", "b"],
            &[0.0, 0.0],
            None,
            LeastSquaresOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Conditioning(_)));
    }

    #[test]
    fn reflection_on_resonance() {
        let p = ReflectionParams {
            f0: 5e9,
            q_in: 1e5,
            q_ex: 1e4,
            amplitude: 1.0,
            phase_offset: 0.0,
            delay: 0.0,
        };
        let s = reflection_model(5e9, &p, 5e9);
        let expected = (1e-4 - 1e-5) / (1e-4 + 1e-5);
        assert!((s.re - expected).abs() < 1e-14 && s.im.abs() < 1e-14);
        let far = reflection_model(6e9, &p, 5e9);
        assert!((far + 1.0).norm() < 1e-3);
    }

    #[test]
    fn winding_of_a_circle() {
        let circle: Vec<Complex64> = (0..=100).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 100.0)).collect();
        assert_eq!(winding_number(&circle), 1);
        let arc: Vec<Complex64> = (0..=100).map(|k| Complex64::from_polar(1.0, 0.5 * k as f64 / 100.0)).collect();
        assert_eq!(winding_number(&arc), 0);
    }

    #[test]
    fn flat_trace_has_no_resonance() {
        let f: Vec<f64> = (0..200).map(|i| 5e9 + i as f64 * 1e3).collect();
        let s = vec![Complex64::new(0.3, -0.2); 200];
        let err = fit_reflection_resonance(&Trace::complex(f, s).unwrap(), None).unwrap_err();
        assert!(matches!(err, Error::NoResonance(_)));
    }

    #[test]
    fn trace_invariants() {
        assert!(Trace::complex(vec![1.0, 2.0, 3.0], vec![Complex64::new(1.0, 0.0); 3]).is_err());
        let f = vec![1.0, 2.0, 2.0, 3.0, 4.0];
        assert!(Trace::power_db(f, vec![0.0; 5]).is_err());
        assert!(Trace::power_db(vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0; 4]).is_err());
    }

    #[test]
    fn quadratic_shift_exact() {
        let b = [0.0, 0.05e-3, 0.1e-3, 0.15e-3, 0.2e-3];
        let y: Vec<f64> = b.iter().map(|b| -2.075e5 * b * b).collect();
        let fit = fit_quadratic_field_shift(&b, &y).unwrap();
        assert!((fit.get("quad_coeff") / 2.075e5 - 1.0).abs() < 1e-12);
        assert!(fit_quadratic_field_shift(&[0.0; 4], &[0.0; 4]).is_err());
        assert!(fit_quadratic_field_shift(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn linear_modes() {
        let m: Vec<i64> = (50..120).collect();
        let f: Vec<f64> = m.iter().map(|&m| 76e6 * m as f64 + 1.2e6).collect();
        let fit = fit_linear_modes(&m, &f).unwrap();
        assert!((fit.get("fsr") / 76e6 - 1.0).abs() < 1e-12);
        let two = fit_linear_modes(&[3, 7], &[1.0, 9.0]).unwrap();
        assert!((two.get("fsr") - 2.0).abs() < 1e-15);
        assert!((two.get("offset") + 5.0).abs() < 1e-14);
        assert!(fit_linear_modes(&[4, 4, 4], &[1.0, 2.0, 3.0]).is_err());
    }
}
