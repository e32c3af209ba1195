use std::path::Path;

use chrono::{SecondsFormat, Utc};
use metaring::conversion::{
    self, added_noise, conversion_spectrum, fringe_visibility, interference_fringe, kerr_critical_point,
    kerr_steady_state, matched_bandwidth, scattering, single_photon_efficiency, spectrum_bandwidth,
    tls_quality_factor, PROBE_PHOTONS,
};
use metaring::dispersion::{conversion_mismatch, fsr_curve, idc_enhancement_sweep, mode_nearest};
use metaring::fitting::{
    fit_linear_modes, fit_quadratic_field_shift, fit_reflection_resonance, winding_number, FitResult, Response, Trace,
};
use metaring::model::{total_length, BiasState};
use metaring::modes::{free_spectral_range, natural_cell_frequency};
use metaring::tuning::{fractional_frequency_shift, quadratic_shift_coefficient, twm_fwm_coefficients};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{self, Config, Loaded, DEFAULT_BAND};
use crate::error::CliError;
use crate::output::{write_json, Field, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Modes,
    Dispersion,
    Tune,
    Convert,
    Fringe,
    Saturate,
    Fit,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Dispersion => "dispersion",
            Command::Tune => "tune",
            Command::Convert => "convert",
            Command::Fringe => "fringe",
            Command::Saturate => "saturate",
            Command::Fit => "fit",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub output_paths: Vec<String>,
    pub timestamp: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Loads the config, runs `command`, and writes its outputs and a manifest
/// into `out_dir`.
pub fn run(command: Command, config_path: &Path, out_dir: &Path, threads: Option<usize>) -> Result<RunManifest, CliError> {
    let loaded = config::load(config_path)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let outputs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| dispatch(command, &loaded, out_dir)),
        None => dispatch(command, &loaded, out_dir),
    }?;
    let manifest = RunManifest {
        command: command.name().to_string(),
        config_hash: hex::encode(Sha256::digest(&loaded.raw)),
        output_paths: outputs,
        timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
    };
    write_json(out_dir, "manifest", &manifest)?;
    Ok(manifest)
}

fn dispatch(command: Command, loaded: &Loaded, dir: &Path) -> Result<Vec<String>, CliError> {
    let cfg = &loaded.config;
    match command {
        Command::Modes => modes(cfg, dir),
        Command::Dispersion => dispersion(cfg, dir),
        Command::Tune => tune(cfg, dir),
        Command::Convert => convert(cfg, dir),
        Command::Fringe => fringe(cfg, dir),
        Command::Saturate => saturate(cfg, dir),
        Command::Fit => fit(loaded, dir),
        Command::Sweep => {
            let device = cfg.device.as_ref();
            let converter = cfg.converter.as_ref();
            let has_ring = device.is_some_and(|d| d.ring.is_some());
            let mut out = Vec::new();
            if has_ring {
                out.extend(modes(cfg, dir)?);
                if cfg.unit_cell().is_ok() {
                    out.extend(dispersion(cfg, dir)?);
                }
            }
            if device.is_some_and(|d| d.microloop.is_some()) {
                out.extend(tune(cfg, dir)?);
            }
            if converter.is_some() {
                out.extend(convert(cfg, dir)?);
                out.extend(fringe(cfg, dir)?);
            }
            if converter.is_some_and(|c| c.kerr.is_some() || c.tls.is_some()) {
                out.extend(saturate(cfg, dir)?);
            }
            if cfg.fit.is_some() {
                out.extend(fit(loaded, dir)?);
            }
            Ok(out)
        }
    }
}

fn values(range: &Option<config::Range>) -> Vec<f64> {
    range.as_ref().map(|r| r.values()).unwrap_or_default()
}

/// Evaluates `f` over `inputs` in parallel, keeping input order and
/// reporting the first failure in that order.
fn par_rows<T, F>(inputs: &[T], f: F) -> Result<Vec<Vec<Field>>, CliError>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Vec<Field>>, CliError> + Sync + Send,
{
    let results: Vec<Result<Vec<Vec<Field>>, CliError>> = inputs.par_iter().map(f).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn modes(cfg: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let ring = cfg.ring()?;
    let [lo, hi] = cfg.sweep.band.unwrap_or(DEFAULT_BAND);
    let table = free_spectral_range(&ring, (lo, hi))?;
    let rows = table
        .rows()
        .map(|(m, f, next)| vec![m.into(), f.into(), next.into()])
        .collect();
    let lc = ring.line_constants()?;
    let summary = json!({
        "cell_count": ring.cell_count,
        "total_length_m": total_length(&ring),
        "capacitance_per_length_f_per_m": ring.capacitance_per_length,
        "characteristic_impedance_ohm": lc.characteristic_impedance,
        "phase_velocity_m_per_s": lc.phase_velocity,
        "cell_frequency_hz": natural_cell_frequency(lc.cell_inductance, lc.cell_capacitance)?,
        "band_hz": [lo, hi],
        "mode_count": table.entries.len(),
        "fsr_mean_hz": table.fsr_mean,
    });
    Ok(vec![
        Table::new("modes", &["m", "f_hz", "fsr_to_next_hz"]).with_rows(rows).write(dir)?,
        write_json(dir, "modes_summary", &summary)?,
    ])
}

fn dispersion(cfg: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let cell = cfg.unit_cell()?;
    let n_cells = cfg.ring()?.cell_count;
    let [lo, hi] = cfg.sweep.band.unwrap_or(DEFAULT_BAND);
    let signal = cfg.sweep.signal;
    let mut out = Vec::new();

    let curve = fsr_curve(&cell, n_cells, (lo, hi))?;
    let rows = curve.into_iter().map(|(f, fsr)| vec![f.into(), fsr.into()]).collect();
    out.push(Table::new("fsr", &["f_hz", "fsr_hz"]).with_rows(rows).write(dir)?);

    if !cfg.sweep.mode_offsets.is_empty() {
        let m = mode_nearest(&cell, n_cells, signal)?;
        let rows = par_rows(&cfg.sweep.mode_offsets, |&n| {
            let r = conversion_mismatch(&cell, n_cells, m, n)?;
            Ok(vec![vec![r.m.into(), r.n.into(), r.signal_f.into(), r.delta_f.into()]])
        })?;
        out.push(Table::new("mismatch", &["m", "n", "signal_hz", "delta_f_hz"]).with_rows(rows).write(dir)?);
    }

    if cfg.sweep.ratio.is_some() {
        let ratios = values(&cfg.sweep.ratio);
        let offsets = &cfg.sweep.offsets;
        let rows = par_rows(&ratios, |&ratio| {
            Ok(idc_enhancement_sweep(&cell, n_cells, signal, offsets, &[ratio])?
                .into_iter()
                .map(|r| vec![r.ratio.into(), r.offset.into(), r.delta_f.into()])
                .collect())
        })?;
        out.push(Table::new("enhancement", &["ratio", "offset_hz", "delta_f_hz"]).with_rows(rows).write(dir)?);
    }
    Ok(out)
}

fn tune(cfg: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let spec = cfg.microloop()?;
    let kerr_rate = cfg
        .converter
        .as_ref()
        .and_then(|c| c.kerr.as_ref())
        .map_or(metaring::tuning::DEFAULT_KERR_RATE_HZ, |k| k.kerr_rate);
    let fields = values(&cfg.sweep.field);
    let rows = par_rows(&fields, |&b| {
        let bias = BiasState::new(b, &spec)?;
        let c = twm_fwm_coefficients(&spec, &bias, kerr_rate)?;
        Ok(vec![vec![
            b.into(),
            bias.dc_current.into(),
            fractional_frequency_shift(&spec, &bias).into(),
            c.closed_form.twm.into(),
            c.closed_form.fwm.into(),
            c.oracle.c3.into(),
            c.oracle.c4.into(),
        ]])
    })?;
    let summary = json!({
        "width_ratio": spec.width_ratio,
        "loop_dc_inductance_h_per_m": spec.loop_dc_inductance,
        "current_per_field_a_per_t": spec.current_per_field(),
        "quad_coeff_per_t2": quadratic_shift_coefficient(&spec),
    });
    Ok(vec![
        Table::new("tune", &["b_ext_tesla", "i_dc_amp", "df_over_f", "T", "F", "c3", "c4"])
            .with_rows(rows)
            .write(dir)?,
        write_json(dir, "tune_summary", &summary)?,
    ])
}

fn convert(cfg: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let conv = cfg.converter()?;
    let params = conv.params()?;
    let pump = values(&cfg.sweep.pump);
    let mut out = Vec::new();

    let rows = par_rows(&pump, |&p| {
        let s = scattering(p, params.eta_s, params.eta_i)?;
        Ok(vec![vec![p.into(), s.t2.into(), s.r2.into()]])
    })?;
    out.push(Table::new("convert_pump", &["p0_norm", "t2", "r2"]).with_rows(rows).write(dir)?);

    if let Some(noise) = &conv.noise {
        let rows = par_rows(&pump, |&p| {
            let (ns, ni) = added_noise(p, noise)?;
            Ok(vec![vec![p.into(), ns.into(), ni.into()]])
        })?;
        out.push(Table::new("noise", &["p0_norm", "n_s", "n_i"]).with_rows(rows).write(dir)?);
    }

    let detuning = values(&cfg.sweep.detuning);
    let rows = par_rows(&detuning, |&d| {
        let s = conversion_spectrum(d, &params);
        Ok(vec![vec![d.into(), s.t2.into(), s.r2.into()]])
    })?;
    out.push(Table::new("convert_spectrum", &["delta_hz", "t2", "r2"]).with_rows(rows).write(dir)?);

    if !conv.pairs.is_empty() {
        let pairs: Vec<(f64, f64)> = conv.pairs.iter().map(|p| (p[0], p[1])).collect();
        let rows = conversion::pair_sweep(&pairs, conv.cooperativity)?
            .into_iter()
            .enumerate()
            .map(|(i, r)| vec![i.into(), r.eta_product.into(), r.t2.into()])
            .collect();
        out.push(Table::new("pairs", &["pair_index", "eta_product", "t2"]).with_rows(rows).write(dir)?);
    }

    let c = conv.cooperativity;
    let closed = if params.kappa_s == params.kappa_i && c > 0.0 && c <= 1.0 {
        Some(matched_bandwidth(params.kappa_s, c)?)
    } else {
        None
    };
    let numeric = if c > 0.0 && params.eta_s * params.eta_i > 0.0 {
        Some(spectrum_bandwidth(&params)?)
    } else {
        None
    };
    let summary = json!({
        "cooperativity": c,
        "kappa_s_hz": params.kappa_s,
        "kappa_i_hz": params.kappa_i,
        "t2_on_resonance": scattering(c, params.eta_s, params.eta_i)?.t2,
        "bandwidth_hz": numeric,
        "bandwidth_closed_form_hz": closed,
    });
    out.push(write_json(dir, "convert_summary", &summary)?);
    Ok(out)
}

fn fringe(cfg: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let conv = cfg.converter()?;
    let (r, t) = match conv.fringe {
        Some(f) => (f.r, f.t),
        None => {
            let s = scattering(conv.cooperativity, conv.eta_s, conv.eta_i)?;
            (s.r2.sqrt(), s.t2.sqrt())
        }
    };
    let phases = values(&cfg.sweep.phase);
    let rows = par_rows(&phases, |&phi| Ok(vec![vec![phi.into(), interference_fringe(phi, r, t)?.into()]]))?;
    let max = interference_fringe(0.0, r, t)?;
    let min = interference_fringe(std::f64::consts::PI, r, t)?;
    let summary = json!({
        "r": r,
        "t": t,
        "visibility": fringe_visibility(r, t)?,
        "max_db": 10.0 * max.log10(),
        "min_db": 10.0 * min.log10(),
    });
    Ok(vec![
        Table::new("fringe", &["phi_rad", "p_ratio"]).with_rows(rows).write(dir)?,
        write_json(dir, "fringe_summary", &summary)?,
    ])
}

fn saturate(cfg: &Config, dir: &Path) -> Result<Vec<String>, CliError> {
    let conv = cfg.converter()?;
    if conv.kerr.is_none() && conv.tls.is_none() {
        return Err(CliError::missing("converter.kerr"));
    }
    let mut out = Vec::new();
    if let Some(k) = &conv.kerr {
        let kappa = k.frequency / k.q_total;
        let kappa_ex = k.eta * kappa;
        let crit = kerr_critical_point(k.kerr_rate, kappa, kappa_ex)?;
        let watts = conversion::flux_to_watts(crit.drive_flux, k.frequency);
        let summary = json!({
            "kerr_rate_hz": k.kerr_rate,
            "kappa_hz": kappa,
            "kappa_ex_hz": kappa_ex,
            "critical_detuning_hz": crit.detuning,
            "critical_photons": crit.photons,
            "critical_flux_per_s": crit.drive_flux,
            "critical_power_w": watts,
            "critical_power_dbm": conversion::watts_to_dbm(watts),
        });
        out.push(write_json(dir, "saturate", &summary)?);

        let points: Vec<(f64, f64)> = k
            .drive_powers
            .iter()
            .flat_map(|&p| values(&cfg.sweep.detuning).into_iter().map(move |d| (p, d)))
            .collect();
        let rows = par_rows(&points, |&(p, d)| {
            let flux = p / conversion::flux_to_watts(1.0, k.frequency);
            let s = kerr_steady_state(d, flux, k.kerr_rate, kappa, kappa_ex)?;
            let lo = s.photons.first().copied();
            let hi = s.photons.last().copied();
            let mid = if s.photons.len() == 3 { Some(s.photons[1]) } else { None };
            Ok(vec![vec![
                d.into(),
                p.into(),
                lo.into(),
                mid.into(),
                hi.into(),
                s.bistable.into(),
            ]])
        })?;
        out.push(
            Table::new("kerr", &["delta_hz", "drive_w", "n_low", "n_mid", "n_high", "bistable"])
                .with_rows(rows)
                .write(dir)?,
        );
    }
    if let Some(tls) = &conv.tls {
        let mode = tls.mode()?;
        let photons = values(&cfg.sweep.photons);
        let rows = par_rows(&photons, |&n| {
            Ok(vec![vec![
                n.into(),
                tls_quality_factor(PROBE_PHOTONS + n, &mode.tls)?.into(),
                single_photon_efficiency(&mode, &mode, n)?.into(),
            ]])
        })?;
        out.push(Table::new("tls", &["n_sat", "q_in", "eta_product"]).with_rows(rows).write(dir)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ReflectionReport {
    #[serde(flatten)]
    fit: FitResult,
    eta: f64,
    winding_number: Option<i64>,
}

fn fit(loaded: &Loaded, dir: &Path) -> Result<Vec<String>, CliError> {
    let fit_cfg = loaded.config.fit.as_ref().ok_or_else(|| CliError::missing("fit"))?;
    let mut report = serde_json::Map::new();
    if let Some(path) = &fit_cfg.trace {
        let trace = read_trace(&loaded.base_dir.join(path))?;
        let result = fit_reflection_resonance(&trace, fit_cfg.initial_guess)?;
        let winding = match &trace.response {
            Response::Complex(s) => {
                // Remove the fitted cable delay before counting turns.
                let tau = result.get("delay");
                let f_ref = metaring::fitting::trace_reference_frequency(&trace);
                let corrected: Vec<Complex64> = trace
                    .frequency
                    .iter()
                    .zip(s)
                    .map(|(&f, z)| z * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (f - f_ref) * tau))
                    .collect();
                Some(winding_number(&corrected))
            }
            Response::PowerDb(_) => None,
        };
        let eta = conversion::coupling_efficiency(result.get("q_in"), result.get("q_ex"));
        report.insert(
            "reflection".into(),
            serde_json::to_value(ReflectionReport {
                fit: result,
                eta,
                winding_number: winding,
            })
            .map_err(|e| CliError::Io(e.to_string()))?,
        );
    }
    if let Some(data) = &fit_cfg.field_shift {
        let r = fit_quadratic_field_shift(&data.fields, &data.fractional_shifts)?;
        report.insert("field_shift".into(), serde_json::to_value(r).map_err(|e| CliError::Io(e.to_string()))?);
    }
    if let Some(data) = &fit_cfg.mode_ladder {
        let r = fit_linear_modes(&data.mode_numbers, &data.frequencies)?;
        report.insert("linear_modes".into(), serde_json::to_value(r).map_err(|e| CliError::Io(e.to_string()))?);
    }
    Ok(vec![write_json(dir, "fit", &report)?])
}

/// Reads a trace CSV with columns f_hz,re,im or f_hz,power_db.
pub fn read_trace(path: &Path) -> Result<Trace, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let f_col = column("f_hz").ok_or_else(|| trace_schema("missing column f_hz"))?;
    let complex = match (column("re"), column("im"), column("power_db")) {
        (Some(re), Some(im), _) => Some((re, im)),
        (_, _, Some(_)) => None,
        _ => return Err(trace_schema("need columns re,im or power_db")),
    };
    let power_col = column("power_db");
    let mut freq = Vec::new();
    let mut s = Vec::new();
    let mut p = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let num = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| trace_schema(&format!("row {}: column {i} is not a number", line + 2)))
        };
        freq.push(num(f_col)?);
        match complex {
            Some((re, im)) => s.push(Complex64::new(num(re)?, num(im)?)),
            None => p.push(num(power_col.expect("checked above"))?),
        }
    }
    Ok(match complex {
        Some(_) => Trace::complex(freq, s)?,
        None => Trace::power_db(freq, p)?,
    })
}

fn trace_schema(message: &str) -> CliError {
    CliError::Schema(vec![metaring::model::Violation::new("fit.trace", message)])
}
