//! JSON run configuration.
//!
//! All numbers are SI. Keys ending in `_mT`, `_dB` or `_dBm` are converted on
//! load to tesla, a linear power ratio or watts and stored under the key with
//! the suffix removed.

use std::path::{Path, PathBuf};

use metaring::conversion::{kappa_for_bandwidth, ConverterParams, ModeLoss, NoiseModel, TlsModel};
use metaring::fitting::ReflectionParams;
use metaring::model::{CellGeometry, MicroloopSpec, RingSpec, UnitCell, Violation};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub device: Option<DeviceConfig>,
    pub converter: Option<ConverterConfig>,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub fit: Option<FitConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub ring: Option<RingConfig>,
    pub unit_cell: Option<UnitCell>,
    pub microloop: Option<MicroloopConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub cell_count: usize,
    pub kinetic_inductance_per_length: f64,
    pub geometric_inductance_per_length: f64,
    /// Give either the capacitance or the impedance it should produce.
    pub capacitance_per_length: Option<f64>,
    pub characteristic_impedance: Option<f64>,
    pub cell: CellGeometry,
    /// Multiplies the phase velocity at fixed inductance.
    pub phase_velocity_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroloopConfig {
    pub width_ratio: f64,
    pub gap: f64,
    pub loop_dc_inductance: Option<f64>,
    pub l1: f64,
    pub i1_star: f64,
    /// Derived as L_1/γ and γ·I_1* when omitted.
    pub l2: Option<f64>,
    pub i2_star: Option<f64>,
    /// Chooses L_dc so that `field` gives a fractional shift of −`max_shift`.
    pub calibration: Option<ShiftCalibration>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftCalibration {
    pub field: f64,
    pub max_shift: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterConfig {
    pub kappa_s: Option<f64>,
    pub kappa_i: Option<f64>,
    /// Matched linewidth chosen to give this FWHM (Hz) at `cooperativity`.
    pub target_bandwidth: Option<f64>,
    pub eta_s: f64,
    pub eta_i: f64,
    #[serde(default)]
    pub g0: f64,
    #[serde(default)]
    pub n_eff: f64,
    /// Operating point for spectra, fringes and pair sweeps.
    #[serde(default = "unity")]
    pub cooperativity: f64,
    pub noise: Option<NoiseModel>,
    pub tls: Option<TlsConfig>,
    pub kerr: Option<KerrConfig>,
    #[serde(default)]
    pub pairs: Vec<[f64; 2]>,
    pub fringe: Option<FringeConfig>,
}

fn unity() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsConfig {
    pub q_other: f64,
    pub alpha: f64,
    pub q_tls0: Option<f64>,
    pub n_c: Option<f64>,
    /// (n, Q_in) pairs the model must pass through; replaces q_tls0 and n_c.
    pub calibration: Option<TlsCalibration>,
    /// External Q shared by signal and idler.
    pub q_ex: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsCalibration {
    pub low: [f64; 2],
    pub high: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrConfig {
    #[serde(default = "default_kerr_rate")]
    pub kerr_rate: f64,
    pub frequency: f64,
    pub q_total: f64,
    pub eta: f64,
    #[serde(default)]
    pub drive_powers: Vec<f64>,
}

fn default_kerr_rate() -> f64 {
    metaring::tuning::DEFAULT_KERR_RATE_HZ
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeConfig {
    pub r: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub field: Option<Range>,
    pub pump: Option<Range>,
    pub detuning: Option<Range>,
    pub phase: Option<Range>,
    pub ratio: Option<Range>,
    pub photons: Option<Range>,
    /// Signal–idler separations for the enhancement sweep, Hz.
    #[serde(default)]
    pub offsets: Vec<f64>,
    /// Mode offsets n for the mismatch table.
    #[serde(default)]
    pub mode_offsets: Vec<usize>,
    /// Signal frequency for mismatch and enhancement, Hz.
    #[serde(default = "default_signal")]
    pub signal: f64,
    /// [lo, hi] for mode tables and FSR curves, Hz.
    pub band: Option<[f64; 2]>,
}

fn default_signal() -> f64 {
    5e9
}

pub const DEFAULT_BAND: [f64; 2] = [4e9, 10e9];

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Range {
    Linear(LinearRange),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Geometric spacing; start and stop must then share a sign.
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Range::List(v) => v.clone(),
            Range::Linear(r) => match r.count {
                0 => Vec::new(),
                1 => vec![r.start],
                n => (0..n)
                    .map(|k| {
                        let s = k as f64 / (n - 1) as f64;
                        if r.log {
                            r.start * (r.stop / r.start).powf(s)
                        } else {
                            r.start + (r.stop - r.start) * s
                        }
                    })
                    .collect(),
            },
        }
    }

    fn check(&self) -> Vec<Violation> {
        match self {
            Range::List(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_finite())
                .map(|(i, x)| Violation::new(i.to_string(), format!("must be finite (got {x})")))
                .collect(),
            Range::Linear(r) => {
                let mut out = Vec::new();
                if !r.start.is_finite() || !r.stop.is_finite() {
                    out.push(Violation::new("start", "start and stop must be finite"));
                } else if r.log && !(r.start * r.stop > 0.0) {
                    out.push(Violation::new("log", "log spacing needs start and stop of the same sign"));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// CSV with columns f_hz,re,im or f_hz,power_db; relative to the config file.
    pub trace: Option<PathBuf>,
    pub initial_guess: Option<ReflectionParams>,
    pub field_shift: Option<FieldShiftData>,
    pub mode_ladder: Option<ModeLadderData>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldShiftData {
    pub fields: Vec<f64>,
    pub fractional_shifts: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeLadderData {
    pub mode_numbers: Vec<i64>,
    pub frequencies: Vec<f64>,
}

/// Configuration plus where it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub raw: Vec<u8>,
    pub base_dir: PathBuf,
}

/// Key suffix, conversion to SI, and whether ranges become geometric.
type UnitSuffix = (&'static str, fn(f64) -> f64, bool);

const UNIT_SUFFIXES: [UnitSuffix; 3] = [
    ("_dBm", |x| 1e-3 * 10f64.powf(x / 10.0), true),
    ("_dB", |x| 10f64.powf(x / 10.0), true),
    ("_mT", |x| 1e-3 * x, false),
];

fn convert_units(value: &mut Value, path: &str, errors: &mut Vec<Violation>) {
    match value {
        Value::Object(map) => {
            let keys: Vec<String> = map.keys().cloned().collect();
            let mut renamed = Map::new();
            for key in keys {
                let mut v = map.remove(&key).expect("key listed above");
                let child = join(path, &key);
                match UNIT_SUFFIXES.iter().find(|(s, _, _)| key.ends_with(s)) {
                    Some(&(suffix, f, logarithmic)) => {
                        let base = key[..key.len() - suffix.len()].to_string();
                        apply_unit(&mut v, f, logarithmic);
                        if map.contains_key(&base) || renamed.contains_key(&base) {
                            errors.push(Violation::new(child, format!("duplicates `{base}`")));
                        }
                        renamed.insert(base, v);
                    }
                    None => {
                        convert_units(&mut v, &child, errors);
                        renamed.insert(key, v);
                    }
                }
            }
            *map = renamed;
        }
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                convert_units(item, &join(path, &i.to_string()), errors);
            }
        }
        _ => {}
    }
}

fn apply_unit(value: &mut Value, f: fn(f64) -> f64, logarithmic: bool) {
    match value {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().map(f).and_then(serde_json::Number::from_f64) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| apply_unit(v, f, logarithmic)),
        Value::Object(map) => {
            for key in ["start", "stop"] {
                if let Some(v) = map.get_mut(key) {
                    apply_unit(v, f, logarithmic);
                }
            }
            // Even steps in dB are geometric steps in the linear unit.
            if logarithmic && map.contains_key("count") {
                map.insert("log".into(), Value::Bool(true));
            }
        }
        _ => {}
    }
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

/// Reads and parses the file; schema problems become path-tagged violations.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let raw = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = parse(&raw)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, raw, base_dir })
}

pub fn parse(raw: &[u8]) -> Result<Config, CliError> {
    let mut value: Value = serde_json::from_slice(raw)
        .map_err(|e| CliError::Schema(vec![Violation::new("", format!("not valid JSON: {e}"))]))?;
    let mut unit_errors = Vec::new();
    convert_units(&mut value, "", &mut unit_errors);
    if !unit_errors.is_empty() {
        return Err(CliError::Schema(unit_errors));
    }
    let config: Config = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        CliError::Schema(vec![Violation::new(path, e.into_inner().to_string())])
    })?;
    let violations = config.check();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Schema(violations))
    }
}

/// Every broken invariant, or an empty list when the file loads.
pub fn validate(path: &Path) -> Result<Vec<Violation>, CliError> {
    match load(path) {
        Ok(_) => Ok(Vec::new()),
        Err(CliError::Schema(v)) => Ok(v),
        Err(e) => Err(e),
    }
}

fn under(list: Vec<Violation>, parent: &str) -> impl Iterator<Item = Violation> + '_ {
    list.into_iter().map(move |v| v.under(parent))
}

impl Config {
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Some(device) = &self.device {
            if let Some(ring) = &device.ring {
                match ring.build() {
                    Ok(r) => out.extend(under(r.check(), "device.ring")),
                    Err(v) => out.extend(under(v, "device.ring")),
                }
            }
            if let Some(cell) = &device.unit_cell {
                out.extend(under(cell.check(), "device.unit_cell"));
            }
            if let Some(m) = &device.microloop {
                out.extend(under(m.build_unchecked().check(), "device.microloop"));
                if m.loop_dc_inductance.is_none() && m.calibration.is_none() {
                    out.push(Violation::new(
                        "device.microloop.loop_dc_inductance",
                        "required unless a calibration is given",
                    ));
                }
                if let Some(c) = &m.calibration {
                    if !(c.field.is_finite() && c.field != 0.0 && c.max_shift > 0.0) {
                        out.push(Violation::new(
                            "device.microloop.calibration",
                            "needs a non-zero field and max_shift > 0",
                        ));
                    }
                }
            }
        }
        if let Some(conv) = &self.converter {
            out.extend(under(conv.check(), "converter"));
        }
        let s = &self.sweep;
        for (name, range) in [
            ("field", &s.field),
            ("pump", &s.pump),
            ("detuning", &s.detuning),
            ("phase", &s.phase),
            ("ratio", &s.ratio),
            ("photons", &s.photons),
        ] {
            if let Some(r) = range {
                out.extend(under(r.check(), &format!("sweep.{name}")));
            }
        }
        if let Some(r) = &s.pump {
            if r.values().iter().any(|p| *p < 0.0) {
                out.push(Violation::new("sweep.pump", "pump powers must be >= 0"));
            }
            if let Some(noise) = self.converter.as_ref().and_then(|c| c.noise.as_ref()) {
                let max = r.values().into_iter().fold(0.0, f64::max);
                out.extend(under(noise.check(max), "converter.noise"));
            }
        }
        if let Some(r) = &s.ratio {
            if r.values().iter().any(|x| !(*x >= 1.0)) {
                out.push(Violation::new("sweep.ratio", "capacitance ratios must be >= 1"));
            }
        }
        if s.offsets.iter().any(|x| !(*x > 0.0)) {
            out.push(Violation::new("sweep.offsets", "offsets must be > 0"));
        }
        if let Some([lo, hi]) = s.band {
            if !(lo >= 0.0 && hi.is_finite()) {
                out.push(Violation::new("sweep.band", "band must be finite with lo >= 0"));
            }
        }
        out
    }

    pub fn ring(&self) -> Result<RingSpec, CliError> {
        let ring = self
            .device
            .as_ref()
            .and_then(|d| d.ring.as_ref())
            .ok_or_else(|| CliError::missing("device.ring"))?;
        ring.build().map_err(CliError::Schema)
    }

    /// The two-segment cell: `device.unit_cell`, else the ring's own cell.
    pub fn unit_cell(&self) -> Result<UnitCell, CliError> {
        let device = self.device.as_ref().ok_or_else(|| CliError::missing("device.unit_cell"))?;
        if let Some(cell) = device.unit_cell {
            return Ok(cell);
        }
        match device.ring.as_ref().map(|r| r.cell) {
            Some(CellGeometry::TwoSegment(cell)) => Ok(cell),
            _ => Err(CliError::missing("device.unit_cell")),
        }
    }

    pub fn microloop(&self) -> Result<MicroloopSpec, CliError> {
        let m = self
            .device
            .as_ref()
            .and_then(|d| d.microloop.as_ref())
            .ok_or_else(|| CliError::missing("device.microloop"))?;
        let spec = m.build_unchecked();
        match m.calibration {
            Some(c) => Ok(spec.calibrated_to_shift(c.field, c.max_shift)?),
            None => Ok(spec),
        }
    }

    pub fn converter(&self) -> Result<&ConverterConfig, CliError> {
        self.converter.as_ref().ok_or_else(|| CliError::missing("converter"))
    }
}

impl RingConfig {
    fn build(&self) -> Result<RingSpec, Vec<Violation>> {
        let l = self.kinetic_inductance_per_length + self.geometric_inductance_per_length;
        let c = match (self.capacitance_per_length, self.characteristic_impedance) {
            (Some(c), None) => c,
            (None, Some(z)) if z > 0.0 && z.is_finite() => l / (z * z),
            (None, Some(z)) => {
                return Err(vec![Violation::new(
                    "characteristic_impedance",
                    format!("must be finite and > 0 (got {z})"),
                )])
            }
            _ => {
                return Err(vec![Violation::new(
                    "capacitance_per_length",
                    "give exactly one of capacitance_per_length and characteristic_impedance",
                )])
            }
        };
        let ring = RingSpec {
            cell_count: self.cell_count,
            kinetic_inductance_per_length: self.kinetic_inductance_per_length,
            geometric_inductance_per_length: self.geometric_inductance_per_length,
            capacitance_per_length: c,
            cell: self.cell,
        };
        let violations = ring.check();
        if !violations.is_empty() {
            return Err(violations);
        }
        match self.phase_velocity_scale {
            None => Ok(ring),
            Some(s) => ring.with_phase_velocity_scaled(s).map_err(|e| {
                vec![Violation::new("phase_velocity_scale", e.to_string())]
            }),
        }
    }
}

impl MicroloopConfig {
    fn build_unchecked(&self) -> MicroloopSpec {
        MicroloopSpec {
            width_ratio: self.width_ratio,
            gap: self.gap,
            loop_dc_inductance: self.loop_dc_inductance.unwrap_or(1.0),
            l1: self.l1,
            l2: self.l2.unwrap_or(self.l1 / self.width_ratio),
            i1_star: self.i1_star,
            i2_star: self.i2_star.unwrap_or(self.width_ratio * self.i1_star),
        }
    }
}

impl ConverterConfig {
    fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let explicit = self.kappa_s.is_some() || self.kappa_i.is_some();
        match (explicit, self.target_bandwidth) {
            (true, Some(_)) => out.push(Violation::new(
                "target_bandwidth",
                "give either kappa_s/kappa_i or target_bandwidth, not both",
            )),
            (false, None) => out.push(Violation::new("kappa_s", "linewidths or target_bandwidth required")),
            (true, None) if self.kappa_s.is_none() || self.kappa_i.is_none() => {
                out.push(Violation::new("kappa_i", "kappa_s and kappa_i must be given together"))
            }
            _ => {}
        }
        if let Some(b) = self.target_bandwidth {
            if let Err(e) = kappa_for_bandwidth(b, self.cooperativity) {
                out.push(Violation::new("target_bandwidth", e.to_string()));
            }
        }
        if !(self.cooperativity.is_finite() && self.cooperativity >= 0.0) {
            out.push(Violation::new("cooperativity", "must be finite and >= 0"));
        }
        if out.is_empty() {
            if let Ok(p) = self.params() {
                out.extend(p.check());
            }
        }
        if let Some(tls) = &self.tls {
            match tls.model() {
                Ok(m) => out.extend(under(m.check(), "tls")),
                Err(e) => out.push(Violation::new("tls", e.to_string())),
            }
            if !(tls.q_ex > 0.0) {
                out.push(Violation::new("tls.q_ex", "must be > 0"));
            }
        }
        if let Some(k) = &self.kerr {
            for (name, v) in [("frequency", k.frequency), ("q_total", k.q_total), ("kerr_rate", k.kerr_rate)] {
                if !(v.is_finite() && v > 0.0) {
                    out.push(Violation::new(format!("kerr.{name}"), "must be finite and > 0"));
                }
            }
            if !(k.eta > 0.0 && k.eta <= 1.0) {
                out.push(Violation::new("kerr.eta", "0 < η ≤ 1 violated"));
            }
            if k.drive_powers.iter().any(|p| !(*p >= 0.0)) {
                out.push(Violation::new("kerr.drive_powers", "powers must be >= 0"));
            }
        }
        for (i, [es, ei]) in self.pairs.iter().enumerate() {
            if !((0.0..=1.0).contains(es) && (0.0..=1.0).contains(ei)) {
                out.push(Violation::new(format!("pairs.{i}"), "efficiencies must lie in [0, 1]"));
            }
        }
        if let Some(f) = &self.fringe {
            if !(f.r >= 0.0 && f.t >= 0.0 && f.r * f.r + f.t * f.t <= 1.0 + 1e-12) {
                out.push(Violation::new("fringe", "needs r, t >= 0 and r² + t² <= 1"));
            }
        }
        out
    }

    /// Mode parameters at the configured operating cooperativity.
    pub fn params(&self) -> Result<ConverterParams, CliError> {
        let (ks, ki) = match self.target_bandwidth {
            Some(b) => {
                let k = kappa_for_bandwidth(b, self.cooperativity)?;
                (k, k)
            }
            None => (
                self.kappa_s.ok_or_else(|| CliError::missing("converter.kappa_s"))?,
                self.kappa_i.ok_or_else(|| CliError::missing("converter.kappa_i"))?,
            ),
        };
        Ok(ConverterParams {
            kappa_s: ks,
            kappa_i: ki,
            eta_s: self.eta_s,
            eta_i: self.eta_i,
            g0: self.g0,
            n_eff: self.n_eff,
            p0_norm: Some(self.cooperativity),
        })
    }
}

impl TlsConfig {
    pub fn model(&self) -> metaring::Result<TlsModel> {
        match (self.calibration, self.q_tls0, self.n_c) {
            (Some(c), None, None) => TlsModel::calibrate(
                (c.low[0], c.low[1]),
                (c.high[0], c.high[1]),
                self.q_other,
                self.alpha,
            ),
            (None, Some(q), Some(n)) => TlsModel::new(q, n, self.alpha, self.q_other),
            _ => Err(metaring::Error::Invalid(
                "give either calibration or both q_tls0 and n_c".into(),
            )),
        }
    }

    pub fn mode(&self) -> metaring::Result<ModeLoss> {
        Ok(ModeLoss {
            tls: self.model()?,
            q_ex: self.q_ex,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(json: &str) -> Vec<Violation> {
        match parse(json.as_bytes()) {
            Ok(_) => Vec::new(),
            Err(CliError::Schema(v)) => v,
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn millitesla_keys_convert() {
        let cfg = parse(br#"{"sweep": {"field_mT": {"start": 0, "stop": 0.2, "count": 3}}}"#).unwrap();
        let v = cfg.sweep.field.unwrap().values();
        assert_eq!(v, vec![0.0, 1e-4, 2e-4]);
    }

    #[test]
    fn dbm_lists_convert() {
        let cfg = parse(
            br#"{"converter": {"kappa_s": 1e5, "kappa_i": 1e5, "eta_s": 1, "eta_i": 1,
                 "kerr": {"frequency": 4.85e9, "q_total": 3.9e5, "eta": 0.94, "drive_powers_dBm": [-90, -100]}}}"#,
        )
        .unwrap();
        let p = cfg.converter.unwrap().kerr.unwrap().drive_powers;
        assert!((p[0] - 1e-12).abs() < 1e-24);
        assert!((p[1] - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn duplicate_unit_keys_rejected() {
        let v = violations(r#"{"sweep": {"field": [0.1], "field_mT": [0.1]}}"#);
        assert_eq!(v[0].path, "sweep.field_mT");
    }

    #[test]
    fn width_ratio_path() {
        let v = violations(
            r#"{"device": {"microloop": {"width_ratio": 1.5, "gap": 2e-6, "loop_dc_inductance": 1e-4, "l1": 2e-9, "i1_star": 4e-5}}}"#,
        );
        assert!(v.iter().any(|v| v.path == "device.microloop.width_ratio" && v.message.contains("0 < γ ≤ 1")), "{v:?}");
    }

    #[test]
    fn negative_capacitance_path() {
        let v = violations(
            r#"{"device": {"unit_cell": {
                "segment1": {"inductance_per_length": 57e-6, "capacitance_per_length": -289e-12, "length": 25e-6},
                "segment2": {"inductance_per_length": 3e-6, "capacitance_per_length": 880e-12, "length": 5e-6}}}}"#,
        );
        assert_eq!(v[0].path, "device.unit_cell.segment1.capacitance_per_length");
    }

    #[test]
    fn unknown_field_path() {
        let v = violations(r#"{"device": {"ring": {"cell_cuont": 3}}}"#);
        assert!(v[0].path.starts_with("device.ring"), "{v:?}");
    }

    #[test]
    fn empty_range() {
        let r = Range::Linear(LinearRange {
            start: 0.0,
            stop: 1.0,
            count: 0,
            log: false,
        });
        assert!(r.values().is_empty());
    }
}
