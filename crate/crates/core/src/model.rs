//! Physical parameter records for the meta-ring and its microloops.
//!
//! Everything is SI: inductance per length in H/m, capacitance per length in
//! F/m, lengths in m, currents in A, fields in T. Records validate on
//! construction and are plain `Copy` values afterwards, so they can be shared
//! freely between parallel sweep workers.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// A broken invariant, located by a dotted path relative to the checked value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Prefixes the path with `parent`.
    pub fn under(mut self, parent: &str) -> Self {
        self.path = if self.path.is_empty() {
            parent.to_string()
        } else {
            format!("{parent}.{}", self.path)
        };
        self
    }
}

fn positive(out: &mut Vec<Violation>, path: &str, value: f64) {
    if !(value.is_finite() && value > 0.0) {
        out.push(Violation::new(path, format!("must be finite and > 0 (got {value})")));
    }
}

fn first_violation<T>(violations: Vec<Violation>, value: T) -> Result<T> {
    match violations.into_iter().next() {
        None => Ok(value),
        Some(v) => Err(Error::Invalid(format!("{}: {}", v.path, v.message))),
    }
}

/// Uniform transmission-line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    /// H/m
    pub inductance_per_length: f64,
    /// F/m
    pub capacitance_per_length: f64,
    /// m
    pub length: f64,
}

impl SegmentParams {
    pub fn new(inductance_per_length: f64, capacitance_per_length: f64, length: f64) -> Result<Self> {
        let seg = Self {
            inductance_per_length,
            capacitance_per_length,
            length,
        };
        first_violation(seg.check(), seg)
    }

    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        positive(&mut out, "inductance_per_length", self.inductance_per_length);
        positive(&mut out, "capacitance_per_length", self.capacitance_per_length);
        positive(&mut out, "length", self.length);
        out
    }

    /// Z = sqrt(L/C), in ohms.
    pub fn impedance(&self) -> f64 {
        (self.inductance_per_length / self.capacitance_per_length).sqrt()
    }

    /// v = 1/sqrt(LC), in m/s.
    pub fn phase_velocity(&self) -> f64 {
        1.0 / (self.inductance_per_length * self.capacitance_per_length).sqrt()
    }

    /// Wave number per hertz, dk/df = 2π·sqrt(LC).
    pub fn wavenumber_per_hz(&self) -> f64 {
        2.0 * std::f64::consts::PI * (self.inductance_per_length * self.capacitance_per_length).sqrt()
    }
}

/// Two-segment unit cell: nanowire rail followed by the bridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCell {
    pub segment1: SegmentParams,
    pub segment2: SegmentParams,
}

impl UnitCell {
    pub fn new(segment1: SegmentParams, segment2: SegmentParams) -> Result<Self> {
        let cell = Self { segment1, segment2 };
        first_violation(cell.check(), cell)
    }

    /// A cell whose two segments share the same line constants.
    pub fn uniform(
        inductance_per_length: f64,
        capacitance_per_length: f64,
        length1: f64,
        length2: f64,
    ) -> Result<Self> {
        Self::new(
            SegmentParams::new(inductance_per_length, capacitance_per_length, length1)?,
            SegmentParams::new(inductance_per_length, capacitance_per_length, length2)?,
        )
    }

    pub fn check(&self) -> Vec<Violation> {
        let mut out: Vec<Violation> = self
            .segment1
            .check()
            .into_iter()
            .map(|v| v.under("segment1"))
            .collect();
        out.extend(self.segment2.check().into_iter().map(|v| v.under("segment2")));
        out
    }

    pub fn length(&self) -> f64 {
        self.segment1.length + self.segment2.length
    }

    /// Long-wavelength phase velocity of the cell, from length-weighted L and C.
    pub fn effective_phase_velocity(&self) -> f64 {
        let l = self.length();
        let ind = (self.segment1.inductance_per_length * self.segment1.length
            + self.segment2.inductance_per_length * self.segment2.length)
            / l;
        let cap = (self.segment1.capacitance_per_length * self.segment1.length
            + self.segment2.capacitance_per_length * self.segment2.length)
            / l;
        1.0 / (ind * cap).sqrt()
    }

    /// Copy of the cell with the bridge capacitance multiplied by `ratio`.
    pub fn with_bridge_capacitance_scaled(&self, ratio: f64) -> Result<Self> {
        let mut seg2 = self.segment2;
        seg2.capacitance_per_length *= require_positive("capacitance ratio", ratio)?;
        Self::new(self.segment1, seg2)
    }
}

/// Geometry of one ring cell as used by the lumped model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellGeometry {
    /// Single lumped LC cell of length `l_0`.
    Lumped { length: f64 },
    /// Rail plus bridge; the lumped model uses `l_1 + l_2` as the cell length.
    TwoSegment(UnitCell),
}

/// Electrical and geometric description of the closed ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub cell_count: usize,
    /// L_k, H/m
    pub kinetic_inductance_per_length: f64,
    /// L_m, H/m
    pub geometric_inductance_per_length: f64,
    /// C, F/m
    pub capacitance_per_length: f64,
    pub cell: CellGeometry,
}

impl RingSpec {
    pub fn new(
        cell_count: usize,
        kinetic_inductance_per_length: f64,
        geometric_inductance_per_length: f64,
        capacitance_per_length: f64,
        cell: CellGeometry,
    ) -> Result<Self> {
        let ring = Self {
            cell_count,
            kinetic_inductance_per_length,
            geometric_inductance_per_length,
            capacitance_per_length,
            cell,
        };
        first_violation(ring.check(), ring)
    }

    /// Lumped ring with cell length `l_0`.
    pub fn lumped(
        cell_count: usize,
        kinetic_inductance_per_length: f64,
        geometric_inductance_per_length: f64,
        capacitance_per_length: f64,
        cell_length: f64,
    ) -> Result<Self> {
        Self::new(
            cell_count,
            kinetic_inductance_per_length,
            geometric_inductance_per_length,
            capacitance_per_length,
            CellGeometry::Lumped { length: cell_length },
        )
    }

    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.cell_count < 3 {
            out.push(Violation::new(
                "cell_count",
                format!("must be >= 3 (got {})", self.cell_count),
            ));
        }
        positive(&mut out, "kinetic_inductance_per_length", self.kinetic_inductance_per_length);
        positive(&mut out, "geometric_inductance_per_length", self.geometric_inductance_per_length);
        positive(&mut out, "capacitance_per_length", self.capacitance_per_length);
        match &self.cell {
            CellGeometry::Lumped { length } => positive(&mut out, "cell.lumped.length", *length),
            CellGeometry::TwoSegment(cell) => {
                out.extend(cell.check().into_iter().map(|v| v.under("cell.two_segment")))
            }
        }
        out
    }

    /// Cell length l_0 used by the lumped recurrence.
    pub fn cell_length(&self) -> f64 {
        match &self.cell {
            CellGeometry::Lumped { length } => *length,
            CellGeometry::TwoSegment(cell) => cell.length(),
        }
    }

    pub fn unit_cell(&self) -> Option<&UnitCell> {
        match &self.cell {
            CellGeometry::Lumped { .. } => None,
            CellGeometry::TwoSegment(cell) => Some(cell),
        }
    }

    /// L_k + L_m
    pub fn total_inductance_per_length(&self) -> f64 {
        self.kinetic_inductance_per_length + self.geometric_inductance_per_length
    }

    pub fn line_constants(&self) -> Result<LineConstants> {
        derive_line_constants(
            self.kinetic_inductance_per_length,
            self.geometric_inductance_per_length,
            self.capacitance_per_length,
            self.cell_length(),
        )
    }

    /// Copy with the phase velocity multiplied by `factor` at fixed inductance
    /// (the capacitance absorbs the change).
    pub fn with_phase_velocity_scaled(&self, factor: f64) -> Result<Self> {
        let factor = require_positive("phase velocity factor", factor)?;
        let mut ring = *self;
        ring.capacitance_per_length /= factor * factor;
        first_violation(ring.check(), ring)
    }
}

/// N·(l_1 + l_2); for a lumped cell l_2 = 0.
pub fn total_length(ring: &RingSpec) -> f64 {
    ring.cell_count as f64 * ring.cell_length()
}

/// Width-asymmetric nanowire pair forming one microloop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroloopSpec {
    /// γ = w_2 / w_1
    pub width_ratio: f64,
    /// Gap between the nanowires, m.
    pub gap: f64,
    /// Effective geometric inductance per length for flux-to-current conversion, H/m.
    pub loop_dc_inductance: f64,
    /// Kinetic inductance of the wide wire, H.
    pub l1: f64,
    /// Kinetic inductance of the narrow wire, H.
    pub l2: f64,
    pub i1_star: f64,
    pub i2_star: f64,
}

const RELATION_TOL: f64 = 1e-12;

impl MicroloopSpec {
    /// Builds the loop from the wide-wire values, deriving L_2 = L_1/γ and I_2* = γ·I_1*.
    pub fn from_wide_wire(
        width_ratio: f64,
        gap: f64,
        loop_dc_inductance: f64,
        l1: f64,
        i1_star: f64,
    ) -> Result<Self> {
        let spec = Self {
            width_ratio,
            gap,
            loop_dc_inductance,
            l1,
            l2: l1 / width_ratio,
            i1_star,
            i2_star: width_ratio * i1_star,
        };
        first_violation(spec.check(), spec)
    }

    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let g = self.width_ratio;
        if !(g > 0.0 && g <= 1.0) {
            out.push(Violation::new("width_ratio", format!("0 < γ ≤ 1 violated (got {g})")));
        }
        positive(&mut out, "gap", self.gap);
        positive(&mut out, "loop_dc_inductance", self.loop_dc_inductance);
        positive(&mut out, "l1", self.l1);
        positive(&mut out, "l2", self.l2);
        positive(&mut out, "i1_star", self.i1_star);
        positive(&mut out, "i2_star", self.i2_star);
        if out.is_empty() {
            let l2 = self.l1 / g;
            if ((self.l2 - l2) / l2).abs() > RELATION_TOL {
                out.push(Violation::new(
                    "l2",
                    format!("L_2 = L_1/γ violated ({} vs {l2})", self.l2),
                ));
            }
            let i2 = g * self.i1_star;
            if ((self.i2_star - i2) / i2).abs() > RELATION_TOL {
                out.push(Violation::new(
                    "i2_star",
                    format!("I_2* = γ·I_1* violated ({} vs {i2})", self.i2_star),
                ));
            }
        }
        out
    }

    /// d / L_dc, the field-to-current conversion factor in A/T.
    pub fn current_per_field(&self) -> f64 {
        self.gap / self.loop_dc_inductance
    }

    /// Copy with L_dc chosen so that `field` produces a fractional shift of
    /// `-max_shift` (`max_shift > 0`).
    pub fn calibrated_to_shift(&self, field: f64, max_shift: f64) -> Result<Self> {
        require_positive("calibration field", field.abs())?;
        require_positive("calibration shift", max_shift)?;
        // max_shift = (γ/2)·(field·d/(L_dc·I2*))²
        let idc = self.i2_star * (2.0 * max_shift / self.width_ratio).sqrt();
        let mut spec = *self;
        spec.loop_dc_inductance = field.abs() * self.gap / idc;
        first_violation(spec.check(), spec)
    }
}

/// Applied field with its induced loop current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasState {
    pub external_field: f64,
    pub dc_current: f64,
}

impl BiasState {
    pub fn new(external_field: f64, microloop: &MicroloopSpec) -> Result<Self> {
        if !external_field.is_finite() {
            return Err(Error::Domain {
                name: "external field",
                requirement: "finite",
                value: external_field,
            });
        }
        Ok(Self {
            external_field,
            dc_current: crate::tuning::dc_current(
                external_field,
                microloop.gap,
                microloop.loop_dc_inductance,
            )?,
        })
    }
}

/// Secondary constants of the lumped line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineConstants {
    /// Ω
    pub characteristic_impedance: f64,
    /// m/s
    pub phase_velocity: f64,
    /// H per cell
    pub cell_inductance: f64,
    /// F per cell
    pub cell_capacitance: f64,
}

pub fn derive_line_constants(
    kinetic_inductance_per_length: f64,
    geometric_inductance_per_length: f64,
    capacitance_per_length: f64,
    cell_length: f64,
) -> Result<LineConstants> {
    let lk = require_positive("kinetic inductance per length", kinetic_inductance_per_length)?;
    let lm = require_positive("geometric inductance per length", geometric_inductance_per_length)?;
    let c = require_positive("capacitance per length", capacitance_per_length)?;
    let l0 = require_positive("cell length", cell_length)?;
    let l = lk + lm;
    Ok(LineConstants {
        characteristic_impedance: (l / c).sqrt(),
        phase_velocity: 1.0 / (l * c).sqrt(),
        cell_inductance: l * l0,
        cell_capacitance: 0.5 * c * l0,
    })
}

/// C = L/Z², the capacitance per length implied by a quoted impedance.
pub fn capacitance_for_impedance(total_inductance_per_length: f64, impedance: f64) -> Result<f64> {
    let l = require_positive("inductance per length", total_inductance_per_length)?;
    let z = require_positive("impedance", impedance)?;
    Ok(l / (z * z))
}
