//! Bloch dispersion of the two-segment unit cell.
//!
//! Each segment is a lossless line with ABCD matrix
//! `[[cos θ, iZ sin θ], [i sin θ / Z, cos θ]]`, θ = k·l. The cell matrix is
//! M_2·M_1 and the ring modes satisfy Tr(M_cell)/2 = cos(2πm/N). Roots are
//! found in the first pass band by marching upward in fixed steps and
//! bisecting the first sign change.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::model::{SegmentParams, UnitCell};

/// Bisection stops once the bracket is narrower than this, in Hz.
pub const ROOT_TOLERANCE_HZ: f64 = 1e-3;

/// Marching step as a fraction of the long-wavelength FSR estimate.
const MARCH_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortMatrix {
    pub a: Complex64,
    /// Ω
    pub b: Complex64,
    /// 1/Ω
    pub c: Complex64,
    pub d: Complex64,
}

impl TwoPortMatrix {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Matrix product `self · rhs`.
    pub fn then(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

impl std::ops::Mul for TwoPortMatrix {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.then(&rhs)
    }
}

/// Lossless segment matrix at frequency `f` (Hz).
pub fn segment_abcd(seg: &SegmentParams, f: f64) -> TwoPortMatrix {
    let theta = seg.wavenumber_per_hz() * f * seg.length;
    let z = seg.impedance();
    let (s, c) = theta.sin_cos();
    TwoPortMatrix {
        a: Complex64::new(c, 0.0),
        b: Complex64::new(0.0, z * s),
        c: Complex64::new(0.0, s / z),
        d: Complex64::new(c, 0.0),
    }
}

/// M_cell = M_2·M_1.
pub fn cell_matrix(cell: &UnitCell, f: f64) -> TwoPortMatrix {
    segment_abcd(&cell.segment2, f) * segment_abcd(&cell.segment1, f)
}

/// cos(k·l_0) from the closed form
/// cos θ_1 cos θ_2 − ½(Z_1/Z_2 + Z_2/Z_1) sin θ_1 sin θ_2.
pub fn cell_trace(cell: &UnitCell, f: f64) -> f64 {
    let s1 = &cell.segment1;
    let s2 = &cell.segment2;
    let t1 = s1.wavenumber_per_hz() * f * s1.length;
    let t2 = s2.wavenumber_per_hz() * f * s2.length;
    let r = s1.impedance() / s2.impedance();
    t1.cos() * t2.cos() - 0.5 * (r + 1.0 / r) * t1.sin() * t2.sin()
}

/// Long-wavelength FSR estimate v_eff/(N·l_0).
pub fn estimated_fsr(cell: &UnitCell, cell_count: usize) -> f64 {
    cell.effective_phase_velocity() / (cell_count as f64 * cell.length())
}

fn target_cos(m: usize, cell_count: usize) -> f64 {
    (2.0 * PI * m as f64 / cell_count as f64).cos()
}

/// Smallest root of `cell_trace(f) = target` at or above `start`, which must
/// satisfy `cell_trace(start) ≥ target`.
fn march_and_bisect(cell: &UnitCell, cell_count: usize, m: usize, start: f64) -> Result<f64> {
    let target = target_cos(m, cell_count);
    let g = |f: f64| cell_trace(cell, f) - target;
    let step = MARCH_FRACTION * estimated_fsr(cell, cell_count);
    // Far beyond the first band edge of the long-wavelength estimate.
    let limit = 4.0 * cell.effective_phase_velocity() / (2.0 * cell.length());

    let mut lo = start;
    let mut g_lo = g(lo);
    let band_edge = || Error::BandEdgeExceeded {
        mode: m as i64,
        target,
    };
    if g_lo < 0.0 {
        return Err(band_edge());
    }
    let mut hi = lo;
    loop {
        hi += step;
        if hi > limit {
            return Err(band_edge());
        }
        let g_hi = g(hi);
        if g_hi <= 0.0 {
            if g_hi == 0.0 {
                return Ok(hi);
            }
            break;
        }
        lo = hi;
        g_lo = g_hi;
    }
    debug_assert!(g_lo > 0.0);
    while hi - lo > ROOT_TOLERANCE_HZ {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_mode(m: usize, cell_count: usize) -> Result<()> {
    if cell_count < 3 {
        return Err(Error::Domain {
            name: "cell count",
            requirement: ">= 3",
            value: cell_count as f64,
        });
    }
    if m == 0 || m >= cell_count {
        return Err(Error::BandEdgeExceeded {
            mode: m as i64,
            target: target_cos(m, cell_count),
        });
    }
    if 2 * m > cell_count {
        // m and N − m share a frequency; only the first band is solved.
        return Err(Error::Domain {
            name: "mode index",
            requirement: "<= N/2 in the first band",
            value: m as f64,
        });
    }
    Ok(())
}

/// First-band frequency of mode `m` on a ring of `cell_count` cells.
pub fn solve_mode_frequency(cell: &UnitCell, cell_count: usize, m: usize) -> Result<f64> {
    check_mode(m, cell_count)?;
    march_and_bisect(cell, cell_count, m, 0.0)
}

/// Frequencies of modes 1, 2, … in order, continuing until the first mode
/// above `stop` (inclusive) or mode N/2. Each search starts from the previous
/// root, which keeps the ladder ordered.
pub fn solve_mode_ladder(cell: &UnitCell, cell_count: usize, stop: f64) -> Result<Vec<f64>> {
    let mut ladder = Vec::new();
    let mut start = 0.0;
    for m in 1..=cell_count / 2 {
        check_mode(m, cell_count)?;
        let f = march_and_bisect(cell, cell_count, m, start)?;
        ladder.push(f);
        if f > stop {
            break;
        }
        start = f;
    }
    Ok(ladder)
}

/// (f_m, f_{m+1} − f_m) for every mode whose frequency lies in `band`.
pub fn fsr_curve(cell: &UnitCell, cell_count: usize, band: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = band;
    require_non_negative("band start", lo)?;
    if hi < lo {
        return Ok(Vec::new());
    }
    let ladder = solve_mode_ladder(cell, cell_count, hi)?;
    Ok(ladder
        .windows(2)
        .filter(|w| w[0] >= lo && w[0] <= hi)
        .map(|w| (w[0], w[1] - w[0]))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchReport {
    pub m: usize,
    pub n: usize,
    /// 2f_m − (f_{m+n} + f_{m−n}), Hz
    pub delta_f: f64,
    /// f_m, Hz
    pub signal_f: f64,
}

/// Pump-detuning mismatch of the m → m+n conversion against the m−n image.
pub fn conversion_mismatch(cell: &UnitCell, cell_count: usize, m: usize, n: usize) -> Result<MismatchReport> {
    if n == 0 || n >= m {
        return Err(Error::Domain {
            name: "mode offset n",
            requirement: "1 <= n <= m − 1",
            value: n as f64,
        });
    }
    let below = solve_mode_frequency(cell, cell_count, m - n)?;
    let signal = solve_mode_frequency(cell, cell_count, m)?;
    let above = solve_mode_frequency(cell, cell_count, m + n)?;
    Ok(MismatchReport {
        m,
        n,
        delta_f: 2.0 * signal - (above + below),
        signal_f: signal,
    })
}

/// Mode number (≥ 1) whose frequency is closest to `f`.
pub fn mode_nearest(cell: &UnitCell, cell_count: usize, f: f64) -> Result<usize> {
    require_positive("target frequency", f)?;
    let ladder = solve_mode_ladder(cell, cell_count, f)?;
    Ok(nearest_in_ladder(&ladder, f))
}

fn nearest_in_ladder(ladder: &[f64], f: f64) -> usize {
    ladder
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))
        .map(|(i, _)| i + 1)
        .unwrap_or(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnhancementRow {
    pub ratio: f64,
    /// Requested signal–idler separation, Hz.
    pub offset: f64,
    pub m: usize,
    pub n: usize,
    pub delta_f: f64,
}

/// Mismatch versus bridge-capacitance enhancement.
///
/// For every ratio the bridge capacitance is scaled (inductance unchanged),
/// the signal mode is re-selected as the one nearest `signal_f`, and for each
/// offset the idler is the mode m+n whose separation f_{m+n} − f_m is nearest
/// the offset. Rows are ordered by ratio, then offset, in input order.
pub fn idc_enhancement_sweep(
    cell: &UnitCell,
    cell_count: usize,
    signal_f: f64,
    offsets: &[f64],
    ratios: &[f64],
) -> Result<Vec<EnhancementRow>> {
    require_positive("signal frequency", signal_f)?;
    let max_offset = offsets.iter().copied().fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(offsets.len() * ratios.len());
    for &ratio in ratios {
        if !(ratio >= 1.0) {
            return Err(Error::Domain {
                name: "capacitance ratio",
                requirement: ">= 1",
                value: ratio,
            });
        }
        let scaled = cell.with_bridge_capacitance_scaled(ratio)?;
        let ladder = solve_mode_ladder(&scaled, cell_count, signal_f + 1.1 * max_offset)?;
        let m = nearest_in_ladder(&ladder, signal_f);
        let f_m = ladder[m - 1];
        for &offset in offsets {
            require_positive("idler offset", offset)?;
            let n = (m + 1..=ladder.len())
                .min_by(|&a, &b| {
                    let da = (ladder[a - 1] - f_m - offset).abs();
                    let db = (ladder[b - 1] - f_m - offset).abs();
                    da.total_cmp(&db)
                })
                .map(|idler| idler - m)
                .ok_or_else(|| Error::BandEdgeExceeded {
                    mode: (m + 1) as i64,
                    target: target_cos(m + 1, cell_count),
                })?;
            if n >= m {
                return Err(Error::Domain {
                    name: "mode offset n",
                    requirement: "< signal mode number",
                    value: n as f64,
                });
            }
            let delta_f = 2.0 * f_m - (ladder[m + n - 1] + ladder[m - n - 1]);
            rows.push(EnhancementRow {
                ratio,
                offset,
                m,
                n,
                delta_f,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_segment_cell() -> UnitCell {
        UnitCell::new(
            SegmentParams::new(57e-6, 289e-12, 25e-6).unwrap(),
            SegmentParams::new(3e-6, 880e-12, 5e-6).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_at_dc() {
        let m = segment_abcd(&two_segment_cell().segment1, 0.0);
        assert_eq!(m, TwoPortMatrix::identity());
        assert_eq!(cell_trace(&two_segment_cell(), 0.0), 1.0);
    }

    #[test]
    fn segment_impedances() {
        let cell = two_segment_cell();
        assert!((cell.segment1.impedance() / 443.0 - 1.0).abs() < 5e-3);
        // The bridge is sqrt(3e-6/880e-12) ≈ 58.4 Ω from its own L and C.
        assert!((cell.segment2.impedance() - 58.4).abs() < 0.1);
    }

    #[test]
    fn propagating_at_5ghz() {
        let t = cell_trace(&two_segment_cell(), 5e9);
        assert!(t > -1.0 && t < 1.0);
    }

    #[test]
    fn uniform_cell_trace_is_plain_cosine() {
        let cell = UnitCell::uniform(1e-6, 1e-10, 20e-6, 7e-6).unwrap();
        let v = cell.segment1.phase_velocity();
        for f in [1e8, 3e9, 2.2e10] {
            let k = 2.0 * PI * f / v;
            assert!((cell_trace(&cell, f) - (k * 27e-6).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_trivial_modes() {
        let cell = two_segment_cell();
        assert!(matches!(
            solve_mode_frequency(&cell, 3200, 3200),
            Err(Error::BandEdgeExceeded { .. })
        ));
        assert!(matches!(
            solve_mode_frequency(&cell, 3200, 0),
            Err(Error::BandEdgeExceeded { .. })
        ));
    }

    #[test]
    fn mismatch_rejects_bad_offsets() {
        let cell = two_segment_cell();
        assert!(conversion_mismatch(&cell, 3200, 5, 5).is_err());
        assert!(conversion_mismatch(&cell, 3200, 5, 0).is_err());
    }

    #[test]
    fn ratio_below_one_rejected() {
        assert!(idc_enhancement_sweep(&two_segment_cell(), 3200, 5e9, &[1e9], &[0.5]).is_err());
    }

    #[test]
    fn empty_band_is_empty_curve() {
        assert!(fsr_curve(&two_segment_cell(), 3200, (5e9, 4e9)).unwrap().is_empty());
    }
}
