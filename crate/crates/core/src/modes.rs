//! Resonant modes of the lumped LC ring.
//!
//! Each microloop is one LC cell with L_0 = (L_k + L_m)·l_0 and C_0 = C·l_0/2.
//! Periodic closure quantizes the Bloch phase to 2πm/N, giving
//! ω_m = ω_0·sqrt(1 − cos(2πm/N)). The floating island potential U_0 only adds
//! the static offset U_0/2 to every node voltage.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::model::RingSpec;

/// Mode frequencies of the ring, ordered by mode number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    /// (m, f_m in Hz)
    pub entries: Vec<(usize, f64)>,
    pub fsr_mean: f64,
    /// fsr_list[j] = f(entries[j+1]) − f(entries[j])
    pub fsr_list: Vec<f64>,
}

impl ModeTable {
    pub fn from_entries(entries: Vec<(usize, f64)>) -> Self {
        let fsr_list: Vec<f64> = entries.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let fsr_mean = if fsr_list.is_empty() {
            f64::NAN
        } else {
            fsr_list.iter().sum::<f64>() / fsr_list.len() as f64
        };
        Self {
            entries,
            fsr_mean,
            fsr_list,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rows of (m, f_hz, fsr_to_next_hz); the last row has no successor.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, Option<f64>)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(j, &(m, f))| (m, f, self.fsr_list.get(j).copied()))
    }
}

/// f_0 = 1/(2π·sqrt(L_0·C_0)).
pub fn natural_cell_frequency(cell_inductance: f64, cell_capacitance: f64) -> Result<f64> {
    let l = require_positive("cell inductance", cell_inductance)?;
    let c = require_positive("cell capacitance", cell_capacitance)?;
    Ok(1.0 / (2.0 * PI * (l * c).sqrt()))
}

fn ring_natural_frequency(ring: &RingSpec) -> Result<f64> {
    let lc = ring.line_constants()?;
    natural_cell_frequency(lc.cell_inductance, lc.cell_capacitance)
}

// sqrt(1 − cos x) = sqrt(2)·|sin(x/2)|, without cancellation at small x.
// Folding m onto min(m, N−m) makes the (m, N−m) pair bitwise degenerate.
fn dispersion_factor(m: usize, n: usize) -> f64 {
    let folded = m.min(n - m);
    let half = PI * folded as f64 / n as f64;
    std::f64::consts::SQRT_2 * half.sin().abs()
}

/// f_m = f_0·sqrt(1 − cos(2πm/N)) for 0 ≤ m < N.
pub fn analytic_mode_frequency(ring: &RingSpec, m: usize) -> Result<f64> {
    if m >= ring.cell_count {
        return Err(Error::Domain {
            name: "mode index",
            requirement: "0 <= m < N",
            value: m as f64,
        });
    }
    Ok(ring_natural_frequency(ring)? * dispersion_factor(m, ring.cell_count))
}

/// Small-m limit f_m = v_ph·m/l.
pub fn linear_mode_frequency(ring: &RingSpec, m: usize) -> Result<f64> {
    let lc = ring.line_constants()?;
    Ok(lc.phase_velocity * m as f64 / crate::model::total_length(ring))
}

/// All modes with 0 < m ≤ N/2 whose frequency lies in `[lo, hi]`.
pub fn free_spectral_range(ring: &RingSpec, band: (f64, f64)) -> Result<ModeTable> {
    let (lo, hi) = band;
    let f0 = ring_natural_frequency(ring)?;
    let n = ring.cell_count;
    let entries = if hi < lo {
        Vec::new()
    } else {
        (1..=n / 2)
            .map(|m| (m, f0 * dispersion_factor(m, n)))
            .filter(|&(_, f)| f >= lo && f <= hi)
            .collect()
    };
    Ok(ModeTable::from_entries(entries))
}

/// Largest ring solved by dense diagonalization.
pub const ORACLE_MAX_CELLS: usize = 10_000;

/// Frequencies from direct diagonalization of the N×N periodic second
/// difference operator, with every eigenvalue μ mapped to f_0·sqrt(μ/2).
///
/// The island potential enters only through the constant particular solution
/// V_n = U_0/2, which lies in the null space of the operator; the returned
/// spectrum is therefore the same for every `island_potential`. Degenerate
/// (m, N−m) pairs appear twice.
pub fn eigenmode_oracle(ring: &RingSpec, island_potential: f64) -> Result<Vec<f64>> {
    let n = ring.cell_count;
    if n > ORACLE_MAX_CELLS {
        return Err(Error::Domain {
            name: "cell count for dense oracle",
            requirement: "<= 10000",
            value: n as f64,
        });
    }
    let f0 = ring_natural_frequency(ring)?;
    let op = second_difference(n);

    let offset = DMatrix::from_element(n, 1, 0.5 * island_potential);
    let static_residual = (&op * &offset).amax();
    debug_assert!(static_residual <= 1e-12 * island_potential.abs().max(1.0));

    let eig = op.symmetric_eigen();
    // Eigenvalues of the operator live in [0, 4]; anything below the rounding
    // floor is the exact zero mode.
    let floor = 64.0 * f64::EPSILON * n as f64;
    let mut freqs: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&mu| if mu.abs() <= floor { 0.0 } else { f0 * (0.5 * mu).sqrt() })
        .collect();
    freqs.sort_by(f64::total_cmp);
    Ok(freqs)
}

/// Periodic operator (DV)_n = 2V_n − V_{n−1} − V_{n+1}.
pub fn second_difference(n: usize) -> DMatrix<f64> {
    let mut op = DMatrix::zeros(n, n);
    for i in 0..n {
        op[(i, i)] += 2.0;
        op[(i, (i + 1) % n)] -= 1.0;
        op[(i, (i + n - 1) % n)] -= 1.0;
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::capacitance_for_impedance;

    fn lumped_ring() -> RingSpec {
        let c = capacitance_for_impedance(57.25e-6, 362.0).unwrap();
        RingSpec::lumped(3200, 57e-6, 0.25e-6, c, 25e-6).unwrap()
    }

    #[test]
    fn cell_frequency() {
        let f = natural_cell_frequency(1.431e-9, 5.46e-15).unwrap();
        assert!((f - 56.9e9).abs() < 0.1e9, "{f}");
        assert_eq!(natural_cell_frequency(1.0, 1.0).unwrap(), 1.0 / (2.0 * PI));
        let a = natural_cell_frequency(2.0, 3.0).unwrap();
        let b = natural_cell_frequency(8.0, 3.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
        assert!(natural_cell_frequency(0.0, 1.0).is_err());
    }

    #[test]
    fn first_mode_and_symmetry() {
        let ring = lumped_ring();
        assert_eq!(analytic_mode_frequency(&ring, 0).unwrap(), 0.0);
        let f1 = analytic_mode_frequency(&ring, 1).unwrap();
        assert!((f1 - 79e6).abs() < 0.5e6, "{f1}");
        for m in [1, 7, 100, 1599] {
            let a = analytic_mode_frequency(&ring, m).unwrap();
            let b = analytic_mode_frequency(&ring, 3200 - m).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
        assert!(analytic_mode_frequency(&ring, 3200).is_err());
    }

    #[test]
    fn fsr_in_band() {
        let ring = lumped_ring();
        let table = free_spectral_range(&ring, (4e9, 10e9)).unwrap();
        assert!((table.fsr_mean - 79e6).abs() < 1e6);
        let v = ring.line_constants().unwrap().phase_velocity;
        let l = crate::model::total_length(&ring);
        let low = free_spectral_range(&ring, (0.0, 20.0 * v / l)).unwrap();
        assert!(((low.fsr_mean - v / l) / (v / l)).abs() < 5e-3);
        let var = low.fsr_list.iter().map(|x| (x - low.fsr_mean).powi(2)).sum::<f64>()
            / low.fsr_list.len() as f64;
        assert!(var / low.fsr_mean.powi(2) < 1e-4);
    }

    #[test]
    fn empty_band_gives_empty_table() {
        let ring = lumped_ring();
        let table = free_spectral_range(&ring, (1.0e9, 1.01e9)).unwrap();
        assert!(table.is_empty());
        assert!(table.fsr_list.is_empty());
        assert!(free_spectral_range(&ring, (2e9, 1e9)).unwrap().is_empty());
    }

    #[test]
    fn rows_carry_fsr_to_next() {
        let ring = lumped_ring();
        let table = free_spectral_range(&ring, (4e9, 4.3e9)).unwrap();
        let rows: Vec<_> = table.rows().collect();
        assert_eq!(rows.len(), table.entries.len());
        assert!(rows.last().unwrap().2.is_none());
        assert_eq!(rows[0].2, Some(table.entries[1].1 - table.entries[0].1));
    }

    #[test]
    fn four_cell_oracle_by_hand() {
        // 4×4 circulant: eigenvalues 0, 2, 2, 4 → f0·{0, 1, 1, √2}
        let ring = RingSpec::lumped(4, 0.5, 0.5, 2.0, 1.0).unwrap();
        let f0 = natural_cell_frequency(1.0, 1.0).unwrap();
        let freqs = eigenmode_oracle(&ring, 0.3).unwrap();
        let expected = [0.0, f0, f0, f0 * 2f64.sqrt()];
        for (a, b) in freqs.iter().zip(expected) {
            assert!((a - b).abs() <= 1e-12 * f0, "{a} vs {b}");
        }
    }

    #[test]
    fn second_difference_annihilates_constants() {
        let op = second_difference(7);
        let ones = DMatrix::from_element(7, 1, 3.5);
        assert_eq!((&op * &ones).amax(), 0.0);
    }
}
