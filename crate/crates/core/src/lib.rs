//! Kinetic-inductance meta-ring resonators as microwave frequency converters.
//!
//! Mode spectra of the lumped LC ring, Bloch dispersion of two-segment
//! cells, magnetic-field tuning through the microloop bias, beam-splitter
//! conversion with its Kerr and TLS limits, and the resonator fits used to
//! extract Q factors and tuning coefficients.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conversion;
pub mod dispersion;
pub mod error;
pub mod fitting;
pub mod model;
pub mod modes;
pub mod tuning;

pub use error::{Error, Result};
pub use model::{BiasState, CellGeometry, MicroloopSpec, RingSpec, SegmentParams, UnitCell, Violation};
