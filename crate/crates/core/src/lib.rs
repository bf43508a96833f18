//! Open-system cavity QED for atoms trapped in nanobeam photonic crystal cavities.
//!
//! The crate is organised bottom-up:
//!
//! * [`fockspace`] builds the truncated photon ⊗ (two-level)^N space and its
//!   elementary operators.
//! * [`model`] assembles the Tavis–Cummings Hamiltonian and the Lindblad
//!   generator from physical parameters.
//! * [`dynamics`] integrates the master equation and extracts Rabi frequencies
//!   and envelope lifetimes.
//! * [`entanglement`] holds partial traces, entropies, concurrence and fidelities.
//! * [`coupling`] turns cavity field maps into position-dependent couplings.
//! * [`analytic`] provides closed-form solutions used as oracles and fast evaluators.
//! * [`expcli`] is the configuration and scenario runner behind the `cqed` binary.
//!
//! Internally all rates are angular frequencies in rad/ns and times are in ns,
//! except in [`coupling`], which works in SI units.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod coupling;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod expcli;
pub mod fockspace;
pub mod model;
pub mod state;
pub mod units;

pub use error::{Error, Result};
pub use fockspace::{AtomState, HilbertLayout, OperatorMatrix};
pub use model::{Frame, LindbladGenerator, SystemParams};
pub use state::DensityMatrix;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector (state ket).
pub type CVector = nalgebra::DVector<C64>;
