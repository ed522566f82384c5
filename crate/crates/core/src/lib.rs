//! Two-qubit violations of the elegant Bell expression (three settings for
//! Alice, four for Bob), the measurements behind them, and device-independent
//! randomness from NPA moment-matrix relaxations.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, file formats and the command line live in the
//! `bellbound` companion crate.
//!
//! Modules, bottom-up:
//!
//! * [`linalg`] dense complex/real matrices, Hermitian eigensolver, 3×3 SVD,
//!   Cholesky solves.
//! * [`states`] two-qubit density matrices and their correlation data.
//! * [`bell`] Bell expressions, the singular-value bound, optimal measurement
//!   synthesis, a see-saw oracle and LHV bounds.
//! * [`sdp`] a primal-dual interior-point SDP solver and the Gram-matrix
//!   problem behind the bound.
//! * [`npa`] moment-matrix relaxations: Tsirelson bounds and guessing
//!   probabilities.
#![no_std]
// Small fixed-size numeric kernels read better with explicit indices.
#![allow(clippy::needless_range_loop)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bell;
pub mod linalg;
pub mod npa;
pub mod sdp;
pub mod states;

pub use linalg::{ComplexMatrix, LinalgError, RealMatrix, RealMatrix3, SvdResult3, Vec3};
