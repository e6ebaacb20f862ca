//! Energy-conserving Lindblad dynamics for time-dependent Hamiltonians.
//!
//! The crate is organised around the time-dependent harmonic oscillator
//! `H(t) = K₁ + k(t)K₂` written in the su(1,1) generators
//! `K₁ = p²/2`, `K₂ = x²/2`, `K₃ = (xp + px)/2`:
//!
//! - [`operators`]: truncated Fock-basis matrices and spring schedules.
//! - [`generator`]: the general GKSL generator, its vectorised Liouvillian
//!   and a Choi-matrix positivity probe.
//! - [`isoenergetic`]: the operator condition for conserving `⟨H(t)⟩`, the
//!   coefficient solver that recovers the single Lindbladian `L = x²/2`, and
//!   the resulting master equation.
//! - [`evolution`]: initial states and a fixed-step RK4 integrator.
//! - [`entropy`]: von Neumann entropy, the Γ functional and the entropy rate.
//! - [`cli`]: config parsing and the `isolindblad` subcommands.
//!
//! The last two Fock levels of every basis form a guard band: `x²` couples
//! `|n⟩` to `|n ± 2⟩`, so algebraic identities are only checked on the
//! interior `(dim − 2) × (dim − 2)` block.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod error;
pub mod evolution;
pub mod generator;
pub mod isoenergetic;
pub mod operators;
pub mod random;
mod sparse;

pub use error::{Error, Result};
pub use evolution::{DensityMatrix, Trajectory, TrajectoryRecord};
pub use generator::{Channel, DissipationMatrix, Generator};
pub use isoenergetic::{CoefficientSolution, IsoGenerator};
pub use operators::{LadderBasis, Operator, ScheduleKind, SpringSchedule};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix used for every operator and state.
pub type CMatrix = DMatrix<Complex64>;

/// Largest element magnitude of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest element magnitude on the top-left `n × n` block.
pub fn max_abs_block(m: &CMatrix, n: usize) -> f64 {
    let n = n.min(m.nrows()).min(m.ncols());
    m.view((0, 0), (n, n)).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Trace of a square matrix.
pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// `AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}
