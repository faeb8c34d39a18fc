//! Thermodynamics of non-interacting particles under Boltzmann, monotone,
//! weakly-monotone and block-monotone statistics.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectrum`]: one-particle spectra and the canonical partition function.
//! * [`fock`]: truncated Fock bases, admissibility rules and the monotone
//!   creation/annihilation operators.
//! * [`series`]: grand-partition engines (closed forms, the harmonic-oscillator
//!   product formula and brute-force enumeration) with truncation bounds.
//! * [`bounds`]: the sandwich bound between monotone and Boltzmann
//!   grand-partition functions, the `Δₙ(x)` apparatus and asymptotics.
//! * [`observables`]: average particle numbers and statistics comparisons.
//!
//! All energies are stored in user units; series code works with the
//! dimensionless `u = β·ħω`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
mod error;
pub mod fit;
pub mod fock;
pub mod numeric;
pub mod observables;
pub mod series;
pub mod spectrum;

pub use error::{Error, Result};
pub use fock::{BasisState, ModeOrder, OperatorMatrix, StatisticsKind};
pub use series::SeriesResult;
pub use spectrum::{EnergyLevel, Spectrum, ThermoPoint};

/// Default cap on the number of states produced by one `(n, cutoff)`
/// enumeration.
pub const DEFAULT_CAPACITY: u64 = 10_000_000;
