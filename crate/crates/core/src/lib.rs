//! Simulation of a spin-½ quantum Otto engine whose isochoric heating stroke
//! couples to an effective negative temperature fermionic reservoir and is
//! truncated before equilibrium.
//!
//! Module map:
//!
//! - [`matcore`]: closed-form 2×2 Hermitian linear algebra and density matrices.
//! - [`model`]: stroke Hamiltonians, jump operator, population-parameterised states.
//! - [`bath`]: spectral density, occupations, time-dependent rate coefficients.
//! - [`dynamics`]: driven unitaries and the time-local Lindblad integrator.
//! - [`measures`]: non-Markovianity witness/quantifier and cycle energetics.
//! - [`cycle`]: full-cycle runs, peak extraction, and parameter sweeps.
//!
//! Units throughout: ħ = k_B = 1, time in ms, frequencies in rad/ms (kHz).

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod matcore;
pub mod measures;
pub mod model;
pub mod quad;
pub mod spline;

pub use error::{Error, Result};
pub use exec::Execution;
