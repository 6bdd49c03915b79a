//! Simulation and verification engine for a detuned two-photon-driven,
//! two-photon-dissipative bosonic cavity.
//!
//! The crate computes, and cross-validates against a brute-force truncated
//! Fock-space solver:
//!
//! * the exact factorized stationary Wigner function of the cavity,
//! * its WKB approximation and the associated phase-space potential,
//! * the semiclassical fixed points, saddle trajectories of the Keldysh
//!   equations of motion, and the resulting switching-rate exponent,
//! * Liouvillian spectra, steady states, and parity-sector decay rates.
//!
//! Modules follow that split: [`model`] (parameters, grids, conventions),
//! [`specfun`] (complex special functions), [`fock`] (the brute-force
//! oracle), [`wigner`] (closed-form and WKB stationary solutions),
//! [`instanton`] (saddle trajectories and rates), [`validate`] (the
//! acceptance checks run by tests and by the `validate` CLI command), and
//! [`output`] (deterministic CSV/JSON export).

pub mod fock;
pub mod instanton;
pub mod model;
mod ode;
pub mod output;
pub mod specfun;
pub mod validate;
pub mod wigner;

pub use model::{alpha_of_xy, xy_of_alpha, ModelParams, PhaseGrid, RunSettings, WignerGrid};
