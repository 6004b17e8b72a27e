//! Modular model-order reduction for interconnected LTI systems.
//!
//! Given an interconnected model assembled from subsystem state-space models
//! and a static interconnection matrix, this crate translates a frequency-wise
//! accuracy requirement on the interconnected transfer function into
//! per-subsystem, per-channel error budgets, then reduces each subsystem
//! independently with frequency-weighted balanced truncation until its budget
//! is met. The budget translation is certified pointwise in frequency by a
//! scaled small-gain condition posed as a linear matrix inequality and solved
//! with the built-in dense SDP solver.
//!
//! Module map:
//! - [`lti`]: state-space models, interconnections, LFT closure, error systems
//! - [`freq`]: frequency grids, the nominal coupling matrix N(iω), σ̄ utilities
//! - [`lmi`]: dense LMI feasibility / linear-objective SDP solver
//! - [`synthesis`]: requirement translation (budget optimization over V, W, D)
//! - [`reduction`]: Lyapunov, Gramians, (weighted) balanced truncation, weight fits
//! - [`beams`]: finite-element beam demo systems
//! - [`validation`]: end-to-end requirement verification and report/plot data
//! - [`io`]: JSON/CSV serialization of models and pipeline artifacts

pub mod beams;
pub mod error;
pub mod freq;
pub mod io;
pub mod lmi;
pub mod lti;
pub mod reduction;
pub mod synthesis;
pub mod validation;

pub use error::{Error, Result};
