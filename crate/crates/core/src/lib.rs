//! Simulation toolkit for QAOA over constraint satisfaction problems,
//! post-selected counting, circuit-to-QAOA compilation and stoquastic
//! adiabatic evolution.

pub mod adiabatic;
pub mod bits;
pub mod cli;
pub mod compiler;
pub mod csp;
pub mod error;
pub mod postsel;
pub mod qaoa;
pub mod statevec;
pub mod supremacy;

pub use csp::{Clause, CostHistogram, CspInstance};
pub use error::{Error, Result};
pub use statevec::{PostSelection, StateVector};
