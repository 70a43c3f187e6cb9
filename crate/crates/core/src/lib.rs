//! Digital quantum simulation of the quantum Rabi model.
//!
//! The crate builds qubit⊗boson Hamiltonians on a truncated Fock space, compares
//! exact evolution with general and symmetrized Trotter product formulas, measures
//! digitization fidelity, and integrates a GKSL master equation for the lossy case.
//! The [`runner`] module turns named scenarios into CSV result files.

pub mod digitize;
pub mod dissipation;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod runner;

pub use error::{Error, Result};
pub use hilbert::{FockCutoff, Operator, StateVector, C64};
