//! Two atoms in a bi-mode cavity: STIRAP and fractional STIRAP transfer.

pub mod basis;
pub mod cli;
pub mod config;
pub mod darkstate;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod observables;
pub mod parallel;
pub mod params;
pub mod propagator;
pub mod pulses;
pub mod scan;
pub mod simulation;

pub use error::{Error, Result};
