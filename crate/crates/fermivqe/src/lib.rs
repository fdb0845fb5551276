//! Experiment harness around `fermivqe-core`: configuration files, molecular
//! Hamiltonian loading, parallel restarts and CSV/JSON outputs.

pub mod config;
mod error;
pub mod experiments;
pub mod molecule;
pub mod runner;

pub use error::{Error, Result};
