//! Allocation-only core of the fermionic/qubit VQE benchmark.
//!
//! Everything here is pure computation over `alloc` collections: lattice
//! geometries and their bond schedules, occupation-number state vectors,
//! second-quantized Hamiltonians and their Jordan–Wigner images, the two
//! parameterized gate families, sector-resolved exact diagonalization and the
//! BFGS variational loop. File formats, orchestration and the CLI live in the
//! `fermivqe` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod circuits;
pub mod error;
pub mod exactsolver;
pub mod fit;
pub mod fock;
pub mod hamiltonian;
pub mod lattice;
pub mod vqe;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
