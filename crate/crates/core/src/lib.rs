//! Ground-state estimation for the lattice Schwinger model with Krylov
//! subspace methods, plus a gate-level cost model for the fault-tolerant
//! routines that would supply the Krylov moments on hardware.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches files,
//! threads or the command line lives in the `lgt-krylov` companion crate.
//!
//! Module map:
//! - [`model`]: gauged spin Hamiltonian, explicit-field Pauli form, exact reference energies
//! - [`krylov`]: power moments and Hankel matrix assembly
//! - [`noise`]: shot allocation and reproducible Gaussian moment noise
//! - [`solvers`]: QSE, thresholded QSE and partitioned QSE
//! - [`resources`]: Pauli-weight census, gate counts and hardware runtimes
//! - [`analysis`]: log-scale fits, extrapolation and sweep summaries

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod analysis;
mod error;
pub mod krylov;
mod linalg;
mod math;
pub mod model;
pub mod noise;
pub mod pauli;
pub mod resources;
pub mod solvers;

pub use error::{Error, Result};
