//! Retarded Green's functions and spectral functions of small Fermi-Hubbard
//! models, computed with variational quantum algorithms on a dense
//! statevector simulator.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; configuration files, CSV/JSON output and the command line
//! live in the `greenfn` crate.
//!
//! Layout:
//!
//! - [`pauli`]: Pauli strings and sums, fermion operators, Jordan-Wigner
//!   mapping, Hubbard Hamiltonians and momentum modes.
//! - [`statevector`]: dense states, gates, ansatz circuits, expectation
//!   values and parameter derivatives.
//! - [`ground_state`]: VQE and both subspace-search (SSVQE) variants,
//!   transition amplitudes between approximate eigenstates.
//! - [`vqs`]: McLachlan real-time evolution, the Trotter baseline and the
//!   per-step error diagnostics.
//! - [`greens`]: Green's function assembly, Hadamard-test amplitudes,
//!   Fourier and Lehmann spectral functions, linear response.
//! - [`oracle`]: exact diagonalization reference and the MAE metric.
//! - [`resource`]: shot budgets, time-step bounds and gate counts.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod linalg;
mod math;

pub mod greens;
pub mod ground_state;
pub mod optimize;
pub mod oracle;
pub mod pauli;
pub mod resource;
pub mod statevector;
pub mod vqs;

pub use error::{Error, Result};
pub use num_complex::Complex64;

#[cfg(test)]
pub(crate) mod testutil;
