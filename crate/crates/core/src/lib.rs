//! Schedule path optimization (SPO) for adiabatic quantum optimization of
//! QUBO problems.
//!
//! The interpolation `H(s) = (1 - s) H0 + sum_j f_j(s) H_j + s H1` runs from a
//! transverse-field driver `H0 = sum X_i` to an Ising problem Hamiltonian
//! `H1`, with local intermediate terms `H_j in {X_q, Z_q}` whose schedules
//! vanish at both ends. This crate
//!
//! - builds these operators as sparse Pauli sums ([`pauli`], [`hamiltonian`]),
//! - represents and validates discretized schedules ([`schedule`]),
//! - computes low-lying spectra and gap profiles ([`eigen`], [`spectrum`]),
//! - maximizes the minimum gap directly ([`direct`]) or through an iterated
//!   convex surrogate with spectral cutting planes ([`convex`]),
//! - simulates the Schrödinger evolution to get success probabilities
//!   ([`dynamics`]),
//! - and runs the comparison, sweep, mining and random-perturbation studies
//!   ([`experiments`]).
//!
//! Runnable walkthroughs live in `examples/`; the `spo` binary exposes the
//! same pipeline with file-based I/O.

pub mod cli;
pub mod convex;
pub mod direct;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod instance;
pub mod manifest;
pub mod pauli;
pub mod schedule;
pub mod spectrum;

pub use error::{Result, SpoError};
pub use hamiltonian::{
    assemble, build_driver_hamiltonian, build_final_hamiltonian, build_local_basis, PathHamiltonian,
};
pub use instance::QuboInstance;
pub use pauli::{Axis, PauliOperator, PauliTerm, SparseOperator};
pub use schedule::{Normalization, PerturbationCoefficients, Schedule, SignRestriction};
pub use spectrum::{gap_profile, min_gap, GapRange, SpectrumProfile};
