//! Eigenstate entanglement of spin-1/2 chains.
//!
//! The crate builds translation-invariant (and weakly disordered) nearest-neighbour
//! Hamiltonians on periodic chains, diagonalizes them densely or per momentum sector,
//! and measures the entanglement entropy of every eigenstate. Alongside the numerics it
//! carries the closed-form side: Page's formula, the upper bounds on eigenstate
//! entanglement, the random toy model with Haar-random bases per magnetization sector,
//! and the Gaussian asymptotics with their quadratures.
//!
//! Bit convention used throughout: spin `i` (1-based) lives in bit `i - 1`, a set bit
//! is spin up, and subsystem `A` of size `m` is the `m` low-order bits.

pub mod config;
pub mod eigensolve;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod random_states;
pub mod spin_basis;
pub mod stats;
pub mod table;
pub mod theory;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
