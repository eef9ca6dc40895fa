//! Noise-harvesting simulation of fermionic impurity models.
//!
//! The crate covers the full chain used to emulate a quantum impurity solver that
//! turns hardware amplitude damping into the dissipation of a pseudomode bath:
//!
//! - [`pauli`]: Pauli strings, Jordan-Wigner ladder operators and Clifford conjugation.
//! - [`bath`]: hybridization functions of the resonant level model, closed-bath
//!   discretization and the Lorentzian pseudomode fit.
//! - [`lindblad`]: exact Green's functions of quadratic Lindbladians.
//! - [`circuit`]: ancilla layouts, noise-encoding circuits, Trotter steps and schedules.
//! - [`simulator`]: dense density-matrix emulation under amplitude damping.
//! - [`measurement`]: Hadamard-test extraction of the impurity greater Green's function.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bath;
pub mod circuit;
mod error;
pub mod lindblad;
pub mod linalg;
pub mod measurement;
pub mod pauli;
pub mod qp;
pub mod quadrature;
pub mod simulator;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = nalgebra::DMatrix<Complex64>;

/// Largest register that may be converted to a dense matrix or simulated.
pub const DENSE_LIMIT: usize = 12;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
