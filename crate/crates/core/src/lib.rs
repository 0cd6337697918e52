//! Qudit-native QAOA simulation for bounded-integer optimization.
//!
//! The crate simulates variational circuits on registers of `N` qudits of
//! dimension `d`, encodes classical cost functions as diagonal Hamiltonians
//! (directly, as generalized-Pauli `Z` polynomials, or as angular momentum
//! `Lz` polynomials), handles equality/inequality constraints through
//! penalties, conditional ancilla gates, or dynamical decoupling, and drives
//! the outer parameter search with a self-contained CMA-ES or L-BFGS loop.
//!
//! Basis convention: assignments are little-endian, qudit 0 is the
//! fastest-varying digit, so `index = sum_j z_j * d^j`.

pub mod constraints;
pub mod encoding;
pub mod error;
mod linalg;
pub mod operators;
pub mod optimize;
pub mod problems;
pub mod qaoa;
pub mod register;

pub use error::{Error, Result};
pub use register::{Assignment, QuditRegister, StateVector};
