//! Numerics for the representation tower of the free orthogonal quantum groups O_Q^+.
//!
//! Irreducible spaces `H_n` are stored in compressed coordinates: each level is an
//! abstract coordinate space with an isometry into `H_{n-1} ⊗ H_1`, and every operator
//! is a dense matrix between products of such spaces.

pub mod error;
pub mod linalg;
pub mod qnum;
pub mod tower;
pub mod boundary;
pub mod verify;
pub mod app;

pub use error::{Error, Result};
