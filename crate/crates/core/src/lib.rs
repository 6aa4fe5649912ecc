//! Bures–Wasserstein geometry on Hermitian positive definite matrices.
//!
//! The crate computes the Bures–Wasserstein distance, its geodesic and the
//! weighted Wasserstein mean of an ensemble, together with executable forms of
//! the matrix inequalities those means satisfy under positive linear maps,
//! Kronecker products and Hadamard products. Every inequality is decided in the
//! Loewner order with an explicit, tolerance-aware margin.

// Guards such as `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycenter;
pub mod bures_wasserstein;
pub mod cli;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod means;
pub mod products;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
