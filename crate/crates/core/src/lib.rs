//! Exact and randomized computations around the kernel of the commutator
//! operator `X -> [A_1, ..., A_k, X]` built from the standard polynomial.

pub mod commutator;
pub mod error;
pub mod field;
pub mod graphs;
pub mod linalg;
pub mod ordering;
pub mod par;
pub mod poly;
pub mod rng;
pub mod specialization;
pub mod structure;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
