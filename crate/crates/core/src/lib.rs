//! Controllability analysis for discrete-time linear systems
//! `x_k = A x_{k-1} + B u_k` whose inputs are nonnegative and `s`-sparse.

pub mod cone;
pub mod control;
pub mod error;
pub mod jordan;
pub mod matrix;
pub mod oracle;
pub mod simplex;
pub mod svd;

pub use error::{Error, Result};
pub use matrix::{Mat, Tolerances};
