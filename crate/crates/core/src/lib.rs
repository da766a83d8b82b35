//! Counting solutions of systems of multihomogeneous diagonal equations
//!
//! ```text
//!     Σ_j λ_{i,j} (x_{1,j} x_{2,j} ⋯ x_{k,j})^d = 0,    1 <= i <= R,
//! ```
//!
//! and computing the circle-method prediction for those counts: singular series,
//! singular integral, local solvability, and the assembled box and height constants.

pub mod arith;
pub mod coefficients;
pub mod counting;
pub mod error;
pub mod exact;
pub mod instance;
pub mod integral;
pub mod predictor;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod solvability;

pub use error::{Error, Result};
pub use instance::ProblemInstance;
