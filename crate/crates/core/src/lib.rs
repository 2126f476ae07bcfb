//! Solver and verifier for Dirichlet problems of the form
//! `div(a(|∇u|)/|∇u| ∇u) = 0` on domains invariant under a one-parameter
//! isometry group. The problem is reduced to a drift equation on a bounded
//! chart of the orbit space, the operator profile is classified against the
//! structural decay conditions that guarantee solvability, the reduced
//! problem is solved by finite differences, and the structural properties
//! (maximum and comparison principles, barrier bounds, lift consistency,
//! boundary mean-curvature decomposition) are checked numerically.

pub mod barrier;
pub mod config;
pub mod error;
pub mod expr;
pub mod flux;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod pipeline;
pub mod report;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
