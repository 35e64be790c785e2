//! Linearized ADMM for composite problems of the form
//!
//! ```text
//! minimize f(x) + g(y)   subject to   A x + B y = c
//! ```
//!
//! where each of `f`, `g` splits into a convex part handled exactly inside a
//! subproblem solve and a differentiable part that is linearized at the
//! previous iterate. The crate holds the problem-agnostic pieces:
//!
//! - [`numerics`]: sparse/diagonal matrices, power iteration, PSD checks.
//! - [`prox`]: closed-form scalar and vector proximal primitives.
//! - [`admm`]: the iteration itself, step-size validation and traces.
//! - [`diagnostics`]: empirical restricted-strong-convexity and stationarity probes.

pub mod admm;
pub mod diagnostics;
pub mod numerics;
#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
pub mod prox;

pub use admm::{
    AdmmError, AdmmProblem, AdmmState, CompositeObjective, Monitor, Observation, RunOptions,
    RunOutput, Subproblem, SubproblemError, SymOperator, TraceRecord,
};
pub use numerics::{DiagonalMatrix, NumericsError, SparseMatrix};
