//! Sparse high-dimensional quantile regression,
//!
//! ```text
//! minimize  (1/n) Σ_i ℓ_q(w_i − φ_iᵀx) + λ Σ_j β log(1 + |x_j|/β)
//! ```
//!
//! split for linearized ADMM as `f(x)` = penalty (plus an optional ℓ₂-ball
//! constraint), `g(y)` = pinball fit, with the constraint `Φx − y = 0`.

mod dataset;
mod experiment;
mod objective;
mod spec;
mod updates;

pub use dataset::{generate_dataset, QuantileDataset};
pub use experiment::{
    fosp_anchor, run_figure2, run_sigma, trace_file_name, write_traces, QuantileMonitor, QuantileRun, FIGURE2_SIGMAS,
};
pub use objective::{pinball_fit, quantile_objective, PenaltyObjective, PinballFit};
pub use spec::{Noise, QuantileError, QuantileSpec};
pub use updates::{build_problem, lipschitz_gamma, quantile_x_update, quantile_y_update, QuantileProblem};
