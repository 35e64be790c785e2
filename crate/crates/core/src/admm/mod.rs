//! The linearized ADMM iteration:
//!
//! ```text
//! x_{t+1} = argmin_x f_c(x) + ⟨x, ∇f_d(x_t) + Aᵀu_t⟩ + ½‖Ax + By_t − c‖²_Σ + ½‖x − x_t‖²_{H_f}
//! y_{t+1} = argmin_y g_c(y) + ⟨y, ∇g_d(y_t) + Bᵀu_t⟩ + ½‖Ax_{t+1} + By − c‖²_Σ + ½‖y − y_t‖²_{H_g}
//! u_{t+1} = u_t + Σ(Ax_{t+1} + By_{t+1} − c)
//! ```
//!
//! Problem-specific work lives behind [`CompositeObjective::solve_subproblem`].

mod engine;
mod objective;
mod operator;
mod trace;

pub use engine::{
    AdmmError, AdmmProblem, AdmmState, ConditionCheck, Monitor, Observation, ObjectiveMonitor, RunOptions,
    RunOutput, StepOutput, StepSizeReport,
};
pub use objective::{
    CompositeObjective, L1Objective, QuadraticObjective, Subproblem, SubproblemError, ZeroObjective,
};
pub use operator::SymOperator;
pub use trace::{read_trace, write_trace, TraceRecord, TRACE_HEADER};
