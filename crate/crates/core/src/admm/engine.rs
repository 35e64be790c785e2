use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use super::objective::{CompositeObjective, Subproblem, SubproblemError};
use super::operator::SymOperator;
use super::trace::TraceRecord;
use crate::numerics::{self, CompensatedSum, DiagonalMatrix, NumericsError, SparseMatrix};

/// Largest block size for which positive definiteness of a dense
/// subproblem curvature is verified at construction.
const DENSE_CHECK_LIMIT: usize = 4000;

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("penalty matrix must be positive definite")]
    PenaltyNotPositive,
    #[error("{0} is not positive definite")]
    CurvatureNotPositive(&'static str),
    #[error("{block}-update failed at iteration {iteration}: {source}")]
    Subproblem {
        iteration: usize,
        block: &'static str,
        #[source]
        source: SubproblemError,
    },
    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { iteration: usize, what: &'static str },
    #[error("step-size condition violated: {condition} (min eigenvalue {min_eigenvalue:e})")]
    StepSize { condition: String, min_eigenvalue: f64 },
    #[error("invalid run options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `minimize f(x) + g(y) s.t. Ax + By = c` with penalty `Σ` and step-size
/// matrices `H_f`, `H_g`.
#[derive(Debug)]
pub struct AdmmProblem<F, G> {
    a: Arc<SparseMatrix>,
    b: Arc<SparseMatrix>,
    c: Vec<f64>,
    sigma: DiagonalMatrix,
    h_f: SymOperator,
    h_g: SymOperator,
    f: F,
    g: G,
    x_curvature: SymOperator,
    y_curvature: SymOperator,
}

impl<F: CompositeObjective, G: CompositeObjective> AdmmProblem<F, G> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: Arc<SparseMatrix>,
        b: Arc<SparseMatrix>,
        c: Vec<f64>,
        sigma: DiagonalMatrix,
        h_f: SymOperator,
        h_g: SymOperator,
        f: F,
        g: G,
    ) -> Result<Self, AdmmError> {
        let k = a.rows();
        let dim = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(AdmmError::Dimension { what, expected, got })
            }
        };
        dim("B rows", k, b.rows())?;
        dim("c", k, c.len())?;
        dim("Sigma", k, sigma.dim())?;
        dim("H_f", a.cols(), h_f.dim())?;
        dim("H_g", b.cols(), h_g.dim())?;
        dim("f", a.cols(), f.dim())?;
        dim("g", b.cols(), g.dim())?;
        if !sigma.is_positive_definite() {
            return Err(AdmmError::PenaltyNotPositive);
        }
        let x_curvature = h_f.plus_gram(&a, sigma.entries())?;
        let y_curvature = h_g.plus_gram(&b, sigma.entries())?;
        check_positive_definite(&x_curvature, "H_f + AᵀΣA")?;
        check_positive_definite(&y_curvature, "H_g + BᵀΣB")?;
        Ok(Self { a, b, c, sigma, h_f, h_g, f, g, x_curvature, y_curvature })
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn sigma(&self) -> &DiagonalMatrix {
        &self.sigma
    }

    pub fn h_f(&self) -> &SymOperator {
        &self.h_f
    }

    pub fn h_g(&self) -> &SymOperator {
        &self.h_g
    }

    pub fn f(&self) -> &F {
        &self.f
    }

    pub fn g(&self) -> &G {
        &self.g
    }

    pub fn x_dim(&self) -> usize {
        self.a.cols()
    }

    pub fn y_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn constraint_dim(&self) -> usize {
        self.a.rows()
    }

    /// `H_f + AᵀΣA`, the quadratic term of every x-subproblem.
    pub fn x_curvature(&self) -> &SymOperator {
        &self.x_curvature
    }

    /// `H_g + BᵀΣB`, the quadratic term of every y-subproblem.
    pub fn y_curvature(&self) -> &SymOperator {
        &self.y_curvature
    }

    /// `Ax + By − c`.
    pub fn constraint_residual(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, AdmmError> {
        let ax = self.a.mul_vec(x)?;
        self.residual_from_ax(&ax, y)
    }

    fn residual_from_ax(&self, ax: &[f64], y: &[f64]) -> Result<Vec<f64>, AdmmError> {
        let by = self.b.mul_vec(y)?;
        Ok(ax.iter().zip(&by).zip(&self.c).map(|((p, q), c)| p + q - c).collect())
    }

    pub fn initial_state(&self, x0: Vec<f64>, y0: Vec<f64>, u0: Vec<f64>) -> Result<AdmmState, AdmmError> {
        let check = |what, expected: usize, v: &Vec<f64>| {
            if v.len() != expected {
                return Err(AdmmError::Dimension { what, expected, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(AdmmError::NonFinite { iteration: 0, what });
            }
            Ok(())
        };
        check("x0", self.x_dim(), &x0)?;
        check("y0", self.y_dim(), &y0)?;
        check("u0", self.constraint_dim(), &u0)?;
        Ok(AdmmState {
            t: 0,
            sum_x: CompensatedSum::new(x0.len()),
            sum_y: CompensatedSum::new(y0.len()),
            x: x0,
            y: y0,
            u: u0,
            trace: Vec::new(),
        })
    }

    /// All-zero starting point.
    pub fn zero_state(&self) -> AdmmState {
        self.initial_state(vec![0.0; self.x_dim()], vec![0.0; self.y_dim()], vec![0.0; self.constraint_dim()])
            .expect("zero state has consistent dimensions")
    }

    /// One x/y/u cycle. Returns `Ax_{t+1}` and the constraint residual
    /// `Ax_{t+1} + By_{t+1} − c` used in the dual update.
    pub fn step(&self, state: &mut AdmmState) -> Result<StepOutput, AdmmError> {
        let iteration = state.t + 1;

        // x-update: linear term ∇f_d(x_t) + Aᵀ(u_t + Σ(By_t − c)) − H_f x_t.
        let by = self.b.mul_vec(&state.y)?;
        let dual_x: Vec<f64> = state
            .u
            .iter()
            .zip(&by)
            .zip(&self.c)
            .zip(self.sigma.entries())
            .map(|(((u, p), c), s)| u + s * (p - c))
            .collect();
        let mut linear_x = self.a.mul_vec_transpose(&dual_x)?;
        let grad_f = self.f.smooth_gradient(&state.x);
        let hx = self.h_f.apply(&state.x)?;
        for ((l, g), h) in linear_x.iter_mut().zip(&grad_f).zip(&hx) {
            *l += g - h;
        }
        let x_next = self
            .f
            .solve_subproblem(&Subproblem { linear: &linear_x, curvature: &self.x_curvature, previous: &state.x })
            .map_err(|source| AdmmError::Subproblem { iteration, block: "x", source })?;
        if x_next.len() != self.x_dim() || x_next.iter().any(|v| !v.is_finite()) {
            return Err(AdmmError::NonFinite { iteration, what: "x" });
        }

        // y-update: linear term ∇g_d(y_t) + Bᵀ(u_t + Σ(Ax_{t+1} − c)) − H_g y_t.
        let ax = self.a.mul_vec(&x_next)?;
        let dual_y: Vec<f64> = state
            .u
            .iter()
            .zip(&ax)
            .zip(&self.c)
            .zip(self.sigma.entries())
            .map(|(((u, p), c), s)| u + s * (p - c))
            .collect();
        let mut linear_y = self.b.mul_vec_transpose(&dual_y)?;
        let grad_g = self.g.smooth_gradient(&state.y);
        let hy = self.h_g.apply(&state.y)?;
        for ((l, g), h) in linear_y.iter_mut().zip(&grad_g).zip(&hy) {
            *l += g - h;
        }
        let y_next = self
            .g
            .solve_subproblem(&Subproblem { linear: &linear_y, curvature: &self.y_curvature, previous: &state.y })
            .map_err(|source| AdmmError::Subproblem { iteration, block: "y", source })?;
        if y_next.len() != self.y_dim() || y_next.iter().any(|v| !v.is_finite()) {
            return Err(AdmmError::NonFinite { iteration, what: "y" });
        }

        // u-update.
        let residual = self.residual_from_ax(&ax, &y_next)?;
        for ((u, r), s) in state.u.iter_mut().zip(&residual).zip(self.sigma.entries()) {
            *u += s * r;
        }
        if state.u.iter().any(|v| !v.is_finite()) {
            return Err(AdmmError::NonFinite { iteration, what: "u" });
        }

        state.x = x_next;
        state.y = y_next;
        state.t = iteration;
        state.sum_x.add(&state.x);
        state.sum_y.add(&state.y);
        Ok(StepOutput { ax, residual })
    }

    /// Runs [`AdmmProblem::step`] `options.iters` times (or until the primal
    /// residual drops below `options.residual_tol`), recording one trace row
    /// per iteration through `monitor`.
    pub fn run<M: Monitor<F, G> + ?Sized>(
        &self,
        mut state: AdmmState,
        options: &RunOptions,
        monitor: &mut M,
    ) -> Result<RunOutput, AdmmError> {
        if options.iters == 0 {
            return Err(AdmmError::InvalidOptions("iters must be at least 1".into()));
        }
        let start = Instant::now();
        for _ in 0..options.iters {
            let out = self.step(&mut state)?;
            let obs = monitor.observe(self, &state, &out.ax);
            let primal_residual = numerics::norm2(&out.residual);
            let record = TraceRecord {
                iter: state.t,
                objective: obs.objective,
                primal_residual,
                alpha_t: obs.alpha.filter(|a| a.is_finite()),
                seconds: if options.record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
                objective_avg: obs.objective_avg,
            };
            state.trace.push(record);
            if options.residual_tol.is_some_and(|tol| primal_residual <= tol) {
                break;
            }
        }
        Ok(RunOutput { x_avg: state.x_avg(), y_avg: state.y_avg(), state })
    }

    /// Checks the step-size conditions: `H_f, H_g ⪰ 0`, `H_f + AᵀΣA ≻ 0`,
    /// `H_g + BᵀΣB ≻ 0`, and, where the smooth parts expose Hessians,
    /// `H_f ⪰ ∇²f_d(x)` / `H_g ⪰ ∇²g_d(y)` at each probe point.
    pub fn validate_stepsizes(
        &self,
        x_probes: &[Vec<f64>],
        y_probes: &[Vec<f64>],
        tol: f64,
    ) -> Result<StepSizeReport, AdmmError> {
        let mut checks = Vec::new();
        let h_f = self.h_f.to_dense();
        let h_g = self.h_g.to_dense();
        let mut push = |condition: String, min_eigenvalue: f64, passed: bool| {
            checks.push(ConditionCheck { condition, min_eigenvalue, passed });
        };
        let lf = numerics::min_eigenvalue(&h_f, tol)?;
        push("H_f is PSD".into(), lf, lf >= -tol);
        let lg = numerics::min_eigenvalue(&h_g, tol)?;
        push("H_g is PSD".into(), lg, lg >= -tol);
        let lx = numerics::min_eigenvalue(&self.x_curvature.to_dense(), tol)?;
        push("H_f + AᵀΣA is positive definite".into(), lx, lx > 0.0);
        let ly = numerics::min_eigenvalue(&self.y_curvature.to_dense(), tol)?;
        push("H_g + BᵀΣB is positive definite".into(), ly, ly > 0.0);
        for (i, x) in x_probes.iter().enumerate() {
            if x.len() != self.x_dim() {
                return Err(AdmmError::Dimension { what: "x probe", expected: self.x_dim(), got: x.len() });
            }
            if let Some(hess) = self.f.smooth_hessian(x) {
                let l = numerics::min_eigenvalue(&(&h_f - hess), tol)?;
                push(format!("H_f - Hess f_d(x) is PSD at x-probe {i}"), l, l >= -tol);
            }
        }
        for (i, y) in y_probes.iter().enumerate() {
            if y.len() != self.y_dim() {
                return Err(AdmmError::Dimension { what: "y probe", expected: self.y_dim(), got: y.len() });
            }
            if let Some(hess) = self.g.smooth_hessian(y) {
                let l = numerics::min_eigenvalue(&(&h_g - hess), tol)?;
                push(format!("H_g - Hess g_d(y) is PSD at y-probe {i}"), l, l >= -tol);
            }
        }
        Ok(StepSizeReport { checks })
    }
}

fn check_positive_definite(op: &SymOperator, what: &'static str) -> Result<(), AdmmError> {
    if let Some(d) = op.as_diagonal() {
        return if d.iter().all(|&v| v > 0.0) { Ok(()) } else { Err(AdmmError::CurvatureNotPositive(what)) };
    }
    if op.is_explicit() && op.dim() <= DENSE_CHECK_LIMIT && op.to_dense().cholesky().is_none() {
        return Err(AdmmError::CurvatureNotPositive(what));
    }
    Ok(())
}

/// Iterates `(x_t, y_t, u_t)` plus compensated running sums for the averages.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    sum_x: CompensatedSum,
    sum_y: CompensatedSum,
    pub trace: Vec<TraceRecord>,
}

impl AdmmState {
    /// `x̄_t = (1/t) Σ_{s=1..t} x_s`.
    pub fn x_avg(&self) -> Vec<f64> {
        self.sum_x.mean()
    }

    pub fn y_avg(&self) -> Vec<f64> {
        self.sum_y.mean()
    }
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub ax: Vec<f64>,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub iters: usize,
    /// Optional secondary stop once `‖Ax + By − c‖₂` falls to this level.
    pub residual_tol: Option<f64>,
    pub record_timing: bool,
}

impl RunOptions {
    pub fn iters(iters: usize) -> Self {
        Self { iters, residual_tol: None, record_timing: true }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: AdmmState,
    pub x_avg: Vec<f64>,
    pub y_avg: Vec<f64>,
}

/// Per-iteration values recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observation {
    pub objective: f64,
    pub objective_avg: Option<f64>,
    pub alpha: Option<f64>,
}

/// Computes the trace columns after each iteration. `ax` is `A x_t`, already
/// available from the step.
pub trait Monitor<F, G> {
    fn observe(&mut self, problem: &AdmmProblem<F, G>, state: &AdmmState, ax: &[f64]) -> Observation;
}

/// Records `f(x_t) + g(y_t)` and nothing else.
#[derive(Debug, Clone, Copy, Default)]
pub struct ObjectiveMonitor;

impl<F: CompositeObjective, G: CompositeObjective> Monitor<F, G> for ObjectiveMonitor {
    fn observe(&mut self, problem: &AdmmProblem<F, G>, state: &AdmmState, _ax: &[f64]) -> Observation {
        Observation { objective: problem.f().value(&state.x) + problem.g().value(&state.y), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: String,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSizeReport {
    pub checks: Vec<ConditionCheck>,
}

impl StepSizeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// First failed condition as an error.
    pub fn into_result(self) -> Result<(), AdmmError> {
        match self.checks.into_iter().find(|c| !c.passed) {
            Some(c) => Err(AdmmError::StepSize { condition: c.condition, min_eigenvalue: c.min_eigenvalue }),
            None => Ok(()),
        }
    }
}
