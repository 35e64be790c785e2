use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::operator::SymOperator;
use crate::numerics::NumericsError;
use crate::prox::soft_threshold_scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubproblemError {
    #[error("subproblem solver needs a diagonal quadratic term")]
    NotDiagonal,
    #[error("subproblem quadratic term is not positive definite")]
    NotPositiveDefinite,
    #[error("inner solver did not converge (residual {residual:e})")]
    DidNotConverge { residual: f64 },
    #[error("non-finite value in subproblem solution")]
    NonFinite,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One ADMM block subproblem:
///
/// ```text
/// argmin_v  h_c(v) + ⟨v, linear⟩ + ½ vᵀ curvature v
/// ```
///
/// The engine folds the linearized smooth part, the dual term, the coupling
/// penalty and the step-size proximity term into `linear` and `curvature`.
#[derive(Debug, Clone, Copy)]
pub struct Subproblem<'a> {
    pub linear: &'a [f64],
    pub curvature: &'a SymOperator,
    /// Block iterate from the previous outer iteration. Iterative inner
    /// solvers start here.
    pub previous: &'a [f64],
}

/// A block objective `h = h_c + h_d` with `h_c` convex (handled exactly by
/// [`CompositeObjective::solve_subproblem`]) and `h_d` differentiable
/// (linearized at the previous iterate).
pub trait CompositeObjective {
    fn dim(&self) -> usize;

    /// `h_c(v) + h_d(v)`; `+inf` outside the domain.
    fn value(&self, v: &[f64]) -> f64;

    /// `∇h_d(v)`.
    fn smooth_gradient(&self, v: &[f64]) -> Vec<f64>;

    /// `∇²h_d(v)` when it is available in closed form; used only for step-size validation.
    fn smooth_hessian(&self, _v: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError>;
}

fn solve_spd(m: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>, SubproblemError> {
    let chol = m.cholesky().ok_or(SubproblemError::NotPositiveDefinite)?;
    Ok(chol.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec())
}

fn check_finite(v: Vec<f64>) -> Result<Vec<f64>, SubproblemError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(SubproblemError::NonFinite)
    }
}

/// `h ≡ 0`. The subproblem is the linear system `D v = −linear`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroObjective {
    pub dim: usize,
}

impl CompositeObjective for ZeroObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _v: &[f64]) -> f64 {
        0.0
    }

    fn smooth_gradient(&self, v: &[f64]) -> Vec<f64> {
        vec![0.0; v.len()]
    }

    fn smooth_hessian(&self, v: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(v.len(), v.len()))
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError> {
        let rhs: Vec<f64> = sub.linear.iter().map(|b| -b).collect();
        let v = match sub.curvature.as_diagonal() {
            Some(d) => {
                if d.iter().any(|&x| !(x > 0.0)) {
                    return Err(SubproblemError::NotPositiveDefinite);
                }
                rhs.iter().zip(&d).map(|(r, x)| r / x).collect()
            }
            None => solve_spd(sub.curvature.to_dense(), &rhs)?,
        };
        check_finite(v)
    }
}

/// `h(v) = ½ vᵀ Q v + ⟨p, v⟩ + constant`, treated exactly (no linearization).
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    q: DMatrix<f64>,
    p: Vec<f64>,
    constant: f64,
}

impl QuadraticObjective {
    pub fn new(q: DMatrix<f64>, p: Vec<f64>, constant: f64) -> Result<Self, NumericsError> {
        if q.nrows() != q.ncols() {
            return Err(NumericsError::NotSquare { rows: q.nrows(), cols: q.ncols() });
        }
        if p.len() != q.nrows() {
            return Err(NumericsError::DimensionMismatch { expected: q.nrows(), got: p.len() });
        }
        Ok(Self { q, p, constant })
    }

    /// `½‖v − target‖²`.
    pub fn squared_distance(target: &[f64]) -> Self {
        let n = target.len();
        Self {
            q: DMatrix::identity(n, n),
            p: target.iter().map(|t| -t).collect(),
            constant: 0.5 * target.iter().map(|t| t * t).sum::<f64>(),
        }
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let qv = &self.q * DVector::from_column_slice(v);
        qv.iter().zip(&self.p).map(|(a, b)| a + b).collect()
    }
}

impl CompositeObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn value(&self, v: &[f64]) -> f64 {
        let x = DVector::from_column_slice(v);
        0.5 * x.dot(&(&self.q * &x)) + x.dot(&DVector::from_column_slice(&self.p)) + self.constant
    }

    fn smooth_gradient(&self, v: &[f64]) -> Vec<f64> {
        vec![0.0; v.len()]
    }

    fn smooth_hessian(&self, v: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(v.len(), v.len()))
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError> {
        let m = sub.curvature.to_dense() + &self.q;
        let rhs: Vec<f64> = sub.linear.iter().zip(&self.p).map(|(b, p)| -(b + p)).collect();
        check_finite(solve_spd(m, &rhs)?)
    }
}

/// `h(v) = weight·‖v‖₁`. Needs a diagonal positive subproblem curvature,
/// which a linearized step size (e.g. `H = σ(γI − AᵀA)`) provides.
#[derive(Debug, Clone, Copy)]
pub struct L1Objective {
    pub dim: usize,
    pub weight: f64,
}

impl CompositeObjective for L1Objective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.weight * v.iter().map(|x| x.abs()).sum::<f64>()
    }

    fn smooth_gradient(&self, v: &[f64]) -> Vec<f64> {
        vec![0.0; v.len()]
    }

    fn smooth_hessian(&self, v: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(v.len(), v.len()))
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError> {
        let d = sub.curvature.as_diagonal().ok_or(SubproblemError::NotDiagonal)?;
        if d.iter().any(|&x| !(x > 0.0)) {
            return Err(SubproblemError::NotPositiveDefinite);
        }
        let v = sub
            .linear
            .iter()
            .zip(&d)
            .map(|(b, dj)| soft_threshold_scalar(-b, self.weight) / dj)
            .collect();
        check_finite(v)
    }
}
