use nalgebra::DMatrix;
use ncadmm_core::admm::{CompositeObjective, Subproblem, SubproblemError};
use ncadmm_core::numerics::norm2;
use ncadmm_core::prox::{ball_project, quantile_loss, quantile_prox_update, soft_threshold_scalar, LogL1Penalty};

use crate::dataset::QuantileDataset;
use crate::spec::{QuantileError, QuantileSpec};

/// `(1/n) Σ_i ℓ_q(w_i − fit_i)`.
pub fn pinball_fit(q: f64, w: &[f64], fit: &[f64]) -> f64 {
    let total: f64 = w.iter().zip(fit).map(|(w, f)| quantile_loss(q, w - f)).sum();
    total / w.len() as f64
}

/// `Loss(x)`: pinball fit of `Φx` plus the log-L1 penalty.
pub fn quantile_objective(spec: &QuantileSpec, data: &QuantileDataset, x: &[f64]) -> Result<f64, QuantileError> {
    let penalty = LogL1Penalty::new(spec.lambda, spec.beta)
        .map_err(|e| QuantileError::InvalidSpec { field: "lambda/beta", message: e.to_string() })?;
    let fit = data.phi.mul_vec(x)?;
    Ok(pinball_fit(spec.q, &data.w, &fit) + penalty.value(x))
}

/// `f(x)`: log-L1 penalty, optionally restricted to `‖x‖₂ ≤ radius`.
///
/// The convex part `λ‖x‖₁ + ι_{‖x‖₂≤R}` goes to the prox; the concave
/// remainder is linearized. With a finite radius the subproblem needs a
/// scalar curvature, in which case soft-thresholding followed by radial
/// scaling is exact.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyObjective {
    pub penalty: LogL1Penalty,
    pub radius: f64,
    pub dim: usize,
}

impl PenaltyObjective {
    pub fn new(spec: &QuantileSpec) -> Result<Self, QuantileError> {
        let penalty = LogL1Penalty::new(spec.lambda, spec.beta)
            .map_err(|e| QuantileError::InvalidSpec { field: "lambda/beta", message: e.to_string() })?;
        Ok(Self { penalty, radius: spec.radius, dim: spec.d })
    }

    /// Subgradient of `f` with the zero element of `[−λ, λ]` at `x_j = 0`.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let lambda = self.penalty.lambda();
        self.penalty
            .smooth_gradient(x)
            .iter()
            .zip(x)
            .map(|(g, &v)| {
                let kink = if v > 0.0 {
                    lambda
                } else if v < 0.0 {
                    -lambda
                } else {
                    0.0
                };
                g + kink
            })
            .collect()
    }
}

impl CompositeObjective for PenaltyObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.radius.is_finite() && norm2(x) > self.radius * (1.0 + 1e-12) {
            return f64::INFINITY;
        }
        self.penalty.value(x)
    }

    fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.penalty.smooth_gradient(x)
    }

    fn smooth_hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&self.penalty.smooth_hessian_diag(x).into()))
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError> {
        let d = sub.curvature.as_diagonal().ok_or(SubproblemError::NotDiagonal)?;
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(SubproblemError::NotPositiveDefinite);
        }
        if self.radius.is_finite() && d.iter().any(|&v| v != d[0]) {
            return Err(SubproblemError::NotDiagonal);
        }
        let lambda = self.penalty.lambda();
        let x: Vec<f64> = sub
            .linear
            .iter()
            .zip(&d)
            .map(|(b, dj)| soft_threshold_scalar(-b / dj, lambda / dj))
            .collect();
        let x = ball_project(&x, self.radius);
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(SubproblemError::NonFinite)
        }
    }
}

/// `g(y) = (1/n) Σ_i ℓ_q(w_i − y_i)`, convex and handled exactly.
#[derive(Debug, Clone)]
pub struct PinballFit {
    pub w: Vec<f64>,
    pub q: f64,
}

impl PinballFit {
    /// Subgradient with the zero element at kinks `y_i = w_i`.
    pub fn subgradient(&self, y: &[f64]) -> Vec<f64> {
        let n = self.w.len() as f64;
        self.w
            .iter()
            .zip(y)
            .map(|(w, y)| {
                let r = w - y;
                if r > 0.0 {
                    -self.q / n
                } else if r < 0.0 {
                    (1.0 - self.q) / n
                } else {
                    0.0
                }
            })
            .collect()
    }
}

impl CompositeObjective for PinballFit {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn value(&self, y: &[f64]) -> f64 {
        pinball_fit(self.q, &self.w, y)
    }

    fn smooth_gradient(&self, y: &[f64]) -> Vec<f64> {
        vec![0.0; y.len()]
    }

    fn smooth_hessian(&self, y: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(y.len(), y.len()))
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError> {
        let d = sub.curvature.as_diagonal().ok_or(SubproblemError::NotDiagonal)?;
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(SubproblemError::NotPositiveDefinite);
        }
        let n = self.w.len();
        Ok(self
            .w
            .iter()
            .zip(sub.linear)
            .zip(&d)
            .map(|((&w, b), &s)| quantile_prox_update(w, -b / s, self.q, n, s))
            .collect())
    }
}
