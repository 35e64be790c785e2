//! Closed-form proximal and gradient primitives.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProxError {
    #[error("quantile level must lie in (0, 1), got {0}")]
    QuantileLevel(f64),
    #[error("penalty weight lambda must be >= 0, got {0}")]
    Lambda(f64),
    #[error("penalty scale beta must be > 0 (or +inf), got {0}")]
    Beta(f64),
}

/// Quantile level `q` of the pinball loss, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(q: f64) -> Result<Self, ProxError> {
        if q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(ProxError::QuantileLevel(q))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `ℓ_q(t) = q·max(t, 0) + (1 − q)·max(−t, 0)`.
    pub fn loss(self, t: f64) -> f64 {
        quantile_loss(self.0, t)
    }
}

/// Pinball loss `q·max(t, 0) + (1 − q)·max(−t, 0)`.
pub fn quantile_loss(q: f64, t: f64) -> f64 {
    if t >= 0.0 {
        q * t
    } else {
        (q - 1.0) * t
    }
}

pub fn soft_threshold_scalar(v: f64, thresh: f64) -> f64 {
    if v > thresh {
        v - thresh
    } else if v < -thresh {
        v + thresh
    } else {
        0.0
    }
}

/// Elementwise shrinkage toward zero; exactly zero inside `[−thresh, thresh]`.
pub fn soft_threshold(v: &[f64], thresh: f64) -> Vec<f64> {
    debug_assert!(thresh >= 0.0);
    v.iter().map(|&x| soft_threshold_scalar(x, thresh)).collect()
}

/// Euclidean projection onto the ball of radius `radius` (`+inf` means no constraint).
pub fn ball_project(v: &[f64], radius: f64) -> Vec<f64> {
    debug_assert!(radius > 0.0);
    let norm = crate::numerics::norm2(v);
    if norm <= radius {
        v.to_vec()
    } else {
        let scale = radius / norm;
        v.iter().map(|x| x * scale).collect()
    }
}

/// The log-L1 sparsity penalty `λ Σ_j β log(1 + |x_j|/β)`, split as
/// `λ‖x‖₁` (convex, handled by the prox) plus the concave differentiable
/// remainder `λ Σ_j (β log(1 + |x_j|/β) − |x_j|)`.
///
/// `beta = +inf` is pure L1: the remainder and its derivatives vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogL1Penalty {
    lambda: f64,
    beta: f64,
}

impl LogL1Penalty {
    pub fn new(lambda: f64, beta: f64) -> Result<Self, ProxError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(ProxError::Lambda(lambda));
        }
        if !(beta > 0.0) {
            return Err(ProxError::Beta(beta));
        }
        Ok(Self { lambda, beta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_pure_l1(&self) -> bool {
        self.beta.is_infinite()
    }

    fn scalar_penalty(&self, t: f64) -> f64 {
        let a = t.abs();
        if self.is_pure_l1() {
            a
        } else {
            self.beta * (a / self.beta).ln_1p()
        }
    }

    /// Full penalty `λ Σ_j β log(1 + |x_j|/β)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.lambda * x.iter().map(|&t| self.scalar_penalty(t)).sum::<f64>()
    }

    /// Differentiable remainder `λ Σ_j (β log(1 + |x_j|/β) − |x_j|)`.
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        if self.is_pure_l1() {
            return 0.0;
        }
        self.lambda * x.iter().map(|&t| self.scalar_penalty(t) - t.abs()).sum::<f64>()
    }

    /// Gradient of the remainder: `−λ x_j / (β + |x_j|)`.
    pub fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        if self.is_pure_l1() {
            return vec![0.0; x.len()];
        }
        x.iter().map(|&t| -self.lambda * t / (self.beta + t.abs())).collect()
    }

    /// Diagonal of the remainder's Hessian: `−λβ / (β + |x_j|)²`, bounded below by `−λ/β`.
    pub fn smooth_hessian_diag(&self, x: &[f64]) -> Vec<f64> {
        if self.is_pure_l1() {
            return vec![0.0; x.len()];
        }
        x.iter().map(|&t| -self.lambda * self.beta / (self.beta + t.abs()).powi(2)).collect()
    }

    /// Value and remainder gradient together.
    pub fn smooth_value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.smooth_value(x), self.smooth_gradient(x))
    }
}

/// `exp` on `t <= 0` spliced with its second-order Taylor polynomial on `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qexp {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn qexp(t: f64) -> Qexp {
    if t <= 0.0 {
        let e = t.exp();
        Qexp { value: e, d1: e, d2: e }
    } else {
        Qexp { value: 1.0 + t + 0.5 * t * t, d1: 1.0 + t, d2: 1.0 }
    }
}

/// One coordinate of the quantile y-update: the minimizer over `y` of
/// `(1/n) ℓ_q(w − y) + (σ/2) y² − σ·anchor·y`.
pub fn quantile_prox_update(w: f64, anchor: f64, q: f64, n: usize, sigma: f64) -> f64 {
    let n = n as f64;
    let up = anchor + q / (n * sigma);
    let down = anchor - (1.0 - q) / (n * sigma);
    if up < w {
        up
    } else if down > w {
        down
    } else {
        w
    }
}
