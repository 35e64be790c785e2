use ncadmm_core::{AdmmError, NumericsError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantileError {
    #[error("invalid `{field}`: {message}")]
    InvalidSpec { field: &'static str, message: String },
    #[error(transparent)]
    Admm(#[from] AdmmError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Additive noise `z_i` in `w_i = φ_iᵀx_true + z_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// Student-t with the given degrees of freedom, sampled as
    /// `N(0,1) / sqrt(χ²_df / df)`.
    StudentT { df: f64 },
    Gaussian,
    Zero,
}

impl Noise {
    /// Degrees of freedom as used in configs: `inf` means Gaussian.
    pub fn from_df(df: f64) -> Noise {
        if df.is_infinite() && df > 0.0 {
            Noise::Gaussian
        } else {
            Noise::StudentT { df }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSpec {
    pub d: usize,
    pub n: usize,
    pub s_star: usize,
    pub q: f64,
    pub lambda: f64,
    /// `+inf` turns the penalty into plain `λ‖x‖₁`.
    pub beta: f64,
    /// Radius of the ℓ₂-ball constraint; `+inf` disables it.
    pub radius: f64,
    pub sigma: f64,
    pub noise: Noise,
    pub seed: u64,
}

impl Default for QuantileSpec {
    fn default() -> Self {
        Self {
            d: 2000,
            n: 1000,
            s_star: 10,
            q: 0.5,
            lambda: 0.1,
            beta: 0.5,
            radius: f64::INFINITY,
            sigma: 1e-4,
            noise: Noise::StudentT { df: 5.0 },
            seed: 0,
        }
    }
}

impl QuantileSpec {
    pub fn validate(&self) -> Result<(), QuantileError> {
        let bad = |field, message: String| Err(QuantileError::InvalidSpec { field, message });
        if self.d == 0 {
            return bad("d", "must be positive".into());
        }
        if self.n == 0 {
            return bad("n", "must be positive".into());
        }
        if self.s_star > self.d {
            return bad("s_star", format!("{} exceeds d = {}", self.s_star, self.d));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad("q", format!("{} is outside (0, 1)", self.q));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", format!("{} must be positive and finite", self.lambda));
        }
        if !(self.beta > 0.0) {
            return bad("beta", format!("{} must be positive", self.beta));
        }
        if !(self.radius > 0.0) {
            return bad("radius", format!("{} must be positive", self.radius));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma", format!("{} must be positive and finite", self.sigma));
        }
        if let Noise::StudentT { df } = self.noise {
            if !(df > 0.0) {
                return bad("noise", format!("degrees of freedom {df} must be positive"));
            }
        }
        Ok(())
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        Self { sigma, ..self.clone() }
    }
}
