use std::sync::Arc;

use ncadmm_core::admm::{AdmmProblem, SymOperator};
use ncadmm_core::numerics::spectral_norm;
use ncadmm_core::prox::{ball_project, quantile_prox_update, soft_threshold};
use ncadmm_core::{DiagonalMatrix, SparseMatrix};

use crate::dataset::QuantileDataset;
use crate::objective::{PenaltyObjective, PinballFit};
use crate::spec::{QuantileError, QuantileSpec};

pub type QuantileProblem = AdmmProblem<PenaltyObjective, PinballFit>;

/// `γ = ‖Φ‖² (1 + 1e-6)`; the small inflation keeps `γI − ΦᵀΦ` PSD despite
/// the power-iteration estimate approaching `‖Φ‖` from below.
pub fn lipschitz_gamma(phi: &SparseMatrix) -> Result<f64, QuantileError> {
    Ok(spectral_norm(phi, 1e-10)?.powi(2) * (1.0 + 1e-6))
}

/// ADMM instance `A = Φ`, `B = −I`, `c = 0`, `Σ = σI`,
/// `H_f = σ(γI − ΦᵀΦ)`, `H_g = 0`.
///
/// With this `H_f` the x-subproblem curvature `H_f + σΦᵀΦ` is `σγI`, so
/// both block updates are coordinatewise closed forms.
pub fn build_problem(spec: &QuantileSpec, data: &QuantileDataset, gamma: f64) -> Result<QuantileProblem, QuantileError> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let h_f = SymOperator::ShiftedGram {
        shift: vec![spec.sigma * gamma; d],
        factor: data.phi.clone(),
        weights: vec![-spec.sigma; n],
    };
    let problem = AdmmProblem::new(
        data.phi.clone(),
        Arc::new(SparseMatrix::identity(n).scaled(-1.0)),
        vec![0.0; n],
        DiagonalMatrix::scalar(n, spec.sigma)?,
        h_f,
        SymOperator::Zero(n),
        PenaltyObjective::new(spec)?,
        PinballFit { w: data.w.clone(), q: spec.q },
    )?;
    Ok(problem)
}

/// Closed-form x-update. `phi_x` is `Φx_t`.
///
/// ```text
/// x̃ = x_t − Φᵀ(Φx_t − y_t + u_t/σ)/γ + (λ/(σγ)) x_t/(β + |x_t|)
/// x_{t+1} = ball_R(soft(x̃, λ/(σγ)))
/// ```
#[allow(clippy::too_many_arguments)]
pub fn quantile_x_update(
    spec: &QuantileSpec,
    data: &QuantileDataset,
    gamma: f64,
    x: &[f64],
    phi_x: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<Vec<f64>, QuantileError> {
    let sigma = spec.sigma;
    let r: Vec<f64> = phi_x.iter().zip(y).zip(u).map(|((p, y), u)| p - y + u / sigma).collect();
    let grad = data.phi.mul_vec_transpose(&r)?;
    let step = spec.lambda / (sigma * gamma);
    let tilde: Vec<f64> = x
        .iter()
        .zip(&grad)
        .map(|(&xj, g)| {
            let concave = if spec.beta.is_finite() { step * xj / (spec.beta + xj.abs()) } else { 0.0 };
            xj - g / gamma + concave
        })
        .collect();
    Ok(ball_project(&soft_threshold(&tilde, step), spec.radius))
}

/// Closed-form y-update, coordinatewise around `Φx_{t+1} + u_t/σ`.
pub fn quantile_y_update(spec: &QuantileSpec, data: &QuantileDataset, phi_x_next: &[f64], u: &[f64]) -> Vec<f64> {
    data.w
        .iter()
        .zip(phi_x_next)
        .zip(u)
        .map(|((&w, p), uu)| quantile_prox_update(w, p + uu / spec.sigma, spec.q, spec.n, spec.sigma))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_dataset;

    #[test]
    fn zero_state_is_fixed_by_x_update() {
        let spec = QuantileSpec { d: 8, n: 6, s_star: 2, ..Default::default() };
        let data = generate_dataset(&spec).unwrap();
        let x = quantile_x_update(&spec, &data, 3.0, &[0.0; 8], &[0.0; 6], &[0.0; 6], &[0.0; 6]).unwrap();
        assert_eq!(x, vec![0.0; 8]);
    }

    #[test]
    fn scalar_x_update_by_hand() {
        let mut spec = QuantileSpec { d: 1, n: 1, s_star: 1, lambda: 0.5, beta: 1.0, sigma: 2.0, ..Default::default() };
        let data = QuantileDataset {
            phi: Arc::new(SparseMatrix::identity(1)),
            w: vec![0.0],
            x_true: vec![1.0],
            z: vec![0.0],
        };
        // γ = 1, x_t = 2, y_t = 0.5, u_t = 1:
        // x̃ = 2 − (2 − 0.5 + 0.5) + (0.25)(2/3) = 1/6, threshold 0.25 → 0.
        let x = quantile_x_update(&spec, &data, 1.0, &[2.0], &[2.0], &[0.5], &[1.0]).unwrap();
        assert_eq!(x, vec![0.0]);
        // x_t = 3, y_t = −1, u_t = 0: x̃ = 3 − 4 + 0.25·0.75 = −0.8125 → −0.5625.
        let x = quantile_x_update(&spec, &data, 1.0, &[3.0], &[3.0], &[-1.0], &[0.0]).unwrap();
        assert!((x[0] + 0.5625).abs() < 1e-15);
        spec.radius = 0.5;
        let x = quantile_x_update(&spec, &data, 1.0, &[3.0], &[3.0], &[-1.0], &[0.0]).unwrap();
        assert!((x[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn y_update_is_separable() {
        let spec = QuantileSpec { d: 2, n: 3, s_star: 1, q: 0.3, sigma: 0.7, ..Default::default() };
        let data = QuantileDataset {
            phi: Arc::new(SparseMatrix::zeros(3, 2)),
            w: vec![1.0, -2.0, 0.4],
            x_true: vec![1.0, 0.0],
            z: vec![0.0; 3],
        };
        let phi_x = [0.2, -1.0, 3.0];
        let u = [0.1, -0.5, 0.0];
        let y = quantile_y_update(&spec, &data, &phi_x, &u);
        for i in 0..3 {
            assert_eq!(y[i], quantile_prox_update(data.w[i], phi_x[i] + u[i] / 0.7, 0.3, 3, 0.7));
        }
    }

    #[test]
    fn large_sigma_y_tracks_anchor() {
        let spec = QuantileSpec { d: 5, n: 40, s_star: 2, q: 0.6, sigma: 1e6, ..Default::default() };
        let data = generate_dataset(&spec).unwrap();
        let phi_x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let u: Vec<f64> = (0..40).map(|i| (i as f64 * 0.11).cos()).collect();
        let y = quantile_y_update(&spec, &data, &phi_x, &u);
        let bound = 0.6f64.max(0.4) / (40.0 * 1e6);
        for i in 0..40 {
            let anchor = phi_x[i] + u[i] / 1e6;
            assert!((y[i] - anchor).abs() <= bound + 1e-15, "coordinate {i}");
        }
    }
}
