//! Preconditioned linearized ADMM for `min_x g(Px)`, split as `y = Px`.
//!
//! With `f ≡ 0`, `A = P ⊗ I`, `B = −I`, `Σ = Σ̃ ⊗ I` and
//! `H_f = Q_f ⊗ I − AᵀΣA` the iteration reduces to
//!
//! ```text
//! x_{t+1} = x_t + Q_f⁻¹ Pᵀ(Σ̃(y_t − Px_t) − u_t)
//! y_{t+1} = argmin_y g_c(y) + ⟨y, ∇g_d(y_t) − u_t⟩ + ½‖Px_{t+1} − y‖²_Σ̃   (per-ray Newton)
//! u_{t+1} = u_t + Σ̃(Px_{t+1} − y_{t+1})
//! ```

use std::sync::Arc;
use std::time::Instant;

use ncadmm_core::admm::{
    AdmmError, AdmmProblem, CompositeObjective, Subproblem, SubproblemError, SymOperator, TraceRecord, ZeroObjective,
};
use ncadmm_core::numerics::{cholesky_solve_small, norm2, CompensatedSum};
use ncadmm_core::{DiagonalMatrix, SparseMatrix};
use rayon::prelude::*;

use crate::error::CtError;
use crate::forward::{loss_offset, ray_concave_part, ray_convex_part, CountData};
use crate::spectral::SpectralModel;

pub const DEFAULT_NEWTON_ITERS: usize = 10;

/// Rays whose projector row is not identically zero.
pub fn informative_rays(projector: &SparseMatrix) -> Vec<usize> {
    projector.row_sums().iter().enumerate().filter(|(_, &s)| s > 0.0).map(|(l, _)| l).collect()
}

/// Diagonal preconditioners `Q_f = σ·colsum(P)` and `Σ̃ = σ / rowsum(P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtPreconditioners {
    pub sigma: f64,
    pub q_f: Vec<f64>,
    pub sigma_tilde: Vec<f64>,
}

impl CtPreconditioners {
    /// Every row of `projector` must have a positive sum.
    pub fn new(projector: &SparseMatrix, sigma: f64) -> Result<Self, CtError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(CtError::Spectral(format!("sigma must be positive, got {sigma}")));
        }
        let rows = projector.row_sums();
        if let Some(l) = rows.iter().position(|&s| !(s > 0.0)) {
            return Err(CtError::Geometry(format!("ray {l} does not intersect the grid")));
        }
        Ok(Self {
            sigma,
            q_f: projector.col_sums().iter().map(|c| sigma * c).collect(),
            sigma_tilde: rows.iter().map(|r| sigma / r).collect(),
        })
    }

    /// `Σ̃ ⊗ I`.
    pub fn sigma_blocks(&self, n_m: usize) -> Vec<f64> {
        self.sigma_tilde.iter().flat_map(|&s| std::iter::repeat_n(s, n_m)).collect()
    }
}

/// `x + Q_f⁻¹Pᵀ(Σ̃(y − Px) − u)`. Pixels no ray touches keep their value.
pub fn ct_x_update(
    projector: &SparseMatrix,
    pre: &CtPreconditioners,
    n_m: usize,
    x: &[f64],
    px: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<Vec<f64>, CtError> {
    let r: Vec<f64> = (0..y.len()).map(|j| pre.sigma_tilde[j / n_m] * (y[j] - px[j]) - u[j]).collect();
    let back = projector.mul_block_transpose(&r, n_m)?;
    Ok(x
        .iter()
        .zip(&back)
        .enumerate()
        .map(|(j, (xj, b))| {
            let q = pre.q_f[j / n_m];
            if q > 0.0 {
                xj + b / q
            } else {
                *xj
            }
        })
        .collect())
}

/// `u + Σ̃(Px − y)`.
pub fn ct_u_update(pre: &CtPreconditioners, n_m: usize, u: &[f64], px: &[f64], y: &[f64]) -> Vec<f64> {
    (0..u.len()).map(|j| u[j] + pre.sigma_tilde[j / n_m] * (px[j] - y[j])).collect()
}

/// One ray's y-subproblem
/// `v ↦ g_{c,ℓ}(v) + ⟨v, linear⟩ + (σ̃/2)‖v‖²`.
#[derive(Debug, Clone, Copy)]
pub struct RaySubproblem<'a> {
    pub model: &'a SpectralModel,
    pub scale: f64,
    pub linear: &'a [f64],
    pub sigma_tilde: f64,
}

impl RaySubproblem<'_> {
    pub fn value(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let (mut g, mut h) = (vec![0.0; n], vec![0.0; n * n]);
        let gc = ray_convex_part(self.model, self.scale, v, &mut g, &mut h);
        gc + v.iter().zip(self.linear).map(|(a, b)| a * b).sum::<f64>()
            + 0.5 * self.sigma_tilde * v.iter().map(|a| a * a).sum::<f64>()
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let (mut g, mut h) = (vec![0.0; n], vec![0.0; n * n]);
        ray_convex_part(self.model, self.scale, v, &mut g, &mut h);
        (0..n).map(|m| g[m] + self.linear[m] + self.sigma_tilde * v[m]).collect()
    }

    /// `iters` undamped Newton steps from `start`.
    pub fn newton(&self, start: &[f64], iters: usize) -> Result<Vec<f64>, ncadmm_core::NumericsError> {
        let n = start.len();
        let mut v = start.to_vec();
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        for _ in 0..iters {
            ray_convex_part(self.model, self.scale, &v, &mut grad, &mut hess);
            for m in 0..n {
                grad[m] += self.linear[m] + self.sigma_tilde * v[m];
                hess[m * n + m] += self.sigma_tilde;
            }
            cholesky_solve_small(&mut hess, &mut grad, n)?;
            for m in 0..n {
                v[m] -= grad[m];
            }
        }
        Ok(v)
    }
}

/// The CT loss `g = g_c + g_d` restricted to a set of rays, as the y-block
/// objective of the ADMM problem.
#[derive(Debug, Clone)]
pub struct CtLikelihood {
    pub model: SpectralModel,
    /// Scan index of each ray in the block.
    pub rays: Vec<usize>,
    /// Counts per ray, `counts[r·n_w + w]`.
    pub counts: Vec<f64>,
    pub newton_iters: usize,
}

impl CtLikelihood {
    pub fn new(model: SpectralModel, counts: &CountData, rays: Vec<usize>) -> Result<Self, CtError> {
        if counts.n_windows != model.n_windows() {
            return Err(CtError::Dimension { what: "count windows", expected: model.n_windows(), got: counts.n_windows });
        }
        if let Some(&bad) = rays.iter().find(|&&l| l >= counts.n_rays) {
            return Err(CtError::Dimension { what: "ray index", expected: counts.n_rays, got: bad });
        }
        let counts = rays.iter().flat_map(|&l| counts.ray(l)).collect();
        Ok(Self { model, rays, counts, newton_iters: DEFAULT_NEWTON_ITERS })
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn n_materials(&self) -> usize {
        self.model.n_materials()
    }

    fn ray_counts(&self, r: usize) -> &[f64] {
        let n_w = self.model.n_windows();
        &self.counts[r * n_w..(r + 1) * n_w]
    }

    fn check_len(&self, y: &[f64]) -> Result<(), CtError> {
        let expected = self.n_rays() * self.n_materials();
        if y.len() != expected {
            return Err(CtError::Dimension { what: "projections", expected, got: y.len() });
        }
        Ok(())
    }

    /// Per-ray `(g_c + g_d, ∇g_c, ∇g_d)`.
    fn ray_terms(&self, r: usize, v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), CtError> {
        let n_m = v.len();
        let scale = self.model.scale(self.rays[r]);
        let (mut gc_grad, mut hess, mut gd_grad) = (vec![0.0; n_m], vec![0.0; n_m * n_m], vec![0.0; n_m]);
        let gc = ray_convex_part(&self.model, scale, v, &mut gc_grad, &mut hess);
        let gd = ray_concave_part(&self.model, scale, v, self.ray_counts(r), &mut gd_grad)
            .map_err(|(window, mean)| CtError::BadMean { window, ray: self.rays[r], mean })?;
        Ok((gc + gd, gc_grad, gd_grad))
    }

    fn per_ray(&self, y: &[f64]) -> Result<Vec<(f64, Vec<f64>, Vec<f64>)>, CtError> {
        self.check_len(y)?;
        let n_m = self.n_materials();
        (0..self.n_rays()).into_par_iter().map(|r| self.ray_terms(r, &y[r * n_m..(r + 1) * n_m])).collect()
    }

    /// `g(y)`, summed over rays in a fixed order.
    pub fn loss(&self, y: &[f64]) -> Result<f64, CtError> {
        Ok(self.per_ray(y)?.iter().map(|t| t.0).sum())
    }

    /// `Σ (C log C − C)` over the block's counts.
    pub fn offset(&self) -> f64 {
        loss_offset(self.counts.iter().copied())
    }

    /// `∇g(y)`.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>, CtError> {
        Ok(self
            .per_ray(y)?
            .into_iter()
            .flat_map(|(_, gc, gd)| gc.into_iter().zip(gd).map(|(a, b)| a + b))
            .collect())
    }

    /// `∇g_d(y)`.
    pub fn concave_gradient(&self, y: &[f64]) -> Result<Vec<f64>, CtError> {
        self.check_len(y)?;
        let n_m = self.n_materials();
        let per: Vec<Vec<f64>> = (0..self.n_rays())
            .into_par_iter()
            .map(|r| {
                let mut g = vec![0.0; n_m];
                ray_concave_part(
                    &self.model,
                    self.model.scale(self.rays[r]),
                    &y[r * n_m..(r + 1) * n_m],
                    self.ray_counts(r),
                    &mut g,
                )
                .map_err(|(window, mean)| CtError::BadMean { window, ray: self.rays[r], mean })?;
                Ok(g)
            })
            .collect::<Result<_, CtError>>()?;
        Ok(per.concat())
    }

    /// Solves every ray's subproblem with per-ray weight `sigma_tilde[r]` and
    /// linear term `linear[r·n_m..]`, starting from `start`.
    pub fn solve_rays(&self, sigma_tilde: &[f64], linear: &[f64], start: &[f64]) -> Result<Vec<f64>, CtError> {
        self.check_len(linear)?;
        self.check_len(start)?;
        let n_m = self.n_materials();
        let mut out = vec![0.0; start.len()];
        out.par_chunks_mut(n_m).enumerate().try_for_each(|(r, chunk)| {
            let sub = RaySubproblem {
                model: &self.model,
                scale: self.model.scale(self.rays[r]),
                linear: &linear[r * n_m..(r + 1) * n_m],
                sigma_tilde: sigma_tilde[r],
            };
            let v = sub
                .newton(&start[r * n_m..(r + 1) * n_m], self.newton_iters)
                .map_err(|_| CtError::Singular { ray: self.rays[r] })?;
            chunk.copy_from_slice(&v);
            Ok::<(), CtError>(())
        })?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(CtError::NonFinite("projection estimate"));
        }
        Ok(out)
    }
}

impl CompositeObjective for CtLikelihood {
    fn dim(&self) -> usize {
        self.n_rays() * self.n_materials()
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.loss(v).unwrap_or(f64::INFINITY)
    }

    fn smooth_gradient(&self, v: &[f64]) -> Vec<f64> {
        self.concave_gradient(v).unwrap_or_else(|_| vec![f64::NAN; v.len()])
    }

    fn solve_subproblem(&self, sub: &Subproblem<'_>) -> Result<Vec<f64>, SubproblemError> {
        let d = sub.curvature.as_diagonal().ok_or(SubproblemError::NotDiagonal)?;
        let n_m = self.n_materials();
        let mut sigma_tilde = Vec::with_capacity(self.n_rays());
        for block in d.chunks(n_m) {
            if block.iter().any(|&s| s != block[0]) {
                return Err(SubproblemError::NotDiagonal);
            }
            if !(block[0] > 0.0) {
                return Err(SubproblemError::NotPositiveDefinite);
            }
            sigma_tilde.push(block[0]);
        }
        self.solve_rays(&sigma_tilde, sub.linear, sub.previous).map_err(|e| match e {
            CtError::NonFinite(_) => SubproblemError::NonFinite,
            _ => SubproblemError::NotPositiveDefinite,
        })
    }
}

/// Newton y-update: each ray minimizes
/// `g_{c,ℓ}(v) + ⟨v, ∇g_d(y)_ℓ − u_ℓ⟩ + (Σ̃_ℓ/2)‖(Px)_ℓ − v‖²` from `y_ℓ`.
pub fn ct_y_update(
    likelihood: &CtLikelihood,
    pre: &CtPreconditioners,
    px: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<Vec<f64>, CtError> {
    let n_m = likelihood.n_materials();
    let grad_d = likelihood.concave_gradient(y)?;
    let linear: Vec<f64> =
        (0..y.len()).map(|j| grad_d[j] - u[j] - pre.sigma_tilde[j / n_m] * px[j]).collect();
    likelihood.solve_rays(&pre.sigma_tilde, &linear, y)
}

/// `[⟨y − y*, ∇g(y) − ∇g(y*)⟩ + ½‖Px − y‖²_Σ] / ‖y − y*‖²` with `Σ`
/// given per entry, or `None` when `‖y − y*‖² ≤ 1e−12·dim(y)`.
pub fn alpha_ratio(y: &[f64], y_star: &[f64], grad: &[f64], grad_star: &[f64], px: &[f64], sigma: &[f64]) -> Option<f64> {
    let dy: Vec<f64> = y.iter().zip(y_star).map(|(a, b)| a - b).collect();
    let denom: f64 = dy.iter().map(|d| d * d).sum();
    if denom <= 1e-12 * y.len() as f64 {
        return None;
    }
    let inner: f64 = dy.iter().zip(grad.iter().zip(grad_star)).map(|(d, (g, gs))| d * (g - gs)).sum();
    let penalty: f64 = 0.5 * (0..y.len()).map(|j| sigma[j] * (px[j] - y[j]).powi(2)).sum::<f64>();
    let alpha = (inner + penalty) / denom;
    alpha.is_finite().then_some(alpha)
}

/// [`alpha_ratio`] for the CT loss with `Σ = Σ̃ ⊗ I`.
pub fn alpha_t_diagnostic(
    likelihood: &CtLikelihood,
    pre: &CtPreconditioners,
    px: &[f64],
    y: &[f64],
    y_star: &[f64],
    grad_star: &[f64],
) -> Result<Option<f64>, CtError> {
    let dist_sq: f64 = y.iter().zip(y_star).map(|(a, b)| (a - b).powi(2)).sum();
    if dist_sq <= 1e-12 * y.len() as f64 {
        return Ok(None);
    }
    let grad = likelihood.gradient(y)?;
    Ok(alpha_ratio(y, y_star, &grad, grad_star, px, &pre.sigma_blocks(likelihood.n_materials())))
}

/// `‖∇g(y*)‖ / ‖∇g(0)‖`.
pub fn fosp_ratio(likelihood: &CtLikelihood, y_star: &[f64]) -> Result<f64, CtError> {
    let at_zero = norm2(&likelihood.gradient(&vec![0.0; y_star.len()])?);
    if at_zero == 0.0 {
        return Err(CtError::ZeroReferenceGradient);
    }
    Ok(norm2(&likelihood.gradient(y_star)?) / at_zero)
}

/// Reconstruction problem on the informative rays of a scan.
#[derive(Debug, Clone)]
pub struct CtReconProblem {
    pub likelihood: CtLikelihood,
    /// Projector restricted to the informative rays.
    pub projector: Arc<SparseMatrix>,
    pub pre: CtPreconditioners,
}

impl CtReconProblem {
    pub fn new(model: SpectralModel, full_projector: &SparseMatrix, counts: &CountData, sigma: f64) -> Result<Self, CtError> {
        if counts.n_rays != full_projector.rows() {
            return Err(CtError::Dimension { what: "count rays", expected: full_projector.rows(), got: counts.n_rays });
        }
        let rays = informative_rays(full_projector);
        let projector = Arc::new(full_projector.select_rows(&rays));
        let pre = CtPreconditioners::new(&projector, sigma)?;
        let likelihood = CtLikelihood::new(model, counts, rays)?;
        Ok(Self { likelihood, projector, pre })
    }

    pub fn with_newton_iters(mut self, iters: usize) -> Self {
        self.likelihood.newton_iters = iters;
        self
    }

    pub fn n_materials(&self) -> usize {
        self.likelihood.n_materials()
    }

    pub fn x_dim(&self) -> usize {
        self.projector.cols() * self.n_materials()
    }

    pub fn y_dim(&self) -> usize {
        self.projector.rows() * self.n_materials()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, CtError> {
        Ok(self.projector.mul_block(x, self.n_materials())?)
    }

    /// `g(Px) + offset`.
    pub fn objective(&self, x: &[f64]) -> Result<f64, CtError> {
        Ok(self.likelihood.loss(&self.project(x)?)? + self.likelihood.offset())
    }

    pub fn zero_state(&self) -> CtState {
        CtState {
            t: 0,
            x: vec![0.0; self.x_dim()],
            px: vec![0.0; self.y_dim()],
            y: vec![0.0; self.y_dim()],
            u: vec![0.0; self.y_dim()],
            sum_x: CompensatedSum::new(self.x_dim()),
        }
    }

    pub fn step(&self, state: &mut CtState) -> Result<(), CtError> {
        let n_m = self.n_materials();
        let x = ct_x_update(&self.projector, &self.pre, n_m, &state.x, &state.px, &state.y, &state.u)?;
        let px = self.project(&x)?;
        let y = ct_y_update(&self.likelihood, &self.pre, &px, &state.y, &state.u)?;
        state.u = ct_u_update(&self.pre, n_m, &state.u, &px, &y);
        state.x = x;
        state.px = px;
        state.y = y;
        state.t += 1;
        state.sum_x.add(&state.x);
        Ok(())
    }

    /// Runs `iters` iterations from zero, recording `g(Px_t) + offset`, the
    /// primal residual and, given a reference, `α_t`.
    pub fn run(&self, iters: usize, reference: Option<&AlphaReference>, record_timing: bool) -> Result<CtRunState, CtError> {
        let mut state = self.zero_state();
        let mut trace = Vec::with_capacity(iters);
        let start = Instant::now();
        let offset = self.likelihood.offset();
        for _ in 0..iters {
            self.step(&mut state)?;
            let objective = self.likelihood.loss(&state.px)? + offset;
            let residual: Vec<f64> = state.px.iter().zip(&state.y).map(|(a, b)| a - b).collect();
            let alpha_t = match reference {
                Some(r) => alpha_t_diagnostic(&self.likelihood, &self.pre, &state.px, &state.y, &r.y_star, &r.grad_star)?,
                None => None,
            };
            if !objective.is_finite() {
                return Err(CtError::NonFinite("objective"));
            }
            trace.push(TraceRecord {
                iter: state.t,
                objective,
                primal_residual: norm2(&residual),
                alpha_t,
                seconds: if record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
                objective_avg: None,
            });
        }
        Ok(CtRunState { state, trace })
    }

    /// The same iteration expressed for the generic engine.
    pub fn to_admm(&self) -> Result<AdmmProblem<ZeroObjective, CtLikelihood>, CtError> {
        let n_m = self.n_materials();
        let a = Arc::new(self.projector.kron_identity(n_m));
        let sigma = self.pre.sigma_blocks(n_m);
        let shift: Vec<f64> = self.pre.q_f.iter().flat_map(|&q| std::iter::repeat_n(q, n_m)).collect();
        let h_f = SymOperator::ShiftedGram { shift, factor: a.clone(), weights: sigma.iter().map(|s| -s).collect() };
        let y_dim = self.y_dim();
        AdmmProblem::new(
            a,
            Arc::new(SparseMatrix::identity(y_dim).scaled(-1.0)),
            vec![0.0; y_dim],
            DiagonalMatrix::new(sigma).map_err(CtError::Numerics)?,
            h_f,
            SymOperator::Zero(y_dim),
            ZeroObjective { dim: self.x_dim() },
            self.likelihood.clone(),
        )
        .map_err(|e: AdmmError| CtError::Admm(e))
    }
}

/// Reference projections `y* = Px*` and `∇g(y*)` for the α_t diagnostic.
#[derive(Debug, Clone)]
pub struct AlphaReference {
    pub y_star: Vec<f64>,
    pub grad_star: Vec<f64>,
}

impl AlphaReference {
    pub fn new(problem: &CtReconProblem, x_star: &[f64]) -> Result<Self, CtError> {
        let y_star = problem.project(x_star)?;
        let grad_star = problem.likelihood.gradient(&y_star)?;
        Ok(Self { y_star, grad_star })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtState {
    pub t: usize,
    pub x: Vec<f64>,
    /// `Px_t`.
    pub px: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub sum_x: CompensatedSum,
}

impl CtState {
    pub fn x_avg(&self) -> Vec<f64> {
        self.sum_x.mean()
    }
}

#[derive(Debug, Clone)]
pub struct CtRunState {
    pub state: CtState,
    pub trace: Vec<TraceRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(mu: f64, intensity: f64) -> SpectralModel {
        SpectralModel {
            materials: vec!["a".into()],
            energies: vec![50.0],
            mu: vec![mu],
            beam: vec![intensity],
            thresholds: vec![],
            window_weights: vec![1.0],
            response: vec![intensity],
            response_total: vec![intensity],
            ray_scale: vec![],
        }
    }

    #[test]
    fn x_update_fixed_point_and_scalar_case() {
        let p = SparseMatrix::from_rows(1, vec![vec![(0, 2.0)]]).unwrap();
        let pre = CtPreconditioners::new(&p, 3.0).unwrap();
        assert_eq!(pre.q_f, vec![6.0]);
        assert_eq!(pre.sigma_tilde, vec![1.5]);
        let x = [0.5];
        let px = [1.0];
        assert_eq!(ct_x_update(&p, &pre, 1, &x, &px, &px, &[0.0]).unwrap(), vec![0.5]);
        // r = 1.5·(2 − 1) − 0.25 = 1.25; Pᵀr = 2.5; x + 2.5/6.
        let next = ct_x_update(&p, &pre, 1, &x, &px, &[2.0], &[0.25]).unwrap();
        assert!((next[0] - (0.5 + 2.5 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn u_update_scalar_case() {
        let p = SparseMatrix::from_rows(1, vec![vec![(0, 2.0)]]).unwrap();
        let pre = CtPreconditioners::new(&p, 3.0).unwrap();
        assert_eq!(ct_u_update(&pre, 1, &[0.1], &[1.0], &[1.0]), vec![0.1]);
        assert_eq!(ct_u_update(&pre, 1, &[0.1], &[1.0], &[0.5]), vec![0.1 + 1.5 * 0.5]);
    }

    #[test]
    fn preconditioners_reject_missing_rays() {
        let p = SparseMatrix::from_rows(2, vec![vec![(0, 1.0)], vec![]]).unwrap();
        assert!(CtPreconditioners::new(&p, 1.0).is_err());
        assert_eq!(informative_rays(&p), vec![0]);
    }

    #[test]
    fn alpha_skips_at_reference() {
        let model = scalar_model(1.0, 100.0);
        let counts = CountData { n_windows: 1, n_rays: 1, counts: vec![90] };
        let lik = CtLikelihood::new(model, &counts, vec![0]).unwrap();
        let p = SparseMatrix::from_rows(1, vec![vec![(0, 1.0)]]).unwrap();
        let pre = CtPreconditioners::new(&p, 1.0).unwrap();
        let g = lik.gradient(&[0.2]).unwrap();
        assert_eq!(alpha_t_diagnostic(&lik, &pre, &[0.2], &[0.2], &[0.2], &g).unwrap(), None);
    }

    #[test]
    fn newton_monotone_on_a_ray() {
        let model = scalar_model(0.9, 1e3);
        let linear = [-400.0];
        let sub = RaySubproblem { model: &model, scale: 1.0, linear: &linear, sigma_tilde: 0.5 };
        let mut v = vec![3.0];
        let mut last = sub.value(&v);
        for _ in 0..10 {
            v = sub.newton(&v, 1).unwrap();
            let now = sub.value(&v);
            assert!(now <= last + 1e-12 * last.abs());
            last = now;
        }
        assert!(sub.gradient(&v)[0].abs() < 1e-8);
    }
}
