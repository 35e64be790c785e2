//! Empirical probes of the convergence assumptions and trace summaries.
//!
//! Restricted strong convexity quantifies over every subgradient; a probe
//! evaluates one selected subgradient per point, so a passing probe is
//! evidence along the sampled trajectory, not a proof.

use std::io::Write;

use crate::admm::{AdmmError, AdmmProblem, CompositeObjective, TraceRecord};
use crate::numerics::{dot, norm2, sub};

/// Chooses one element of `∂h(v)` for a block objective.
pub trait SubgradientSelector {
    fn subgradient(&self, v: &[f64]) -> Vec<f64>;
}

impl<T: Fn(&[f64]) -> Vec<f64>> SubgradientSelector for T {
    fn subgradient(&self, v: &[f64]) -> Vec<f64> {
        self(v)
    }
}

/// Reference point `(x*, y*)` and its chosen subgradients `ξ_{x*}`, `ζ_{y*}`.
#[derive(Debug, Clone)]
pub struct RscAnchor {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RscProbeResult {
    pub t: usize,
    /// `⟨x − x*, ξ_x − ξ_{x*}⟩ + ⟨y − y*, ζ_y − ζ_{y*}⟩`.
    pub lhs: f64,
    /// `½‖Ax + By − c‖²_Σ`.
    pub penalty: f64,
    pub dist_x: f64,
    pub dist_y: f64,
}

impl RscProbeResult {
    /// `(lhs + penalty + ε²) / min{‖x − x*‖², ‖x − x*‖}`, the empirical
    /// curvature constant in the x-block; `None` when `x = x*`.
    pub fn x_curvature_ratio(&self, eps_sq: f64) -> Option<f64> {
        let denom = (self.dist_x * self.dist_x).min(self.dist_x);
        (denom > 0.0).then(|| (self.lhs + self.penalty + eps_sq) / denom)
    }
}

/// Evaluates the restricted-strong-convexity inner product at `(x, y)`.
#[allow(clippy::too_many_arguments)]
pub fn rsc_probe<F, G>(
    problem: &AdmmProblem<F, G>,
    select_f: &dyn SubgradientSelector,
    select_g: &dyn SubgradientSelector,
    t: usize,
    x: &[f64],
    y: &[f64],
    anchor: &RscAnchor,
) -> Result<RscProbeResult, AdmmError>
where
    F: CompositeObjective,
    G: CompositeObjective,
{
    let xi = select_f.subgradient(x);
    let zeta = select_g.subgradient(y);
    let dx = sub(x, &anchor.x);
    let dy = sub(y, &anchor.y);
    let lhs = dot(&dx, &sub(&xi, &anchor.xi)) + dot(&dy, &sub(&zeta, &anchor.zeta));
    let r = problem.constraint_residual(x, y)?;
    let penalty = 0.5 * problem.sigma().quad_form(&r);
    Ok(RscProbeResult { t, lhs, penalty, dist_x: norm2(&dx), dist_y: norm2(&dy) })
}

/// Norms of the three first-order stationarity residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FospResidual {
    /// `‖Ax* + By* − c‖₂`.
    pub primal: f64,
    /// `‖−Aᵀu* − ξ_{x*}‖₂`.
    pub dual_x: f64,
    /// `‖−Bᵀu* − ζ_{y*}‖₂`.
    pub dual_y: f64,
}

pub fn fosp_residuals<F, G>(
    problem: &AdmmProblem<F, G>,
    x: &[f64],
    y: &[f64],
    u: &[f64],
    xi: &[f64],
    zeta: &[f64],
) -> Result<FospResidual, AdmmError>
where
    F: CompositeObjective,
    G: CompositeObjective,
{
    let primal = norm2(&problem.constraint_residual(x, y)?);
    let at_u = problem.a().mul_vec_transpose(u)?;
    let bt_u = problem.b().mul_vec_transpose(u)?;
    let dual_x = norm2(&at_u.iter().zip(xi).map(|(a, s)| -a - s).collect::<Vec<_>>());
    let dual_y = norm2(&bt_u.iter().zip(zeta).map(|(b, s)| -b - s).collect::<Vec<_>>());
    Ok(FospResidual { primal, dual_x, dual_y })
}

/// Writes probe results as a sidecar CSV.
pub fn write_probe_report<W: Write>(results: &[RscProbeResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iter,lhs,penalty,dist_x,dist_y")?;
    for r in results {
        writeln!(out, "{},{:e},{:e},{:e},{:e}", r.t, r.lhs, r.penalty, r.dist_x, r.dist_y)?;
    }
    Ok(())
}

/// Values of `column` for trace rows with `lo <= iter <= hi`.
pub fn window(records: &[TraceRecord], lo: usize, hi: usize, column: impl Fn(&TraceRecord) -> Option<f64>) -> Vec<f64> {
    records.iter().filter(|r| r.iter >= lo && r.iter <= hi).filter_map(column).collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Number of consecutive steps in `values` that increase by more than `tol`.
pub fn count_increases(values: &[f64], tol: f64) -> usize {
    values.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

/// Headline numbers of one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub iterations: usize,
    pub first_objective: f64,
    pub final_objective: f64,
    pub min_objective: f64,
    pub final_objective_avg: Option<f64>,
    pub final_primal_residual: f64,
    pub min_alpha: Option<f64>,
    pub total_seconds: f64,
}

impl TraceSummary {
    pub fn from_records(records: &[TraceRecord]) -> Option<Self> {
        let first = records.first()?;
        let last = records.last()?;
        let alphas: Vec<f64> = records.iter().filter_map(|r| r.alpha_t).collect();
        Some(Self {
            iterations: records.len(),
            first_objective: first.objective,
            final_objective: last.objective,
            min_objective: records.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min),
            final_objective_avg: last.objective_avg,
            final_primal_residual: last.primal_residual,
            min_alpha: (!alphas.is_empty()).then(|| alphas.iter().copied().fold(f64::INFINITY, f64::min)),
            total_seconds: last.seconds,
        })
    }
}
