use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use ncadmm_core::admm::{write_trace, AdmmProblem, AdmmState, Monitor, Observation, RunOptions, TraceRecord};
use ncadmm_core::diagnostics::RscAnchor;
use rayon::prelude::*;

use crate::dataset::QuantileDataset;
use crate::objective::{pinball_fit, PenaltyObjective, PinballFit};
use crate::spec::{QuantileError, QuantileSpec};
use crate::updates::build_problem;

pub const FIGURE2_SIGMAS: [f64; 4] = [5e-5, 1e-4, 2e-4, 5e-4];

/// Records `Loss(x_t)` as the objective and `Loss(x̄_t)` as `objective_avg`.
#[derive(Debug, Clone, Copy)]
pub struct QuantileMonitor<'a> {
    pub data: &'a QuantileDataset,
    pub q: f64,
}

impl Monitor<PenaltyObjective, PinballFit> for QuantileMonitor<'_> {
    fn observe(
        &mut self,
        problem: &AdmmProblem<PenaltyObjective, PinballFit>,
        state: &AdmmState,
        ax: &[f64],
    ) -> Observation {
        let penalty = &problem.f().penalty;
        let objective = pinball_fit(self.q, &self.data.w, ax) + penalty.value(&state.x);
        let x_avg = state.x_avg();
        let objective_avg = self
            .data
            .phi
            .mul_vec(&x_avg)
            .ok()
            .map(|fit| pinball_fit(self.q, &self.data.w, &fit) + penalty.value(&x_avg));
        Observation { objective, objective_avg, alpha: None }
    }
}

/// One ADMM run of the quantile problem at a fixed `σ`.
#[derive(Debug, Clone)]
pub struct QuantileRun {
    pub sigma: f64,
    pub trace: Vec<TraceRecord>,
    pub x_last: Vec<f64>,
    pub x_avg: Vec<f64>,
    pub y_last: Vec<f64>,
    pub u_last: Vec<f64>,
}

/// Runs `iters` iterations from the zero state.
pub fn run_sigma(
    spec: &QuantileSpec,
    data: &QuantileDataset,
    gamma: f64,
    iters: usize,
    record_timing: bool,
) -> Result<QuantileRun, QuantileError> {
    let problem = build_problem(spec, data, gamma)?;
    let options = RunOptions { iters, residual_tol: None, record_timing };
    let mut monitor = QuantileMonitor { data, q: spec.q };
    let out = problem.run(problem.zero_state(), &options, &mut monitor)?;
    Ok(QuantileRun {
        sigma: spec.sigma,
        x_avg: out.x_avg,
        x_last: out.state.x,
        y_last: out.state.y,
        u_last: out.state.u,
        trace: out.state.trace,
    })
}

/// The `σ` sweep on a shared dataset. Runs execute concurrently on the
/// current rayon pool; results keep the order of `sigmas`.
pub fn run_figure2(
    spec: &QuantileSpec,
    data: &QuantileDataset,
    gamma: f64,
    sigmas: &[f64],
    iters: usize,
    record_timing: bool,
) -> Result<Vec<QuantileRun>, QuantileError> {
    sigmas
        .par_iter()
        .map(|&sigma| run_sigma(&spec.with_sigma(sigma), data, gamma, iters, record_timing))
        .collect()
}

pub fn trace_file_name(sigma: f64) -> String {
    format!("quantile_sigma{sigma:e}.csv")
}

pub fn write_traces(runs: &[QuantileRun], dir: &Path) -> Result<Vec<PathBuf>, QuantileError> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(runs.len());
    for run in runs {
        let path = dir.join(trace_file_name(run.sigma));
        write_trace(&run.trace, BufWriter::new(File::create(&path)?))?;
        paths.push(path);
    }
    Ok(paths)
}

/// The planted point `(x_true, Φx_true)` with the dual
/// `u*_i = (1/n)(−q·1{z_i > 0} + (1−q)·1{z_i < 0})` and subgradients
/// `ζ* = u*`, `ξ*` equal to `−Φᵀu*` clipped into `∂f(x_true)`.
///
/// Returns the anchor and `u*`.
pub fn fosp_anchor(
    spec: &QuantileSpec,
    data: &QuantileDataset,
    penalty_objective: &PenaltyObjective,
) -> Result<(RscAnchor, Vec<f64>), QuantileError> {
    let n = spec.n as f64;
    let u_star: Vec<f64> = data
        .z
        .iter()
        .map(|&z| {
            if z > 0.0 {
                -spec.q / n
            } else if z < 0.0 {
                (1.0 - spec.q) / n
            } else {
                0.0
            }
        })
        .collect();
    let phi_t_u = data.phi.mul_vec_transpose(&u_star)?;
    let smooth = penalty_objective.penalty.smooth_gradient(&data.x_true);
    let lambda = penalty_objective.penalty.lambda();
    let xi = data
        .x_true
        .iter()
        .zip(&phi_t_u)
        .zip(&smooth)
        .map(|((&x, p), s)| if x != 0.0 { s + lambda * x.signum() } else { (-p).clamp(-lambda, lambda) })
        .collect();
    let anchor = RscAnchor { x: data.x_true.clone(), y: data.phi.mul_vec(&data.x_true)?, xi, zeta: u_star.clone() };
    Ok((anchor, u_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_names_use_scientific_sigma() {
        assert_eq!(trace_file_name(5e-5), "quantile_sigma5e-5.csv");
        assert_eq!(trace_file_name(2e-4), "quantile_sigma2e-4.csv");
    }
}
