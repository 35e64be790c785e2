use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ncadmm_core::admm::{
    write_trace, AdmmProblem, AdmmState, CompositeObjective, L1Objective, Monitor, Observation, QuadraticObjective,
    RunOptions, SymOperator,
};
use ncadmm_core::diagnostics::TraceSummary;
use ncadmm_core::numerics::spectral_norm;
use ncadmm_core::{DiagonalMatrix, SparseMatrix};
use ncadmm_ct::experiment::write_outputs;
use ncadmm_ct::run_ct_experiment;
use ncadmm_quantile::{generate_dataset, lipschitz_gamma, run_figure2, write_traces};
use rayon::prelude::*;

use crate::config::{CustomProblem, Problem, ResolvedConfig};
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.toml";

/// Files written by a run and one human-readable line per result.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Writes the manifest, then runs every σ of the experiment on a pool of
/// `config.workers` threads.
pub fn execute(config: &ResolvedConfig) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(&config.output).map_err(|e| CliError::io(&config.output, e))?;
    let manifest = config.output.join(MANIFEST_NAME);
    write_manifest(config, &manifest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let mut report = pool.install(|| match &config.problem {
        Problem::Quantile(spec) => run_quantile(config, spec),
        Problem::Ct(ct) => run_ct(config, ct),
        Problem::Custom(custom) => run_custom(config, custom),
    })?;
    report.files.insert(0, manifest);
    Ok(report)
}

pub fn manifest_text(config: &ResolvedConfig) -> Result<String, CliError> {
    let body = toml::to_string(&config.echo).map_err(|e| CliError::Numerical(format!("manifest: {e}")))?;
    let mut text = String::new();
    text.push_str("# ncadmm run manifest; this file is a valid config and reproduces the run.\n");
    text.push_str(&format!("# ncadmm {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# compiler: {}\n", env!("NCADMM_RUSTC_VERSION")));
    text.push_str(&format!("# target: {}-{}\n", std::env::consts::ARCH, std::env::consts::OS));
    text.push_str(&format!("# seed: {}\n\n", config.seed));
    text.push_str(&body);
    Ok(text)
}

fn write_manifest(config: &ResolvedConfig, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, manifest_text(config)?).map_err(|e| CliError::io(path, e))
}

fn summary_line(kind: &str, sigma: f64, trace: &[ncadmm_core::admm::TraceRecord]) -> String {
    let Some(s) = TraceSummary::from_records(trace) else {
        return format!("{kind} sigma={sigma:e}: empty trace");
    };
    let mut line = format!(
        "{kind} sigma={sigma:e}: {} iterations, objective {:.6e} -> {:.6e}, residual {:.3e}",
        s.iterations, s.first_objective, s.final_objective, s.final_primal_residual
    );
    if let Some(avg) = s.final_objective_avg {
        line.push_str(&format!(", averaged objective {avg:.6e}"));
    }
    if let Some(alpha) = s.min_alpha {
        line.push_str(&format!(", min alpha {alpha:.4}"));
    }
    line
}

fn run_quantile(config: &ResolvedConfig, spec: &ncadmm_quantile::QuantileSpec) -> Result<RunReport, CliError> {
    let data = generate_dataset(spec)?;
    let gamma = lipschitz_gamma(&data.phi)?;
    let runs = run_figure2(spec, &data, gamma, &config.sigmas, config.iters, config.record_timing)?;
    let files = write_traces(&runs, &config.output)?;
    let lines = runs.iter().map(|r| summary_line("quantile", r.sigma, &r.trace)).collect();
    Ok(RunReport { files, lines })
}

fn run_ct(config: &ResolvedConfig, ct: &ncadmm_ct::CtExperimentConfig) -> Result<RunReport, CliError> {
    let output = run_ct_experiment(ct)?;
    let mut files = write_outputs(&output, &config.output)?;
    let mut lines: Vec<String> = output.runs.iter().map(|r| summary_line("ct", r.sigma, &r.trace)).collect();
    let report_path = config.output.join("ct_report.txt");
    let mut report = String::new();
    report.push_str(&format!("fosp_ratio {:e}\n", output.fosp_ratio));
    for run in &output.runs {
        report.push_str(&format!("sigma {:e} median_abs_error {:e}\n", run.sigma, run.median_abs_error(&output.scan.phantom)));
    }
    std::fs::write(&report_path, &report).map_err(|e| CliError::io(&report_path, e))?;
    files.push(report_path);
    lines.push(format!("ct FOSP ratio {:.3e}", output.fosp_ratio));
    Ok(RunReport { files, lines })
}

/// `λ‖x‖₁ + ½‖Mx − w‖²` at the iterate and at the running average.
struct LassoMonitor<'a> {
    matrix: &'a SparseMatrix,
    target: &'a [f64],
}

impl LassoMonitor<'_> {
    fn loss(&self, f: &L1Objective, x: &[f64], mx: &[f64]) -> f64 {
        let fit: f64 = mx.iter().zip(self.target).map(|(a, b)| (a - b) * (a - b)).sum();
        f.value(x) + 0.5 * fit
    }
}

impl Monitor<L1Objective, QuadraticObjective> for LassoMonitor<'_> {
    fn observe(&mut self, problem: &AdmmProblem<L1Objective, QuadraticObjective>, state: &AdmmState, ax: &[f64]) -> Observation {
        let x_avg = state.x_avg();
        let objective_avg = self.matrix.mul_vec(&x_avg).ok().map(|m| self.loss(problem.f(), &x_avg, &m));
        Observation { objective: self.loss(problem.f(), &state.x, ax), objective_avg, alpha: None }
    }
}

/// The LASSO split `f = λ‖·‖₁`, `g = ½‖· − w‖²`, `Mx − y = 0`, with
/// `H_f = σ(γI − MᵀM)` and `γ` just above `‖M‖²`.
pub fn lasso_problem(custom: &CustomProblem, sigma: f64) -> Result<AdmmProblem<L1Objective, QuadraticObjective>, CliError> {
    let m = &custom.matrix;
    let (k, d) = (m.rows(), m.cols());
    let gamma = spectral_norm(m, 1e-10)?.powi(2) * (1.0 + 1e-6);
    Ok(AdmmProblem::new(
        Arc::clone(m),
        Arc::new(SparseMatrix::identity(k).scaled(-1.0)),
        vec![0.0; k],
        DiagonalMatrix::scalar(k, sigma)?,
        SymOperator::ShiftedGram { shift: vec![sigma * gamma; d], factor: Arc::clone(m), weights: vec![-sigma; k] },
        SymOperator::Zero(k),
        L1Objective { dim: d, weight: custom.lambda },
        QuadraticObjective::squared_distance(&custom.target),
    )?)
}

fn run_custom(config: &ResolvedConfig, custom: &CustomProblem) -> Result<RunReport, CliError> {
    let runs = config
        .sigmas
        .par_iter()
        .map(|&sigma| {
            let problem = lasso_problem(custom, sigma)?;
            let mut monitor = LassoMonitor { matrix: &custom.matrix, target: &custom.target };
            let options = RunOptions { iters: config.iters, residual_tol: None, record_timing: config.record_timing };
            Ok((sigma, problem.run(problem.zero_state(), &options, &mut monitor)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut report = RunReport::default();
    for (sigma, out) in &runs {
        let trace_path = config.output.join(format!("custom_sigma{sigma:e}.csv"));
        let file = File::create(&trace_path).map_err(|e| CliError::io(&trace_path, e))?;
        write_trace(&out.state.trace, BufWriter::new(file))?;
        let x_path = config.output.join(format!("custom_sigma{sigma:e}_x.txt"));
        let mut w = BufWriter::new(File::create(&x_path).map_err(|e| CliError::io(&x_path, e))?);
        writeln!(w, "# x_last x_avg")?;
        for (a, b) in out.state.x.iter().zip(&out.x_avg) {
            writeln!(w, "{a:e} {b:e}")?;
        }
        w.flush()?;
        report.lines.push(summary_line("custom", *sigma, &out.state.trace));
        report.files.push(trace_path);
        report.files.push(x_path);
    }
    Ok(report)
}
