use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ncadmm_core::admm::{write_trace, TraceRecord};
use ncadmm_core::SparseMatrix;
use rayon::prelude::*;

use crate::error::CtError;
use crate::forward::{forward_counts, CountData};
use crate::geometry::{build_projector, CtGeometry};
use crate::phantom::{default_phantom, CtImage};
use crate::recon::{fosp_ratio, AlphaReference, CtReconProblem, DEFAULT_NEWTON_ITERS};
use crate::spectral::{build_spectral_model, AttenuationTable, SpectralConfig, SpectralModel, Spectrum};

pub const DEFAULT_SIGMAS: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone)]
pub struct CtExperimentConfig {
    pub geometry: CtGeometry,
    pub spectral: SpectralConfig,
    pub attenuation: AttenuationTable,
    pub spectrum: Spectrum,
    /// Ground-truth image; `None` uses [`default_phantom`].
    pub phantom: Option<CtImage>,
    pub sigmas: Vec<f64>,
    pub iters: usize,
    pub seed: u64,
    pub newton_iters: usize,
    pub record_timing: bool,
}

impl Default for CtExperimentConfig {
    /// 25×25 pixels over 10 cm, 50 angles × 50 detectors, three materials
    /// and three windows, 10⁶ photons per ray.
    fn default() -> Self {
        Self {
            geometry: CtGeometry::square(25, 10.0, 50, 50),
            spectral: SpectralConfig::default(),
            attenuation: AttenuationTable::bundled(),
            spectrum: Spectrum::bundled(),
            phantom: None,
            sigmas: DEFAULT_SIGMAS.to_vec(),
            iters: 1000,
            seed: 0,
            newton_iters: DEFAULT_NEWTON_ITERS,
            record_timing: true,
        }
    }
}

/// A simulated acquisition: model, full projector, ground truth and counts.
#[derive(Debug, Clone)]
pub struct CtScan {
    pub geometry: CtGeometry,
    pub model: SpectralModel,
    pub projector: SparseMatrix,
    pub phantom: CtImage,
    pub counts: CountData,
}

impl CtScan {
    pub fn simulate(config: &CtExperimentConfig) -> Result<Self, CtError> {
        config.geometry.validate()?;
        let model = build_spectral_model(&config.spectral, &config.attenuation, &config.spectrum)?;
        let projector = build_projector(&config.geometry)?;
        let phantom = match &config.phantom {
            Some(p) => p.clone(),
            None => default_phantom(&config.geometry, &config.spectral.materials),
        };
        phantom.check_matches(&config.geometry, model.n_materials())?;
        let counts = forward_counts(&model, &projector, &phantom, config.seed)?;
        Ok(Self { geometry: config.geometry.clone(), model, projector, phantom, counts })
    }

    pub fn problem(&self, sigma: f64, newton_iters: usize) -> Result<CtReconProblem, CtError> {
        Ok(CtReconProblem::new(self.model.clone(), &self.projector, &self.counts, sigma)?.with_newton_iters(newton_iters))
    }

    fn image(&self, data: Vec<f64>) -> CtImage {
        CtImage { nx: self.geometry.nx, ny: self.geometry.ny, materials: self.model.materials.clone(), data }
    }
}

#[derive(Debug, Clone)]
pub struct CtRun {
    pub sigma: f64,
    pub trace: Vec<TraceRecord>,
    pub x_last: CtImage,
    pub x_avg: CtImage,
}

impl CtRun {
    /// Median over pixels and materials of `|x_last − phantom|`.
    pub fn median_abs_error(&self, phantom: &CtImage) -> f64 {
        let errors: Vec<f64> = self.x_last.data.iter().zip(&phantom.data).map(|(a, b)| (a - b).abs()).collect();
        ncadmm_core::diagnostics::median(&errors).unwrap_or(0.0)
    }
}

pub fn run_ct_sigma(scan: &CtScan, sigma: f64, iters: usize, newton_iters: usize, record_timing: bool) -> Result<CtRun, CtError> {
    let problem = scan.problem(sigma, newton_iters)?;
    let reference = AlphaReference::new(&problem, &scan.phantom.data)?;
    let out = problem.run(iters, Some(&reference), record_timing)?;
    Ok(CtRun {
        sigma,
        trace: out.trace,
        x_avg: scan.image(out.state.x_avg()),
        x_last: scan.image(out.state.x),
    })
}

#[derive(Debug, Clone)]
pub struct CtExperimentOutput {
    pub scan: CtScan,
    pub runs: Vec<CtRun>,
    /// `‖∇g(y*)‖ / ‖∇g(0)‖` at the true projections.
    pub fosp_ratio: f64,
}

impl CtExperimentOutput {
    /// The run with the lowest final objective.
    pub fn best_run(&self) -> Option<&CtRun> {
        self.runs.iter().min_by(|a, b| {
            let last = |r: &CtRun| r.trace.last().map(|t| t.objective).unwrap_or(f64::INFINITY);
            last(a).total_cmp(&last(b))
        })
    }
}

/// Simulates one scan and reconstructs it at every σ; runs are independent
/// and execute on the rayon pool, results in `config.sigmas` order.
pub fn run_ct_experiment(config: &CtExperimentConfig) -> Result<CtExperimentOutput, CtError> {
    let scan = CtScan::simulate(config)?;
    let problem = scan.problem(1.0, config.newton_iters)?;
    let fosp = fosp_ratio(&problem.likelihood, &problem.project(&scan.phantom.data)?)?;
    let runs = config
        .sigmas
        .par_iter()
        .map(|&s| run_ct_sigma(&scan, s, config.iters, config.newton_iters, config.record_timing))
        .collect::<Result<Vec<_>, CtError>>()?;
    Ok(CtExperimentOutput { scan, runs, fosp_ratio: fosp })
}

pub fn trace_file_name(sigma: f64) -> String {
    format!("ct_sigma{sigma:e}.csv")
}

/// Writes one trace per run, the final image of each run (a text grid and
/// a graymap per material) and the phantom.
pub fn write_outputs(output: &CtExperimentOutput, dir: &Path) -> Result<Vec<std::path::PathBuf>, CtError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut create = |name: String| -> Result<BufWriter<File>, CtError> {
        let path = dir.join(name);
        let file = File::create(&path)?;
        written.push(path);
        Ok(BufWriter::new(file))
    };
    create_image(&mut create, "ct_phantom", &output.scan.phantom)?;
    for run in &output.runs {
        write_trace(&run.trace, create(trace_file_name(run.sigma))?)?;
        create_image(&mut create, &format!("ct_sigma{:e}_image", run.sigma), &run.x_last)?;
    }
    Ok(written)
}

fn create_image(
    create: &mut impl FnMut(String) -> Result<BufWriter<File>, CtError>,
    stem: &str,
    image: &CtImage,
) -> Result<(), CtError> {
    image.write_text(create(format!("{stem}.txt"))?)?;
    for (m, name) in image.materials.iter().enumerate() {
        image.write_pgm(m, 0.0, 1.0, create(format!("{stem}_{name}.pgm"))?)?;
    }
    Ok(())
}
