//! Experiment configuration files.
//!
//! A config is TOML with an `[experiment]` table and one problem table named
//! after the experiment kind. Every key is optional except the kind (which a
//! command-line flag may supply instead) and the custom problem's inputs.
//! Unknown keys are rejected.
//!
//! ```toml
//! [experiment]
//! kind = "quantile"        # quantile | ct | custom
//! sigmas = [5e-5, 1e-4, 2e-4, 5e-4]
//! iters = 500
//! seed = 0
//! output = "out/quantile"
//! workers = 4
//! record_timing = true
//!
//! [quantile]
//! d = 2000
//! n = 1000
//! s_star = 10
//! q = 0.5
//! lambda = 0.1
//! beta = 0.5               # inf gives the plain l1 penalty
//! radius = inf             # l2-ball constraint, inf disables it
//! noise_df = 5.0           # Student-t degrees of freedom, inf gives Gaussian noise
//! ```
//!
//! The `[ct]` table takes `grid`, `size_cm`, `n_angles`, `n_detectors`,
//! `detector_span`, `materials`, `energy_min_kev`, `energy_max_kev`,
//! `energy_bins`, `n_windows`, `thresholds_kev`, `blur_kev`, `intensity`,
//! `newton_iters` and the optional data files `attenuation_file`,
//! `spectrum_file` and `phantom_file`. The `[custom]` table describes a LASSO
//! problem `λ‖x‖₁ + ½‖Mx − w‖²` through `matrix` (sparse text format),
//! `target` (whitespace-separated numbers) and `lambda`.
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ncadmm_core::SparseMatrix;
use ncadmm_ct::{
    build_spectral_model, AttenuationTable, CtExperimentConfig, CtGeometry, CtImage, EnergyGrid, SpectralConfig,
    Spectrum,
};
use ncadmm_quantile::{Noise, QuantileSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable that forces one worker and zeroed timings, so that
/// repeated runs write byte-identical files.
pub const DETERMINISTIC_ENV: &str = "NCADMM_DETERMINISTIC";

pub const DEFAULT_OUTPUT: &str = "ncadmm-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Quantile,
    Ct,
    Custom,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Quantile => "quantile",
            Kind::Ct => "ct",
            Kind::Custom => "custom",
        }
    }

    fn default_sigmas(self) -> Vec<f64> {
        match self {
            Kind::Quantile => ncadmm_quantile::FIGURE2_SIGMAS.to_vec(),
            Kind::Ct => ncadmm_ct::experiment::DEFAULT_SIGMAS.to_vec(),
            Kind::Custom => vec![1.0],
        }
    }

    fn default_iters(self) -> usize {
        match self {
            Kind::Quantile => 500,
            Kind::Ct => 1000,
            Kind::Custom => 2000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile: Option<QuantileSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ct: Option<CtSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_timing: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantileSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_df: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_cm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_angles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_detectors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector_span: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub materials: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_min_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_max_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_windows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds_kev: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blur_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attenuation_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phantom_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kind: Option<Kind>,
    pub sigmas: Vec<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{source_name}: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) {
        let e = &mut self.experiment;
        if o.kind.is_some() {
            e.kind = o.kind;
        }
        if !o.sigmas.is_empty() {
            e.sigmas = Some(o.sigmas.clone());
        }
        e.iters = o.iters.or(e.iters);
        e.seed = o.seed.or(e.seed);
        e.output = o.output.clone().or(e.output.take());
        e.workers = o.workers.or(e.workers);
    }
}

pub fn deterministic_mode() -> bool {
    std::env::var(DETERMINISTIC_ENV).is_ok_and(|v| !v.is_empty() && v != "0")
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub kind: Kind,
    pub sigmas: Vec<f64>,
    pub iters: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub workers: usize,
    pub record_timing: bool,
    pub problem: Problem,
    /// The same configuration as an explicit file, used for the manifest.
    pub echo: ConfigFile,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Quantile(QuantileSpec),
    Ct(Box<CtExperimentConfig>),
    Custom(CustomProblem),
}

#[derive(Debug, Clone)]
pub struct CustomProblem {
    pub matrix: Arc<SparseMatrix>,
    pub target: Vec<f64>,
    pub lambda: f64,
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn positive_finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("{v} must be positive and finite")))
    }
}

fn at_least_one(field: &str, v: usize) -> Result<usize, CliError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(CliError::config(field, "must be at least 1"))
    }
}

impl ResolvedConfig {
    /// Fills defaults and validates. `base` anchors relative paths.
    pub fn resolve(file: &ConfigFile, base: &Path, deterministic: bool) -> Result<Self, CliError> {
        let e = &file.experiment;
        let kind = e.kind.ok_or_else(|| CliError::config("experiment.kind", "missing (quantile, ct or custom)"))?;
        let sigmas = e.sigmas.clone().unwrap_or_else(|| kind.default_sigmas());
        if sigmas.is_empty() {
            return Err(CliError::config("experiment.sigmas", "list is empty"));
        }
        for &s in &sigmas {
            positive_finite("experiment.sigmas", s)?;
        }
        let iters = at_least_one("experiment.iters", e.iters.unwrap_or(kind.default_iters()))?;
        let seed = e.seed.unwrap_or(0);
        let output = absolute(base, e.output.as_deref().unwrap_or(Path::new(DEFAULT_OUTPUT)));
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut workers = at_least_one("experiment.workers", e.workers.unwrap_or(default_workers))?;
        let mut record_timing = e.record_timing.unwrap_or(true);
        if deterministic {
            workers = 1;
            record_timing = false;
        }
        let mut echo = ConfigFile {
            experiment: ExperimentSection {
                kind: Some(kind),
                sigmas: Some(sigmas.clone()),
                iters: Some(iters),
                seed: Some(seed),
                output: Some(output.clone()),
                workers: Some(workers),
                record_timing: Some(record_timing),
            },
            ..Default::default()
        };
        let foreign = [
            (Kind::Quantile, file.quantile.is_some()),
            (Kind::Ct, file.ct.is_some()),
            (Kind::Custom, file.custom.is_some()),
        ];
        if let Some((other, _)) = foreign.iter().find(|(k, present)| *present && *k != kind) {
            return Err(CliError::config(
                other.name(),
                format!("section does not apply to a {} experiment", kind.name()),
            ));
        }
        let problem = match kind {
            Kind::Quantile => {
                let (spec, section) = resolve_quantile(file.quantile.clone().unwrap_or_default(), &sigmas, seed)?;
                echo.quantile = Some(section);
                Problem::Quantile(spec)
            }
            Kind::Ct => {
                let (config, section) =
                    resolve_ct(file.ct.clone().unwrap_or_default(), base, &sigmas, iters, seed, record_timing)?;
                echo.ct = Some(section);
                Problem::Ct(Box::new(config))
            }
            Kind::Custom => {
                let section = file.custom.clone().ok_or_else(|| CliError::config("custom", "section is missing"))?;
                let (problem, section) = resolve_custom(section, base)?;
                echo.custom = Some(section);
                Problem::Custom(problem)
            }
        };
        Ok(Self { kind, sigmas, iters, seed, output, workers, record_timing, problem, echo })
    }
}

fn resolve_quantile(s: QuantileSection, sigmas: &[f64], seed: u64) -> Result<(QuantileSpec, QuantileSection), CliError> {
    let def = QuantileSpec::default();
    let noise_df = s.noise_df.unwrap_or(5.0);
    let spec = QuantileSpec {
        d: s.d.unwrap_or(def.d),
        n: s.n.unwrap_or(def.n),
        s_star: s.s_star.unwrap_or(def.s_star),
        q: s.q.unwrap_or(def.q),
        lambda: s.lambda.unwrap_or(def.lambda),
        beta: s.beta.unwrap_or(def.beta),
        radius: s.radius.unwrap_or(def.radius),
        sigma: sigmas[0],
        noise: Noise::from_df(noise_df),
        seed,
    };
    spec.validate()?;
    let section = QuantileSection {
        d: Some(spec.d),
        n: Some(spec.n),
        s_star: Some(spec.s_star),
        q: Some(spec.q),
        lambda: Some(spec.lambda),
        beta: Some(spec.beta),
        radius: Some(spec.radius),
        noise_df: Some(noise_df),
    };
    Ok((spec, section))
}

fn read_file(field: &str, path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(field, format!("{}: {e}", path.display())))
}

fn resolve_ct(
    s: CtSection,
    base: &Path,
    sigmas: &[f64],
    iters: usize,
    seed: u64,
    record_timing: bool,
) -> Result<(CtExperimentConfig, CtSection), CliError> {
    let def = CtExperimentConfig::default();
    let grid = at_least_one("ct.grid", s.grid.unwrap_or(def.geometry.nx))?;
    let size_cm = positive_finite("ct.size_cm", s.size_cm.unwrap_or(def.geometry.nx as f64 * def.geometry.pixel_size))?;
    let n_angles = at_least_one("ct.n_angles", s.n_angles.unwrap_or(def.geometry.n_angles))?;
    let n_detectors = at_least_one("ct.n_detectors", s.n_detectors.unwrap_or(def.geometry.n_detectors))?;
    let mut geometry = CtGeometry::square(grid, size_cm, n_angles, n_detectors);
    if let Some(span) = s.detector_span {
        geometry.detector_span = positive_finite("ct.detector_span", span)?;
    }
    let sd = &def.spectral;
    let spectral = SpectralConfig {
        materials: s.materials.clone().unwrap_or_else(|| sd.materials.clone()),
        energy: EnergyGrid {
            min_kev: s.energy_min_kev.unwrap_or(sd.energy.min_kev),
            max_kev: s.energy_max_kev.unwrap_or(sd.energy.max_kev),
            n: at_least_one("ct.energy_bins", s.energy_bins.unwrap_or(sd.energy.n))?,
        },
        n_windows: at_least_one("ct.n_windows", s.n_windows.unwrap_or(sd.n_windows))?,
        thresholds: s.thresholds_kev.clone(),
        blur_width_kev: s.blur_kev.unwrap_or(sd.blur_width_kev),
        intensity: positive_finite("ct.intensity", s.intensity.unwrap_or(sd.intensity))?,
    };
    if spectral.materials.is_empty() {
        return Err(CliError::config("ct.materials", "list is empty"));
    }
    if !(spectral.blur_width_kev >= 0.0 && spectral.blur_width_kev.is_finite()) {
        return Err(CliError::config("ct.blur_kev", format!("{} must be nonnegative", spectral.blur_width_kev)));
    }
    let newton_iters = at_least_one("ct.newton_iters", s.newton_iters.unwrap_or(def.newton_iters))?;
    let attenuation_file = s.attenuation_file.as_deref().map(|p| absolute(base, p));
    let attenuation = match &attenuation_file {
        Some(p) => AttenuationTable::parse(&read_file("ct.attenuation_file", p)?, &p.display().to_string())
            .map_err(|e| CliError::config("ct.attenuation_file", e))?,
        None => AttenuationTable::bundled(),
    };
    let spectrum_file = s.spectrum_file.as_deref().map(|p| absolute(base, p));
    let spectrum = match &spectrum_file {
        Some(p) => Spectrum::parse(&read_file("ct.spectrum_file", p)?, &p.display().to_string())
            .map_err(|e| CliError::config("ct.spectrum_file", e))?,
        None => Spectrum::bundled(),
    };
    let phantom_file = s.phantom_file.as_deref().map(|p| absolute(base, p));
    let phantom = match &phantom_file {
        Some(p) => {
            let text = read_file("ct.phantom_file", p)?;
            let image = CtImage::read_text(text.as_bytes(), &p.display().to_string())
                .map_err(|e| CliError::config("ct.phantom_file", e))?;
            image.check_matches(&geometry, spectral.materials.len()).map_err(|e| CliError::config("ct.phantom_file", e))?;
            if image.materials != spectral.materials {
                return Err(CliError::config(
                    "ct.phantom_file",
                    format!("materials {:?} differ from ct.materials {:?}", image.materials, spectral.materials),
                ));
            }
            Some(image)
        }
        None => None,
    };
    geometry.validate()?;
    build_spectral_model(&spectral, &attenuation, &spectrum)?;
    let section = CtSection {
        grid: Some(grid),
        size_cm: Some(size_cm),
        n_angles: Some(n_angles),
        n_detectors: Some(n_detectors),
        detector_span: Some(geometry.detector_span),
        materials: Some(spectral.materials.clone()),
        energy_min_kev: Some(spectral.energy.min_kev),
        energy_max_kev: Some(spectral.energy.max_kev),
        energy_bins: Some(spectral.energy.n),
        n_windows: Some(spectral.n_windows),
        thresholds_kev: spectral.thresholds.clone(),
        blur_kev: Some(spectral.blur_width_kev),
        intensity: Some(spectral.intensity),
        newton_iters: Some(newton_iters),
        attenuation_file,
        spectrum_file,
        phantom_file,
    };
    let config = CtExperimentConfig {
        geometry,
        spectral,
        attenuation,
        spectrum,
        phantom,
        sigmas: sigmas.to_vec(),
        iters,
        seed,
        newton_iters,
        record_timing,
    };
    Ok((config, section))
}

/// Whitespace-separated numbers; `#` starts a comment.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| format!("line {}: `{token}` is not a number", i + 1))?;
            if !v.is_finite() {
                return Err(format!("line {}: non-finite value {v}", i + 1));
            }
            out.push(v);
        }
    }
    Ok(out)
}

fn resolve_custom(s: CustomSection, base: &Path) -> Result<(CustomProblem, CustomSection), CliError> {
    let matrix_path = absolute(base, s.matrix.as_deref().ok_or_else(|| CliError::config("custom.matrix", "missing"))?);
    let target_path = absolute(base, s.target.as_deref().ok_or_else(|| CliError::config("custom.target", "missing"))?);
    let lambda = positive_finite("custom.lambda", s.lambda.ok_or_else(|| CliError::config("custom.lambda", "missing"))?)?;
    let text = read_file("custom.matrix", &matrix_path)?;
    let matrix = SparseMatrix::read_text(text.as_bytes())
        .map_err(|e| CliError::config("custom.matrix", format!("{}: {e}", matrix_path.display())))?;
    let target = parse_vector(&read_file("custom.target", &target_path)?)
        .map_err(|e| CliError::config("custom.target", format!("{}: {e}", target_path.display())))?;
    if target.len() != matrix.rows() {
        return Err(CliError::config(
            "custom.target",
            format!("has {} entries but the matrix has {} rows", target.len(), matrix.rows()),
        ));
    }
    if matrix.cols() == 0 {
        return Err(CliError::config("custom.matrix", "matrix has no columns"));
    }
    let section = CustomSection { matrix: Some(matrix_path), target: Some(target_path), lambda: Some(lambda) };
    Ok((CustomProblem { matrix: Arc::new(matrix), target, lambda }, section))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<ResolvedConfig, CliError> {
        ResolvedConfig::resolve(&ConfigFile::parse(text, "test")?, Path::new("/base"), false)
    }

    fn config_message(result: Result<ResolvedConfig, CliError>) -> String {
        match result {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_follow_the_kind() {
        let q = resolve("[experiment]\nkind = \"quantile\"\n").unwrap();
        assert_eq!(q.sigmas, vec![5e-5, 1e-4, 2e-4, 5e-4]);
        assert_eq!(q.iters, 500);
        assert_eq!(q.output, Path::new("/base").join(DEFAULT_OUTPUT));
        let Problem::Quantile(spec) = &q.problem else { panic!() };
        assert_eq!((spec.d, spec.n, spec.q), (2000, 1000, 0.5));
        let ct = resolve("[experiment]\nkind = \"ct\"\n").unwrap();
        assert_eq!((ct.sigmas.clone(), ct.iters), (vec![1.0, 10.0, 100.0], 1000));
        let Problem::Ct(c) = &ct.problem else { panic!() };
        assert_eq!(c.geometry, CtGeometry::square(25, 10.0, 50, 50));
    }

    #[test]
    fn errors_name_the_field() {
        assert!(config_message(resolve("[experiment]\nkind = \"quantile\"\n[quantile]\nq = 1.5\n")).starts_with("quantile.q:"));
        assert!(config_message(resolve("[experiment]\nkind = \"quantile\"\nsigmas = [-1.0]\n"))
            .starts_with("experiment.sigmas:"));
        assert!(config_message(resolve("[experiment]\nkind = \"quantile\"\n[quantile]\nnoise_df = 0.0\n"))
            .starts_with("quantile.noise_df:"));
        assert!(config_message(resolve("[experiment]\nkind = \"ct\"\n[ct]\nnewton_iters = 0\n")).starts_with("ct.newton_iters:"));
        assert!(config_message(resolve("[experiment]\nkind = \"ct\"\n[ct]\nmaterials = [\"pmma\", \"kryptonite\"]\n"))
            .contains("kryptonite"));
        assert!(config_message(resolve("[experiment]\n")).starts_with("experiment.kind:"));
        assert!(config_message(resolve("[experiment]\nkind = \"custom\"\n")).starts_with("custom:"));
        assert!(config_message(resolve("[experiment]\nkind = \"ct\"\n[quantile]\nq = 0.5\n")).starts_with("quantile:"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let m = config_message(resolve("[experiment]\nkind = \"quantile\"\n[quantile]\nlamda = 0.1\n"));
        assert!(m.contains("lamda"), "{m}");
        assert!(config_message(resolve("[experiment]\nkind = \"quantile\"\nsigma = 1.0\n")).contains("sigma"));
        assert!(config_message(resolve("[experment]\n")).contains("experment"));
    }

    #[test]
    fn infinite_parameters_round_trip() {
        let r = resolve("[experiment]\nkind = \"quantile\"\n[quantile]\nbeta = inf\nnoise_df = inf\n").unwrap();
        let Problem::Quantile(spec) = &r.problem else { panic!() };
        assert!(spec.beta.is_infinite());
        assert_eq!(spec.noise, Noise::Gaussian);
        let text = toml::to_string(&r.echo).unwrap();
        let again = ConfigFile::parse(&text, "echo").unwrap();
        assert_eq!(again, r.echo);
    }

    #[test]
    fn overrides_take_precedence() {
        let mut file = ConfigFile::parse("[experiment]\nkind = \"ct\"\niters = 7\nseed = 3\n", "t").unwrap();
        file.apply(&Overrides { sigmas: vec![10.0], iters: Some(50), ..Default::default() });
        let r = ResolvedConfig::resolve(&file, Path::new("/"), true).unwrap();
        assert_eq!((r.sigmas.clone(), r.iters, r.seed), (vec![10.0], 50, 3));
        assert_eq!((r.workers, r.record_timing), (1, false));
    }

    #[test]
    fn vectors_parse_with_comments() {
        assert_eq!(parse_vector("# w\n1 2.5\n-3e-1 # tail\n"), Ok(vec![1.0, 2.5, -0.3]));
        assert!(parse_vector("1 x").is_err());
        assert!(parse_vector("inf").is_err());
    }
}
