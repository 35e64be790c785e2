use crate::error::CtError;

pub const DEFAULT_ATTENUATION: &str = include_str!("../data/attenuation.txt");
pub const DEFAULT_SPECTRUM: &str = include_str!("../data/spectrum.txt");

/// Whitespace-separated numeric table with a header row; `#` starts a comment.
fn parse_table(text: &str, source_name: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CtError> {
    let bad = |line: usize, message: String| CtError::Parse { source_name: source_name.to_string(), line, message };
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match &header {
            None => header = Some(fields.iter().map(|s| s.to_string()).collect()),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(bad(i + 1, format!("expected {} columns, found {}", h.len(), fields.len())));
                }
                let row = fields
                    .iter()
                    .map(|f| f.parse::<f64>().map_err(|_| bad(i + 1, format!("bad number `{f}`"))))
                    .collect::<Result<Vec<f64>, _>>()?;
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(bad(i + 1, "non-finite value".into()));
                }
                rows.push(row);
            }
        }
    }
    let header = header.ok_or_else(|| bad(0, "missing header".into()))?;
    if header.first().map(String::as_str) != Some("energy_keV") {
        return Err(bad(0, "first column must be `energy_keV`".into()));
    }
    if rows.len() < 2 {
        return Err(bad(0, "need at least two rows".into()));
    }
    for w in rows.windows(2) {
        if w[1][0] < w[0][0] {
            return Err(bad(0, "energies must be non-decreasing".into()));
        }
    }
    Ok((header, rows))
}

/// Piecewise-linear interpolation on non-decreasing knots. A repeated knot
/// is a jump: energies at or above it use the later row.
fn interpolate(knots: &[f64], values: &[f64], e: f64) -> Option<f64> {
    let n = knots.len();
    if e < knots[0] || e > knots[n - 1] {
        return None;
    }
    let j = knots.partition_point(|&k| k <= e).saturating_sub(1);
    if j + 1 >= n {
        return Some(values[n - 1]);
    }
    let (a, b) = (knots[j], knots[j + 1]);
    let t = (e - a) / (b - a);
    Some(values[j] + t * (values[j + 1] - values[j]))
}

/// Linear attenuation coefficients (1/cm) per material over tabulated energies.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationTable {
    pub energies: Vec<f64>,
    pub materials: Vec<String>,
    /// `values[m][j]`.
    pub values: Vec<Vec<f64>>,
}

impl AttenuationTable {
    /// Header `energy_keV mu_<material> ...`.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CtError> {
        let (header, rows) = parse_table(text, source_name)?;
        let mut materials = Vec::new();
        for h in &header[1..] {
            let name = h.strip_prefix("mu_").ok_or_else(|| CtError::Parse {
                source_name: source_name.to_string(),
                line: 0,
                message: format!("column `{h}` must be named mu_<material>"),
            })?;
            materials.push(name.to_string());
        }
        let energies = rows.iter().map(|r| r[0]).collect();
        let values = (0..materials.len()).map(|m| rows.iter().map(|r| r[m + 1]).collect()).collect::<Vec<Vec<f64>>>();
        if values.iter().flatten().any(|&v| v < 0.0) {
            return Err(CtError::Parse {
                source_name: source_name.to_string(),
                line: 0,
                message: "attenuation must be nonnegative".into(),
            });
        }
        Ok(Self { energies, materials, values })
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_ATTENUATION, "attenuation.txt").expect("bundled attenuation table parses")
    }

    pub fn material_index(&self, name: &str) -> Result<usize, CtError> {
        self.materials.iter().position(|m| m == name).ok_or_else(|| CtError::UnknownMaterial(name.to_string()))
    }

    pub fn at(&self, material: usize, energy: f64) -> Result<f64, CtError> {
        interpolate(&self.energies, &self.values[material], energy)
            .ok_or_else(|| CtError::Spectral(format!("energy {energy} keV outside the attenuation table")))
    }
}

/// Beam spectral density over tabulated energies (arbitrary units).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub density: Vec<f64>,
}

impl Spectrum {
    /// Header `energy_keV density`.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CtError> {
        let (header, rows) = parse_table(text, source_name)?;
        if header.len() != 2 || header[1] != "density" {
            return Err(CtError::Parse {
                source_name: source_name.to_string(),
                line: 0,
                message: "header must be `energy_keV density`".into(),
            });
        }
        let density: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        if density.iter().any(|&d| d < 0.0) {
            return Err(CtError::Parse {
                source_name: source_name.to_string(),
                line: 0,
                message: "density must be nonnegative".into(),
            });
        }
        Ok(Self { energies: rows.iter().map(|r| r[0]).collect(), density })
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_SPECTRUM, "spectrum.txt").expect("bundled spectrum parses")
    }

    pub fn at(&self, energy: f64) -> f64 {
        interpolate(&self.energies, &self.density, energy).unwrap_or(0.0)
    }
}

/// `n` uniform energy bins on `[min_kev, max_kev]`, represented by their centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub min_kev: f64,
    pub max_kev: f64,
    pub n: usize,
}

impl Default for EnergyGrid {
    fn default() -> Self {
        Self { min_kev: 20.0, max_kev: 120.0, n: 100 }
    }
}

impl EnergyGrid {
    pub fn width(&self) -> f64 {
        (self.max_kev - self.min_kev) / self.n as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.min_kev + (i as f64 + 0.5) * self.width()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    pub materials: Vec<String>,
    pub energy: EnergyGrid,
    pub n_windows: usize,
    /// Window boundaries in keV; `None` puts them at equal-count quantiles of the beam.
    pub thresholds: Option<Vec<f64>>,
    /// Logistic transition width in keV; zero gives crisp windows.
    pub blur_width_kev: f64,
    /// Total photons per ray entering the object.
    pub intensity: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            materials: vec!["pmma".into(), "aluminum".into(), "gadolinium".into()],
            energy: EnergyGrid::default(),
            n_windows: 3,
            thresholds: None,
            blur_width_kev: 4.0,
            intensity: 1e6,
        }
    }
}

/// Attenuation `μ_{mi}` and window responses `S_{wℓi} = scale_ℓ · R_{wi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub materials: Vec<String>,
    pub energies: Vec<f64>,
    /// `μ` stored energy-major: `mu[i·n_m + m]`.
    pub mu: Vec<f64>,
    /// Beam photons per energy bin; sums to the intensity.
    pub beam: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Detection probability per window, `weights[w·n_i + i]`; sums to one over `w`.
    pub window_weights: Vec<f64>,
    /// `R_{wi}` = beam × window weight, `response[w·n_i + i]`.
    pub response: Vec<f64>,
    /// `Σ_w R_{wi}`.
    pub response_total: Vec<f64>,
    /// Per-ray sensitivity scale; empty means all ones.
    pub ray_scale: Vec<f64>,
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Probability of a photon at energy `e` being counted above threshold `t`.
fn above(e: f64, t: f64, blur: f64) -> f64 {
    if blur == 0.0 {
        if e >= t {
            1.0
        } else {
            0.0
        }
    } else {
        logistic((e - t) / (blur / 4.0))
    }
}

/// Energies splitting the binned beam into `n_windows` equal-count parts,
/// interpolating the cumulative count linearly inside a bin.
fn equal_count_thresholds(grid: &EnergyGrid, beam: &[f64], n_windows: usize) -> Vec<f64> {
    let total: f64 = beam.iter().sum();
    let mut out = Vec::with_capacity(n_windows.saturating_sub(1));
    for w in 1..n_windows {
        let target = total * w as f64 / n_windows as f64;
        let mut cum = 0.0;
        for (i, &b) in beam.iter().enumerate() {
            if cum + b >= target && b > 0.0 {
                let frac = (target - cum) / b;
                out.push(grid.min_kev + (i as f64 + frac) * grid.width());
                break;
            }
            cum += b;
        }
    }
    out
}

pub fn build_spectral_model(
    config: &SpectralConfig,
    attenuation: &AttenuationTable,
    spectrum: &Spectrum,
) -> Result<SpectralModel, CtError> {
    if config.energy.n == 0 || !(config.energy.max_kev > config.energy.min_kev) {
        return Err(CtError::Spectral("energy grid must have positive width and bin count".into()));
    }
    if config.n_windows == 0 {
        return Err(CtError::Spectral("need at least one energy window".into()));
    }
    if !(config.intensity > 0.0 && config.intensity.is_finite()) {
        return Err(CtError::Spectral(format!("intensity {} must be positive", config.intensity)));
    }
    if !(config.blur_width_kev >= 0.0 && config.blur_width_kev.is_finite()) {
        return Err(CtError::Spectral(format!("blur width {} must be nonnegative", config.blur_width_kev)));
    }
    if config.materials.is_empty() {
        return Err(CtError::Spectral("need at least one material".into()));
    }
    let energies = config.energy.centers();
    let n_i = energies.len();
    let n_m = config.materials.len();

    let columns = config
        .materials
        .iter()
        .map(|m| attenuation.material_index(m))
        .collect::<Result<Vec<usize>, CtError>>()?;
    let mut mu = vec![0.0; n_i * n_m];
    for (i, &e) in energies.iter().enumerate() {
        for (m, &col) in columns.iter().enumerate() {
            mu[i * n_m + m] = attenuation.at(col, e)?;
        }
    }

    let raw: Vec<f64> = energies.iter().map(|&e| spectrum.at(e)).collect();
    let raw_total: f64 = raw.iter().sum();
    if !(raw_total > 0.0) {
        return Err(CtError::Spectral("beam spectrum has no photons on the energy grid".into()));
    }
    let beam: Vec<f64> = raw.iter().map(|r| r * config.intensity / raw_total).collect();

    let thresholds = match &config.thresholds {
        Some(t) => t.clone(),
        None => equal_count_thresholds(&config.energy, &beam, config.n_windows),
    };
    let increasing = thresholds.windows(2).all(|w| w[1] > w[0]);
    let inside = thresholds.iter().all(|&t| t > config.energy.min_kev && t < config.energy.max_kev);
    if thresholds.len() + 1 != config.n_windows || !increasing || !inside {
        return Err(CtError::Thresholds(thresholds));
    }

    let n_w = config.n_windows;
    let mut window_weights = vec![0.0; n_w * n_i];
    for (i, &e) in energies.iter().enumerate() {
        let mut assigned = 0.0;
        for w in 0..n_w - 1 {
            let lower = if w == 0 { 1.0 } else { above(e, thresholds[w - 1], config.blur_width_kev) };
            let weight = lower - above(e, thresholds[w], config.blur_width_kev);
            window_weights[w * n_i + i] = weight;
            assigned += weight;
        }
        window_weights[(n_w - 1) * n_i + i] = 1.0 - assigned;
    }
    let response: Vec<f64> = window_weights.iter().enumerate().map(|(idx, wgt)| wgt * beam[idx % n_i]).collect();
    let response_total = (0..n_i).map(|i| (0..n_w).map(|w| response[w * n_i + i]).sum()).collect();

    Ok(SpectralModel {
        materials: config.materials.clone(),
        energies,
        mu,
        beam,
        thresholds,
        window_weights,
        response,
        response_total,
        ray_scale: Vec::new(),
    })
}

impl SpectralModel {
    pub fn n_materials(&self) -> usize {
        self.materials.len()
    }

    pub fn n_energies(&self) -> usize {
        self.energies.len()
    }

    pub fn n_windows(&self) -> usize {
        self.window_weights.len() / self.energies.len()
    }

    pub fn mu(&self, m: usize, i: usize) -> f64 {
        self.mu[i * self.n_materials() + m]
    }

    pub fn scale(&self, ray: usize) -> f64 {
        self.ray_scale.get(ray).copied().unwrap_or(1.0)
    }

    /// `S_{wℓi}`.
    pub fn response_at(&self, w: usize, ray: usize, i: usize) -> f64 {
        self.scale(ray) * self.response[w * self.n_energies() + i]
    }

    /// Replaces the per-ray scale, one entry per ray of the full scan.
    pub fn with_ray_scale(mut self, scale: Vec<f64>) -> Result<Self, CtError> {
        if scale.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return Err(CtError::Spectral("ray scales must be finite and nonnegative".into()));
        }
        self.ray_scale = scale;
        Ok(self)
    }
}
