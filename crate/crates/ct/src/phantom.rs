use std::io::{BufRead, Write};

use crate::error::CtError;
use crate::geometry::CtGeometry;

/// Material densities per pixel, stored pixel-major: `data[k·n_m + m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtImage {
    pub nx: usize,
    pub ny: usize,
    pub materials: Vec<String>,
    pub data: Vec<f64>,
}

impl CtImage {
    pub fn zeros(nx: usize, ny: usize, materials: Vec<String>) -> Self {
        let n = nx * ny * materials.len();
        Self { nx, ny, materials, data: vec![0.0; n] }
    }

    pub fn from_data(nx: usize, ny: usize, materials: Vec<String>, data: Vec<f64>) -> Result<Self, CtError> {
        let expected = nx * ny * materials.len();
        if data.len() != expected {
            return Err(CtError::Dimension { what: "image data", expected, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CtError::Spectral("image contains non-finite values".into()));
        }
        Ok(Self { nx, ny, materials, data })
    }

    pub fn n_pixels(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_materials(&self) -> usize {
        self.materials.len()
    }

    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.data[k * self.n_materials() + m]
    }

    /// One material as a pixel vector.
    pub fn channel(&self, m: usize) -> Vec<f64> {
        (0..self.n_pixels()).map(|k| self.get(k, m)).collect()
    }

    pub fn check_matches(&self, geometry: &CtGeometry, n_materials: usize) -> Result<(), CtError> {
        if self.nx != geometry.nx || self.ny != geometry.ny {
            return Err(CtError::Dimension { what: "image pixels", expected: geometry.n_pixels(), got: self.n_pixels() });
        }
        if self.n_materials() != n_materials {
            return Err(CtError::Dimension { what: "image materials", expected: n_materials, got: self.n_materials() });
        }
        Ok(())
    }

    /// Text format: a `phantom <nx> <ny> <n_materials>` line, then per
    /// material a `material <name>` line followed by `ny` rows of `nx` values,
    /// bottom row first.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "phantom {} {} {}", self.nx, self.ny, self.n_materials())?;
        for (m, name) in self.materials.iter().enumerate() {
            writeln!(out, "material {name}")?;
            write_grid(&mut out, self.nx, self.ny, |k| self.get(k, m))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R, source_name: &str) -> Result<Self, CtError> {
        let bad = |line: usize, message: String| CtError::Parse { source_name: source_name.to_string(), line, message };
        let mut lines = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim().to_string();
            if !content.is_empty() {
                lines.push((i + 1, content));
            }
        }
        let mut it = lines.into_iter();
        let (lineno, header) = it.next().ok_or_else(|| bad(1, "empty phantom file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "phantom" {
            return Err(bad(lineno, "expected `phantom <nx> <ny> <n_materials>`".into()));
        }
        let parse_count = |s: &str| s.parse::<usize>().map_err(|_| bad(lineno, format!("bad count `{s}`")));
        let (nx, ny, n_m) = (parse_count(fields[1])?, parse_count(fields[2])?, parse_count(fields[3])?);
        if nx == 0 || ny == 0 || n_m == 0 {
            return Err(bad(lineno, "dimensions must be positive".into()));
        }
        let mut materials = Vec::with_capacity(n_m);
        let mut data = vec![0.0; nx * ny * n_m];
        for m in 0..n_m {
            let (lineno, line) = it.next().ok_or_else(|| bad(0, format!("missing block for material {m}")))?;
            let name = line
                .strip_prefix("material")
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| bad(lineno, "expected `material <name>`".into()))?;
            materials.push(name.to_string());
            for iy in 0..ny {
                let (lineno, line) = it.next().ok_or_else(|| bad(0, format!("material `{name}` has too few rows")))?;
                let values: Vec<&str> = line.split_whitespace().collect();
                if values.len() != nx {
                    return Err(bad(lineno, format!("expected {nx} values, found {}", values.len())));
                }
                for (ix, v) in values.iter().enumerate() {
                    let v: f64 = v.parse().map_err(|_| bad(lineno, format!("bad number `{v}`")))?;
                    if !v.is_finite() {
                        return Err(bad(lineno, "non-finite value".into()));
                    }
                    data[(iy * nx + ix) * n_m + m] = v;
                }
            }
        }
        if let Some((lineno, _)) = it.next() {
            return Err(bad(lineno, "trailing content after the last material".into()));
        }
        Ok(Self { nx, ny, materials, data })
    }

    /// Binary graymap of one material, linearly mapped from `[lo, hi]` to
    /// `0..=255`, top row first.
    pub fn write_pgm<W: Write>(&self, m: usize, lo: f64, hi: f64, mut out: W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.nx, self.ny)?;
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut bytes = Vec::with_capacity(self.n_pixels());
        for iy in (0..self.ny).rev() {
            for ix in 0..self.nx {
                let v = ((self.get(iy * self.nx + ix, m) - lo) / span).clamp(0.0, 1.0);
                bytes.push((v * 255.0).round() as u8);
            }
        }
        out.write_all(&bytes)
    }
}

/// Writes `ny` rows of `nx` values, bottom row first.
pub fn write_grid<W: Write>(out: &mut W, nx: usize, ny: usize, value: impl Fn(usize) -> f64) -> std::io::Result<()> {
    for iy in 0..ny {
        let row: Vec<String> = (0..nx).map(|ix| format!("{}", value(iy * nx + ix))).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// A disc of one material, in cm relative to the grid centre.
#[derive(Debug, Clone, PartialEq)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
    pub material: usize,
    pub density: f64,
}

/// Rasterizes discs by pixel centre; later discs replace earlier ones.
pub fn rasterize(geometry: &CtGeometry, materials: Vec<String>, discs: &[Disc]) -> CtImage {
    let mut image = CtImage::zeros(geometry.nx, geometry.ny, materials);
    let n_m = image.n_materials();
    for k in 0..geometry.n_pixels() {
        let [cx, cy] = geometry.pixel_center(k);
        for disc in discs {
            let (dx, dy) = (cx - disc.center[0], cy - disc.center[1]);
            if dx * dx + dy * dy <= disc.radius * disc.radius {
                image.data[k * n_m..(k + 1) * n_m].fill(0.0);
                image.data[k * n_m + disc.material] = disc.density;
            }
        }
    }
    image
}

/// Cylinder of the first material with one insert of each other material,
/// spaced evenly on a ring. Extents scale with the grid width.
pub fn default_phantom(geometry: &CtGeometry, materials: &[String]) -> CtImage {
    let width = geometry.nx.min(geometry.ny) as f64 * geometry.pixel_size;
    let mut discs = vec![Disc { center: [0.0, 0.0], radius: 0.45 * width, material: 0, density: 1.0 }];
    let inserts = materials.len().saturating_sub(1);
    for m in 1..materials.len() {
        let angle = std::f64::consts::PI * (1.0 - 2.0 * (m - 1) as f64 / inserts as f64);
        let ring = 0.2 * width;
        discs.push(Disc {
            center: [ring * angle.cos(), ring * angle.sin()],
            radius: 0.12 * width,
            material: m,
            density: 1.0,
        });
    }
    rasterize(geometry, materials.to_vec(), &discs)
}
