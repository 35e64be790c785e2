use ncadmm_core::SparseMatrix;

use crate::error::CtError;

/// 2-D parallel-beam scan of a square-pixel grid centred at the origin.
///
/// Angle `a` is `a·π/n_angles`; ray `ℓ = a·n_detectors + j` passes through
/// the detector offset `s_j = −span/2 + (j + ½)·span/n_detectors` along the
/// normal of its direction. Pixel `k = iy·nx + ix` covers
/// `[x₀ + ix·h, x₀ + (ix+1)·h) × [y₀ + iy·h, y₀ + (iy+1)·h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtGeometry {
    pub nx: usize,
    pub ny: usize,
    /// Pixel edge length in cm.
    pub pixel_size: f64,
    pub n_angles: usize,
    pub n_detectors: usize,
    /// Detector extent in cm.
    pub detector_span: f64,
}

/// A ray `p(t) = origin + t·direction` with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: [f64; 2],
    pub direction: [f64; 2],
}

impl CtGeometry {
    /// Square grid of side `size_cm` with `n` pixels per side and the
    /// detector spanning the grid diagonal.
    pub fn square(n: usize, size_cm: f64, n_angles: usize, n_detectors: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            pixel_size: size_cm / n as f64,
            n_angles,
            n_detectors,
            detector_span: size_cm * std::f64::consts::SQRT_2,
        }
    }

    pub fn validate(&self) -> Result<(), CtError> {
        if self.nx == 0 || self.ny == 0 || self.n_angles == 0 || self.n_detectors == 0 {
            return Err(CtError::Geometry("grid and scan counts must be positive".into()));
        }
        if !(self.pixel_size > 0.0 && self.pixel_size.is_finite()) {
            return Err(CtError::Geometry(format!("pixel size {} must be positive", self.pixel_size)));
        }
        if !(self.detector_span > 0.0 && self.detector_span.is_finite()) {
            return Err(CtError::Geometry(format!("detector span {} must be positive", self.detector_span)));
        }
        Ok(())
    }

    pub fn n_pixels(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_rays(&self) -> usize {
        self.n_angles * self.n_detectors
    }

    /// Lower-left corner of the grid.
    pub fn origin(&self) -> [f64; 2] {
        [-0.5 * self.nx as f64 * self.pixel_size, -0.5 * self.ny as f64 * self.pixel_size]
    }

    /// Centre of pixel `k`.
    pub fn pixel_center(&self, k: usize) -> [f64; 2] {
        let [x0, y0] = self.origin();
        let (ix, iy) = (k % self.nx, k / self.nx);
        [x0 + (ix as f64 + 0.5) * self.pixel_size, y0 + (iy as f64 + 0.5) * self.pixel_size]
    }

    pub fn ray(&self, l: usize) -> Ray {
        let (a, j) = (l / self.n_detectors, l % self.n_detectors);
        let theta = a as f64 * std::f64::consts::PI / self.n_angles as f64;
        let (sin, cos) = theta.sin_cos();
        let s = -0.5 * self.detector_span + (j as f64 + 0.5) * self.detector_span / self.n_detectors as f64;
        Ray { origin: [-s * sin, s * cos], direction: [cos, sin] }
    }

    /// Parameter interval where `ray` lies inside the grid's bounding box.
    pub fn clip(&self, ray: &Ray) -> Option<(f64, f64)> {
        let [x0, y0] = self.origin();
        let hi = [x0 + self.nx as f64 * self.pixel_size, y0 + self.ny as f64 * self.pixel_size];
        let lo = [x0, y0];
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for axis in 0..2 {
            let (o, d) = (ray.origin[axis], ray.direction[axis]);
            if d == 0.0 {
                if o < lo[axis] || o >= hi[axis] {
                    return None;
                }
            } else {
                let (a, b) = ((lo[axis] - o) / d, (hi[axis] - o) / d);
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
        }
        (t1 > t0).then_some((t0, t1))
    }

    /// Pixel containing `p`, with half-open pixel cells.
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        let [x0, y0] = self.origin();
        let ix = ((p[0] - x0) / self.pixel_size).floor();
        let iy = ((p[1] - y0) / self.pixel_size).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.nx as f64 || iy >= self.ny as f64 {
            return None;
        }
        Some(iy as usize * self.nx + ix as usize)
    }

    /// Intersection lengths of `ray` with every pixel it crosses, sorted by pixel.
    ///
    /// The chord through the bounding box is cut at every grid-line crossing;
    /// each piece is assigned to the pixel containing its midpoint.
    pub fn trace(&self, ray: &Ray) -> Vec<(usize, f64)> {
        let Some((t0, t1)) = self.clip(ray) else {
            return Vec::new();
        };
        let [x0, y0] = self.origin();
        let mut cuts = vec![t0, t1];
        for (axis, (start, count)) in [(x0, self.nx), (y0, self.ny)].into_iter().enumerate() {
            let d = ray.direction[axis];
            if d == 0.0 {
                continue;
            }
            for i in 0..=count {
                let t = (start + i as f64 * self.pixel_size - ray.origin[axis]) / d;
                if t > t0 && t < t1 {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut lengths: Vec<(usize, f64)> = Vec::new();
        for w in cuts.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let tm = 0.5 * (w[0] + w[1]);
            let p = [ray.origin[0] + tm * ray.direction[0], ray.origin[1] + tm * ray.direction[1]];
            if let Some(k) = self.locate(p) {
                match lengths.iter_mut().find(|(kk, _)| *kk == k) {
                    Some((_, l)) => *l += len,
                    None => lengths.push((k, len)),
                }
            }
        }
        lengths.sort_by_key(|&(k, _)| k);
        lengths
    }
}

/// Projection matrix `P` (rays × pixels) of intersection lengths in cm.
/// Rays that miss the grid give empty rows.
pub fn build_projector(geometry: &CtGeometry) -> Result<SparseMatrix, CtError> {
    geometry.validate()?;
    let rows = (0..geometry.n_rays()).map(|l| geometry.trace(&geometry.ray(l))).collect();
    Ok(SparseMatrix::from_rows(geometry.n_pixels(), rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_chords() {
        let g = CtGeometry { nx: 1, ny: 1, pixel_size: 2.0, n_angles: 1, n_detectors: 1, detector_span: 1.0 };
        // Angle 0, detector offset 0: horizontal ray through the pixel centre.
        let p = build_projector(&g).unwrap();
        assert_eq!(p.get(0, 0), 2.0);

        let diag = Ray { origin: [0.0, 0.0], direction: [std::f64::consts::FRAC_1_SQRT_2; 2] };
        let row = g.trace(&diag);
        assert_eq!(row.len(), 1);
        assert!((row[0].1 - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn rays_outside_the_grid_are_empty() {
        let g = CtGeometry { nx: 2, ny: 2, pixel_size: 1.0, n_angles: 2, n_detectors: 3, detector_span: 12.0 };
        let p = build_projector(&g).unwrap();
        // Outer detectors sit at ±4 cm, beyond the grid half-diagonal.
        for l in [0, 2, 3, 5] {
            assert_eq!(p.row(l).count(), 0, "ray {l}");
        }
        assert!(p.row(1).count() > 0);
    }

    #[test]
    fn ray_along_a_grid_line_belongs_to_the_upper_row() {
        let g = CtGeometry { nx: 2, ny: 2, pixel_size: 1.0, n_angles: 1, n_detectors: 1, detector_span: 1.0 };
        let row = g.trace(&Ray { origin: [0.0, 0.0], direction: [1.0, 0.0] });
        assert_eq!(row, vec![(2, 1.0), (3, 1.0)]);
    }

    #[test]
    fn row_sums_equal_chord_lengths() {
        let g = CtGeometry::square(7, 3.0, 9, 11);
        let p = build_projector(&g).unwrap();
        let sums = p.row_sums();
        for l in 0..g.n_rays() {
            let chord = g.clip(&g.ray(l)).map(|(a, b)| b - a).unwrap_or(0.0);
            assert!((sums[l] - chord).abs() <= 1e-12 * chord.max(1.0), "ray {l}");
        }
    }
}
