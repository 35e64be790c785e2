use ncadmm_core::prox::{qexp, Qexp};
use ncadmm_core::SparseMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::CtError;
use crate::phantom::CtImage;
use crate::spectral::SpectralModel;

/// Photon counts `C_{wℓ}`, stored window-major: `counts[w·n_rays + ℓ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountData {
    pub n_windows: usize,
    pub n_rays: usize,
    pub counts: Vec<u64>,
}

impl CountData {
    pub fn get(&self, w: usize, ray: usize) -> u64 {
        self.counts[w * self.n_rays + ray]
    }

    /// Counts of one ray across windows, as floats.
    pub fn ray(&self, ray: usize) -> Vec<f64> {
        (0..self.n_windows).map(|w| self.get(w, ray) as f64).collect()
    }
}

/// `Px` applied per material; `y[ℓ·n_m + m]`.
pub fn project(projector: &SparseMatrix, image: &CtImage) -> Result<Vec<f64>, CtError> {
    Ok(projector.mul_block(&image.data, image.n_materials())?)
}

/// `Σ_i S_{wℓi} exp{−Σ_m μ_{mi} y_{ℓm}}`, window-major.
pub fn expected_counts(model: &SpectralModel, y: &[f64]) -> Result<Vec<f64>, CtError> {
    let n_m = model.n_materials();
    if !y.len().is_multiple_of(n_m) {
        return Err(CtError::Dimension { what: "projections", expected: n_m, got: y.len() % n_m });
    }
    let n_rays = y.len() / n_m;
    let n_i = model.n_energies();
    let n_w = model.n_windows();
    let per_ray: Vec<Vec<f64>> = (0..n_rays)
        .into_par_iter()
        .map(|l| {
            let yl = &y[l * n_m..(l + 1) * n_m];
            let mut means = vec![0.0; n_w];
            for i in 0..n_i {
                let mu = &model.mu[i * n_m..(i + 1) * n_m];
                let t: f64 = mu.iter().zip(yl).map(|(a, b)| a * b).sum();
                let transmitted = (-t).exp();
                for (w, mean) in means.iter_mut().enumerate() {
                    *mean += model.response[w * n_i + i] * transmitted;
                }
            }
            let s = model.scale(l);
            means.iter().map(|m| s * m).collect()
        })
        .collect();
    let mut out = vec![0.0; n_w * n_rays];
    for (l, means) in per_ray.iter().enumerate() {
        for (w, &m) in means.iter().enumerate() {
            out[w * n_rays + l] = m;
        }
    }
    Ok(out)
}

/// Independent Poisson draws with the given means (window-major, `n_rays` per window).
pub fn sample_counts(means: &[f64], n_rays: usize, seed: u64) -> Result<CountData, CtError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(means.len());
    for (idx, &mean) in means.iter().enumerate() {
        let bad = || CtError::BadMean { window: idx / n_rays, ray: idx % n_rays, mean };
        if mean == 0.0 {
            counts.push(0);
            continue;
        }
        let dist = Poisson::new(mean).map_err(|_| bad())?;
        counts.push(dist.sample(&mut rng) as u64);
    }
    Ok(CountData { n_windows: means.len() / n_rays.max(1), n_rays, counts })
}

pub fn forward_counts(
    model: &SpectralModel,
    projector: &SparseMatrix,
    image: &CtImage,
    seed: u64,
) -> Result<CountData, CtError> {
    if image.n_materials() != model.n_materials() {
        return Err(CtError::Dimension {
            what: "image materials",
            expected: model.n_materials(),
            got: image.n_materials(),
        });
    }
    if image.n_pixels() != projector.cols() {
        return Err(CtError::Dimension { what: "image pixels", expected: projector.cols(), got: image.n_pixels() });
    }
    let y = project(projector, image)?;
    let means = expected_counts(model, &y)?;
    sample_counts(&means, projector.rows(), seed)
}

/// `exp` with its derivatives, in place of `qexp` for exact-model comparisons.
pub fn exact_exp(t: f64) -> Qexp {
    let e = t.exp();
    Qexp { value: e, d1: e, d2: e }
}

/// Evaluates the convex part of one ray's loss,
/// `g_{c,ℓ}(v) = s_ℓ Σ_i B_i qexp{−⟨μ_i, v⟩}` with `B_i = Σ_w R_{wi}`,
/// writing its gradient and row-major Hessian.
pub fn ray_convex_part(model: &SpectralModel, scale: f64, v: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
    ray_convex_part_with(model, scale, v, grad, hess, qexp)
}

pub fn ray_convex_part_with(
    model: &SpectralModel,
    scale: f64,
    v: &[f64],
    grad: &mut [f64],
    hess: &mut [f64],
    transmission: impl Fn(f64) -> Qexp,
) -> f64 {
    let n_m = v.len();
    grad.fill(0.0);
    hess.fill(0.0);
    let mut value = 0.0;
    for (i, &b) in model.response_total.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let mu = &model.mu[i * n_m..(i + 1) * n_m];
        let t: f64 = mu.iter().zip(v).map(|(a, b)| a * b).sum();
        let q = transmission(-t);
        value += b * q.value;
        for m in 0..n_m {
            grad[m] -= b * q.d1 * mu[m];
            let row = b * q.d2 * mu[m];
            for c in m..n_m {
                hess[m * n_m + c] += row * mu[c];
            }
        }
    }
    grad.iter_mut().for_each(|g| *g *= scale);
    for m in 0..n_m {
        for c in m..n_m {
            hess[m * n_m + c] *= scale;
            hess[c * n_m + m] = hess[m * n_m + c];
        }
    }
    scale * value
}

/// Evaluates the concave part of one ray's loss,
/// `g_{d,ℓ}(v) = −Σ_w C_w log M_w(v)` with `M_w = s_ℓ Σ_i R_{wi} qexp{−⟨μ_i, v⟩}`,
/// writing its gradient. Windows with zero counts contribute nothing. On a
/// nonpositive mean with positive counts, returns the offending window.
pub fn ray_concave_part(
    model: &SpectralModel,
    scale: f64,
    v: &[f64],
    counts: &[f64],
    grad: &mut [f64],
) -> Result<f64, (usize, f64)> {
    ray_concave_part_with(model, scale, v, counts, grad, qexp)
}

pub fn ray_concave_part_with(
    model: &SpectralModel,
    scale: f64,
    v: &[f64],
    counts: &[f64],
    grad: &mut [f64],
    transmission: impl Fn(f64) -> Qexp,
) -> Result<f64, (usize, f64)> {
    let n_m = v.len();
    let n_i = model.n_energies();
    let n_w = counts.len();
    let mut means = vec![0.0; n_w];
    let mut dmeans = vec![0.0; n_w * n_m];
    for i in 0..n_i {
        let mu = &model.mu[i * n_m..(i + 1) * n_m];
        let t: f64 = mu.iter().zip(v).map(|(a, b)| a * b).sum();
        let q = transmission(-t);
        for w in 0..n_w {
            let r = model.response[w * n_i + i];
            if r == 0.0 {
                continue;
            }
            means[w] += r * q.value;
            for m in 0..n_m {
                dmeans[w * n_m + m] -= r * q.d1 * mu[m];
            }
        }
    }
    grad.fill(0.0);
    let mut value = 0.0;
    for w in 0..n_w {
        if counts[w] == 0.0 {
            continue;
        }
        let mean = scale * means[w];
        if !(mean > 0.0) {
            return Err((w, mean));
        }
        value -= counts[w] * mean.ln();
        // d/dv log(s·M) = dM / M; the scale cancels.
        for m in 0..n_m {
            grad[m] -= counts[w] * dmeans[w * n_m + m] / means[w];
        }
    }
    Ok(value)
}

/// Full loss split `g = g_c + g_d` over all rays, with per-ray Hessian blocks
/// of `g_c` (`hessians[ℓ·n_m² + a·n_m + b]`).
#[derive(Debug, Clone, PartialEq)]
pub struct LossParts {
    pub gc: f64,
    pub gd: f64,
    pub grad_gc: Vec<f64>,
    pub grad_gd: Vec<f64>,
    pub hessians: Vec<f64>,
}

pub fn ct_loss_parts(model: &SpectralModel, y: &[f64], counts: &CountData) -> Result<LossParts, CtError> {
    ct_loss_parts_with(model, y, counts, qexp)
}

/// [`ct_loss_parts`] with another transmission function in place of `qexp`.
pub fn ct_loss_parts_with(
    model: &SpectralModel,
    y: &[f64],
    counts: &CountData,
    transmission: impl Fn(f64) -> Qexp + Sync + Copy,
) -> Result<LossParts, CtError> {
    let n_m = model.n_materials();
    let n_rays = counts.n_rays;
    if y.len() != n_rays * n_m {
        return Err(CtError::Dimension { what: "projections", expected: n_rays * n_m, got: y.len() });
    }
    if counts.n_windows != model.n_windows() {
        return Err(CtError::Dimension { what: "count windows", expected: model.n_windows(), got: counts.n_windows });
    }
    let per_ray = (0..n_rays)
        .into_par_iter()
        .map(|l| {
            let v = &y[l * n_m..(l + 1) * n_m];
            let mut grad_c = vec![0.0; n_m];
            let mut hess = vec![0.0; n_m * n_m];
            let mut grad_d = vec![0.0; n_m];
            let s = model.scale(l);
            let gc = ray_convex_part_with(model, s, v, &mut grad_c, &mut hess, transmission);
            let gd = ray_concave_part_with(model, s, v, &counts.ray(l), &mut grad_d, transmission)
                .map_err(|(window, mean)| CtError::BadMean { window, ray: l, mean })?;
            Ok((gc, gd, grad_c, grad_d, hess))
        })
        .collect::<Result<Vec<_>, CtError>>()?;
    let mut parts = LossParts {
        gc: 0.0,
        gd: 0.0,
        grad_gc: Vec::with_capacity(y.len()),
        grad_gd: Vec::with_capacity(y.len()),
        hessians: Vec::with_capacity(n_rays * n_m * n_m),
    };
    for (gc, gd, grad_c, grad_d, hess) in per_ray {
        parts.gc += gc;
        parts.gd += gd;
        parts.grad_gc.extend(grad_c);
        parts.grad_gd.extend(grad_d);
        parts.hessians.extend(hess);
    }
    Ok(parts)
}

/// `Σ (C log C − C)`, the constant that makes the loss zero at a perfect
/// fit of every count. Adding it does not change minimizers.
pub fn loss_offset(counts: impl IntoIterator<Item = f64>) -> f64 {
    counts.into_iter().filter(|&c| c > 0.0).map(|c| c * c.ln() - c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_spectral_model, AttenuationTable, SpectralConfig, Spectrum};

    fn single_energy_model(mu: f64, intensity: f64) -> SpectralModel {
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
    fn unattenuated_means_equal_window_totals() {
        let model =
            build_spectral_model(&SpectralConfig::default(), &AttenuationTable::bundled(), &Spectrum::bundled()).unwrap();
        let means = expected_counts(&model, &[0.0; 4 * 3]).unwrap();
        for w in 0..3 {
            let total: f64 = model.response[w * 100..(w + 1) * 100].iter().sum();
            for l in 0..4 {
                assert!((means[w * 4 + l] - total).abs() <= 1e-9 * total);
            }
        }
    }

    #[test]
    fn single_material_single_energy_mean() {
        let model = single_energy_model(1.0, 1e4);
        let y = [0.0, 0.5, 2.0];
        let means = expected_counts(&model, &y).unwrap();
        for (m, y) in means.iter().zip(y) {
            assert_eq!(*m, 1e4 * (-y).exp());
        }
    }

    #[test]
    fn loss_at_zero_projection() {
        let model = single_energy_model(0.7, 500.0);
        let counts = CountData { n_windows: 1, n_rays: 2, counts: vec![480, 530] };
        let parts = ct_loss_parts(&model, &[0.0, 0.0], &counts).unwrap();
        assert_eq!(parts.gc, 1000.0);
        assert!((parts.gd + 1010.0 * 500f64.ln()).abs() < 1e-9);
        assert_eq!(parts.hessians, vec![0.7 * 0.7 * 500.0; 2]);
    }

    #[test]
    fn zero_mean_with_counts_is_an_error() {
        let model = single_energy_model(1.0, 0.0);
        let counts = CountData { n_windows: 1, n_rays: 1, counts: vec![3] };
        assert!(matches!(ct_loss_parts(&model, &[0.0], &counts), Err(CtError::BadMean { .. })));
        assert!(sample_counts(&[-1.0], 1, 0).is_err());
        assert_eq!(sample_counts(&[0.0], 1, 0).unwrap().counts, vec![0]);
    }

    #[test]
    fn offset_zero_at_unit_counts_limit() {
        assert_eq!(loss_offset([0.0, 1.0]), -1.0);
        assert!((loss_offset([std::f64::consts::E]) - 0.0).abs() < 1e-15);
    }
}
