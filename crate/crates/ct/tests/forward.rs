use nalgebra::DMatrix;
use ncadmm_core::prox::qexp;
use ncadmm_ct::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn default_model() -> SpectralModel {
    build_spectral_model(&SpectralConfig::default(), &AttenuationTable::bundled(), &Spectrum::bundled()).unwrap()
}

/// Entry and exit parameters of a line with the box `[lo, hi]²`.
fn box_chord(origin: [f64; 2], dir: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for a in 0..2 {
        if dir[a].abs() < 1e-15 {
            if origin[a] < lo[a] || origin[a] > hi[a] {
                return None;
            }
        } else {
            let (ta, tb) = ((lo[a] - origin[a]) / dir[a], (hi[a] - origin[a]) / dir[a]);
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
    }
    (t1 > t0).then_some((t0, t1))
}

#[test]
fn intersection_lengths_match_ray_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    const SAMPLES: usize = 100_000;
    for _ in 0..4 {
        let g = CtGeometry {
            nx: rng.random_range(3..12),
            ny: rng.random_range(3..12),
            pixel_size: rng.random_range(0.2..1.5),
            n_angles: rng.random_range(3..9),
            n_detectors: rng.random_range(3..9),
            detector_span: rng.random_range(2.0..20.0),
        };
        let p = build_projector(&g).unwrap();
        let h = g.pixel_size;
        let lo = [-(g.nx as f64) * h / 2.0, -(g.ny as f64) * h / 2.0];
        let hi = [-lo[0], -lo[1]];
        for a in 0..g.n_angles {
            let theta = a as f64 * std::f64::consts::PI / g.n_angles as f64;
            let dir = [theta.cos(), theta.sin()];
            for j in 0..g.n_detectors {
                let l = a * g.n_detectors + j;
                let s = -g.detector_span / 2.0 + (j as f64 + 0.5) * g.detector_span / g.n_detectors as f64;
                let origin = [-s * dir[1], s * dir[0]];
                let row: Vec<(usize, f64)> = p.row(l).collect();
                let Some((t0, t1)) = box_chord(origin, dir, lo, hi) else {
                    assert!(row.is_empty(), "ray {l} misses the grid");
                    continue;
                };
                let chord = t1 - t0;
                let total: f64 = row.iter().map(|e| e.1).sum();
                assert!((total - chord).abs() <= 1e-12 * chord.max(1.0), "ray {l}: {total} vs {chord}");
                let mut oracle = vec![0.0; g.n_pixels()];
                let dt = chord / SAMPLES as f64;
                for s in 0..SAMPLES {
                    let t = t0 + (s as f64 + 0.5) * dt;
                    let px = origin[0] + t * dir[0];
                    let py = origin[1] + t * dir[1];
                    let ix = (((px - lo[0]) / h).floor() as usize).min(g.nx - 1);
                    let iy = (((py - lo[1]) / h).floor() as usize).min(g.ny - 1);
                    oracle[iy * g.nx + ix] += dt;
                }
                let mut dense = vec![0.0; g.n_pixels()];
                for (k, v) in row {
                    dense[k] = v;
                }
                let err = dense.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-3 * chord, "ray {l}: max error {err} on chord {chord}");
            }
        }
    }
}

#[test]
fn projector_adjoint_identity() {
    let g = CtGeometry::square(25, 10.0, 50, 50);
    let p = build_projector(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for width in [1usize, 3] {
        let x: Vec<f64> = (0..g.n_pixels() * width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r: Vec<f64> = (0..g.n_rays() * width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let px = p.mul_block(&x, width).unwrap();
        let ptr = p.mul_block_transpose(&r, width).unwrap();
        let lhs: f64 = px.iter().zip(&r).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&ptr).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn projector_entries_are_nonnegative_lengths(
        n in 1usize..8,
        size in 0.5f64..5.0,
        angles in 1usize..7,
        dets in 1usize..7,
    ) {
        let g = CtGeometry::square(n, size, angles, dets);
        let p = build_projector(&g).unwrap();
        prop_assert_eq!(p.rows(), g.n_rays());
        prop_assert_eq!(p.cols(), g.n_pixels());
        for (_, _, v) in p.triplets() {
            prop_assert!(v > 0.0 && v <= g.pixel_size * std::f64::consts::SQRT_2 + 1e-12);
        }
        for s in p.row_sums() {
            prop_assert!(s <= size * std::f64::consts::SQRT_2 + 1e-12);
        }
    }
}

#[test]
fn poisson_sampler_moments() {
    let lambda = 100.0;
    let n = 10_000;
    let counts = sample_counts(&vec![lambda; n], n, 21).unwrap();
    let mean = counts.counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
    assert!((mean - lambda).abs() <= 4.0 * (lambda / n as f64).sqrt(), "sample mean {mean}");
    let var = counts.counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var / lambda - 1.0).abs() < 0.1, "sample variance {var}");
    assert_eq!(sample_counts(&vec![lambda; n], n, 21).unwrap(), counts);
}

#[test]
fn counts_follow_the_phantom() {
    let g = CtGeometry::square(25, 10.0, 50, 50);
    let model = default_model();
    let p = build_projector(&g).unwrap();
    let phantom = default_phantom(&g, &model.materials);
    let counts = forward_counts(&model, &p, &phantom, 0).unwrap();
    assert_eq!(counts.counts.len(), 3 * 2500);
    let means = expected_counts(&model, &project(&p, &phantom).unwrap()).unwrap();
    let z: f64 = counts
        .counts
        .iter()
        .zip(&means)
        .map(|(&c, &m)| (c as f64 - m) / m.sqrt())
        .map(|z| z * z)
        .sum::<f64>()
        / means.len() as f64;
    assert!((z - 1.0).abs() < 0.1, "standardized second moment {z}");
}

fn random_counts(model: &SpectralModel, y: &[f64], rng: &mut ChaCha8Rng) -> CountData {
    let n_rays = y.len() / model.n_materials();
    let means = expected_counts(model, y).unwrap();
    let counts = means.iter().map(|m| (m * rng.random_range(0.8..1.2)).round() as u64).collect();
    CountData { n_windows: model.n_windows(), n_rays, counts }
}

#[test]
fn gradients_match_central_differences() {
    let model = default_model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n_rays = 4;
    for point in 0..20 {
        let y: Vec<f64> = (0..n_rays * 3).map(|_| rng.random_range(-0.3..2.0)).collect();
        let counts = random_counts(&model, &y.iter().map(|v| v.abs()).collect::<Vec<_>>(), &mut rng);
        let parts = ct_loss_parts(&model, &y, &counts).unwrap();
        for (which, grad) in [("g_c", &parts.grad_gc), ("g_d", &parts.grad_gd)] {
            let value = |v: &[f64]| {
                let p = ct_loss_parts(&model, v, &counts).unwrap();
                if which == "g_c" {
                    p.gc
                } else {
                    p.gd
                }
            };
            let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            for j in 0..y.len() {
                let h = 1e-5;
                let mut plus = y.clone();
                plus[j] += h;
                let mut minus = y.clone();
                minus[j] -= h;
                let fd = (value(&plus) - value(&minus)) / (2.0 * h);
                assert!(
                    (fd - grad[j]).abs() <= 1e-5 * scale,
                    "{which} point {point} coord {j}: fd {fd} analytic {}",
                    grad[j]
                );
            }
        }
    }
}

#[test]
fn hessian_blocks_match_differences_and_are_psd() {
    let model = default_model();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let y: Vec<f64> = (0..3 * 3).map(|_| rng.random_range(-0.5..2.0)).collect();
        let counts = random_counts(&model, &[0.5; 9], &mut rng);
        let parts = ct_loss_parts(&model, &y, &counts).unwrap();
        for l in 0..3 {
            let block = DMatrix::from_row_slice(3, 3, &parts.hessians[l * 9..(l + 1) * 9]);
            let eig = block.clone().symmetric_eigen();
            let max = eig.eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-12 * max), "{:?}", eig.eigenvalues);
            for c in 0..3 {
                let h = 1e-5;
                let mut plus = y.clone();
                plus[l * 3 + c] += h;
                let mut minus = y.clone();
                minus[l * 3 + c] -= h;
                let gp = ct_loss_parts(&model, &plus, &counts).unwrap().grad_gc;
                let gm = ct_loss_parts(&model, &minus, &counts).unwrap().grad_gc;
                for r in 0..3 {
                    let fd = (gp[l * 3 + r] - gm[l * 3 + r]) / (2.0 * h);
                    assert!((fd - block[(r, c)]).abs() <= 1e-5 * max);
                }
            }
        }
    }
}

#[test]
fn loss_at_zero_is_direct_substitution() {
    let model = default_model();
    let counts = CountData { n_windows: 3, n_rays: 2, counts: vec![10, 20, 30, 40, 50, 60] };
    let parts = ct_loss_parts(&model, &[0.0; 6], &counts).unwrap();
    let totals: Vec<f64> = (0..3).map(|w| model.response[w * 100..(w + 1) * 100].iter().sum()).collect();
    let gc: f64 = 2.0 * totals.iter().sum::<f64>();
    assert!((parts.gc - gc).abs() <= 1e-12 * gc);
    let gd: f64 = -(0..3).map(|w| (counts.get(w, 0) + counts.get(w, 1)) as f64 * totals[w].ln()).sum::<f64>();
    assert!((parts.gd - gd).abs() <= 1e-12 * gd.abs());
}

#[test]
fn loss_matches_straight_line_evaluation() {
    let model = default_model();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n_rays = 6;
    for _ in 0..10 {
        let y: Vec<f64> = (0..n_rays * 3).map(|_| rng.random_range(-0.5..3.0)).collect();
        let counts = random_counts(&model, &vec![1.0; n_rays * 3], &mut rng);
        let parts = ct_loss_parts(&model, &y, &counts).unwrap();
        let mut direct = 0.0;
        for w in 0..3 {
            for l in 0..n_rays {
                let mut mean = 0.0;
                for i in 0..100 {
                    let mut t = 0.0;
                    for m in 0..3 {
                        t += model.mu(m, i) * y[l * 3 + m];
                    }
                    mean += model.response_at(w, l, i) * qexp(-t).value;
                }
                direct += mean - counts.get(w, l) as f64 * mean.ln();
            }
        }
        let ours = parts.gc + parts.gd;
        assert!((ours - direct).abs() <= 1e-10 * direct.abs(), "{ours} vs {direct}");
    }
}

#[test]
fn qexp_and_exp_losses_agree_on_nonnegative_projections() {
    let model = default_model();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let y: Vec<f64> = (0..5 * 3).map(|_| rng.random_range(0.0..4.0)).collect();
        let counts = random_counts(&model, &y, &mut rng);
        let a = ct_loss_parts(&model, &y, &counts).unwrap();
        let b = ct_loss_parts_with(&model, &y, &counts, exact_exp).unwrap();
        assert_eq!(a, b);
    }
    // They differ once a projection goes negative.
    let counts = CountData { n_windows: 3, n_rays: 1, counts: vec![1, 1, 1] };
    let a = ct_loss_parts(&model, &[-1.0, 0.0, 0.0], &counts).unwrap();
    let b = ct_loss_parts_with(&model, &[-1.0, 0.0, 0.0], &counts, exact_exp).unwrap();
    assert!(a.gc < b.gc);
}

#[test]
fn convex_part_is_convex() {
    let model = default_model();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let counts = CountData { n_windows: 3, n_rays: 4, counts: vec![0; 12] };
    let gc = |y: &[f64]| ct_loss_parts(&model, y, &counts).unwrap().gc;
    for _ in 0..200 {
        let y1: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..4.0)).collect();
        let y2: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..4.0)).collect();
        let lam: f64 = rng.random_range(0.0..1.0);
        let mid: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        let bound = lam * gc(&y1) + (1.0 - lam) * gc(&y2);
        assert!(gc(&mid) <= bound + 1e-10 * bound.abs().max(1.0));
    }
}

#[test]
fn ray_scale_multiplies_responses() {
    let model = default_model().with_ray_scale(vec![1.0, 2.0]).unwrap();
    let means = expected_counts(&model, &[0.3, 0.0, 0.01, 0.3, 0.0, 0.01]).unwrap();
    for w in 0..3 {
        assert!((means[w * 2 + 1] - 2.0 * means[w * 2]).abs() <= 1e-9 * means[w * 2]);
    }
    assert!(default_model().with_ray_scale(vec![-1.0]).is_err());
}
