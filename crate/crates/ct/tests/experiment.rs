use ncadmm_core::admm::read_trace;
use ncadmm_ct::experiment::{trace_file_name, write_outputs};
use ncadmm_ct::*;

fn desk_config() -> CtExperimentConfig {
    CtExperimentConfig {
        geometry: CtGeometry::square(8, 4.0, 12, 12),
        spectral: SpectralConfig { intensity: 1e5, ..Default::default() },
        iters: 40,
        record_timing: false,
        seed: 1,
        ..Default::default()
    }
}

#[test]
fn sigma_sweep_decreases_the_loss_and_keeps_alpha_positive() {
    let out = run_ct_experiment(&desk_config()).unwrap();
    assert_eq!(out.runs.iter().map(|r| r.sigma).collect::<Vec<_>>(), vec![1.0, 10.0, 100.0]);
    assert!(out.fosp_ratio > 0.0 && out.fosp_ratio < 0.05, "{}", out.fosp_ratio);
    for run in &out.runs {
        assert_eq!(run.trace.len(), 40);
        assert_eq!(run.trace.iter().map(|r| r.iter).collect::<Vec<_>>(), (1..=40).collect::<Vec<_>>());
        let first = run.trace[0].objective;
        let last = run.trace[39].objective;
        assert!(last < first, "σ={}: {first} -> {last}", run.sigma);
        for r in &run.trace {
            let alpha = r.alpha_t.expect("reference differs from iterates");
            assert!(alpha.is_finite() && alpha > 0.0);
            assert!(r.primal_residual.is_finite());
        }
    }
    assert!(out.best_run().is_some());
}

#[test]
fn outputs_are_written_and_deterministic() {
    let config = desk_config();
    let a = run_ct_experiment(&config).unwrap();
    let b = run_ct_experiment(&config).unwrap();
    for (ra, rb) in a.runs.iter().zip(&b.runs) {
        assert_eq!(ra.trace, rb.trace);
        assert_eq!(ra.x_last, rb.x_last);
    }
    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(&a, dir.path()).unwrap();
    // Phantom: one grid and three graymaps; each run adds a trace as well.
    assert_eq!(written.len(), 4 + 3 * 5);
    let trace = std::fs::read(dir.path().join(trace_file_name(10.0))).unwrap();
    assert_eq!(read_trace(&trace[..]).unwrap(), a.runs[1].trace);
    let image = std::fs::read(dir.path().join("ct_sigma1e1_image.txt")).unwrap();
    assert_eq!(CtImage::read_text(&image[..], "image").unwrap(), a.runs[1].x_last);
    let again = tempfile::tempdir().unwrap();
    write_outputs(&b, again.path()).unwrap();
    for path in &written {
        let name = path.file_name().unwrap();
        assert_eq!(std::fs::read(path).unwrap(), std::fs::read(again.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn custom_phantom_must_match_the_grid() {
    let mut config = desk_config();
    config.phantom = Some(CtImage::zeros(3, 3, config.spectral.materials.clone()));
    assert!(matches!(run_ct_experiment(&config), Err(CtError::Dimension { .. })));
    config.phantom = None;
    config.spectral.materials = vec!["pmma".into(), "unobtainium".into()];
    assert!(matches!(run_ct_experiment(&config), Err(CtError::UnknownMaterial(_))));
}
