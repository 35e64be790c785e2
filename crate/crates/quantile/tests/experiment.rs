use std::fs::File;
use std::io::BufReader;

use ncadmm_core::admm::read_trace;
use ncadmm_core::diagnostics::{fosp_residuals, rsc_probe, write_probe_report};
use ncadmm_quantile::{
    build_problem, fosp_anchor, generate_dataset, lipschitz_gamma, run_figure2, run_sigma, trace_file_name,
    write_traces, PenaltyObjective, QuantileSpec,
};

fn top_k(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    let mut top = idx[..k].to_vec();
    top.sort();
    top
}

#[test]
fn averaged_iterate_recovers_support() {
    let mut failures = 0;
    for seed in 0..20 {
        let spec = QuantileSpec { d: 200, n: 400, s_star: 5, sigma: 2.5e-3, seed, ..Default::default() };
        let data = generate_dataset(&spec).unwrap();
        let gamma = lipschitz_gamma(&data.phi).unwrap();
        let run = run_sigma(&spec, &data, gamma, 500, false).unwrap();
        if top_k(&run.x_avg, 5) != (0..5).collect::<Vec<_>>() {
            failures += 1;
        }
    }
    assert!(failures <= 1, "{failures} of 20 runs missed the support");
}

#[test]
fn planted_dual_zeroes_y_residual() {
    let spec = QuantileSpec { d: 60, n: 80, s_star: 4, q: 0.3, sigma: 1e-2, seed: 7, ..Default::default() };
    let data = generate_dataset(&spec).unwrap();
    let gamma = lipschitz_gamma(&data.phi).unwrap();
    let problem = build_problem(&spec, &data, gamma).unwrap();
    let (anchor, u_star) = fosp_anchor(&spec, &data, problem.f()).unwrap();
    // ζ evaluated by the objective's own selector at y* = Φx*, whose kinks are
    // exactly the zero-noise rows.
    let zeta = problem.g().subgradient(&anchor.y);
    let res = fosp_residuals(&problem, &anchor.x, &anchor.y, &u_star, &anchor.xi, &zeta).unwrap();
    assert_eq!(res.dual_y, 0.0);
    assert!(res.primal <= 1e-12);
    assert!(res.dual_x.is_finite());
}

#[test]
fn rsc_probe_along_trajectory_is_reported() {
    let spec = QuantileSpec { d: 50, n: 100, s_star: 5, sigma: 1e-2, seed: 2, ..Default::default() };
    let data = generate_dataset(&spec).unwrap();
    let gamma = lipschitz_gamma(&data.phi).unwrap();
    let problem = build_problem(&spec, &data, gamma).unwrap();
    let (anchor, _) = fosp_anchor(&spec, &data, problem.f()).unwrap();
    let f: PenaltyObjective = *problem.f();
    let g = problem.g().clone();
    let select_f = move |x: &[f64]| f.subgradient(x);
    let select_g = move |y: &[f64]| g.subgradient(y);

    let at_anchor = rsc_probe(&problem, &select_f, &select_g, 0, &anchor.x, &anchor.y, &anchor).unwrap();
    assert!(at_anchor.penalty <= 1e-20 && at_anchor.dist_x == 0.0);

    let mut state = problem.zero_state();
    let mut results = Vec::new();
    for _ in 0..100 {
        problem.step(&mut state).unwrap();
        results.push(rsc_probe(&problem, &select_f, &select_g, state.t, &state.x, &state.y, &anchor).unwrap());
    }
    assert!(results.iter().all(|r| r.lhs.is_finite() && r.penalty >= 0.0));
    let eps_sq = spec.s_star as f64 * ((spec.n * spec.d) as f64).ln() / spec.n as f64;
    let min_ratio = results.iter().filter_map(|r| r.x_curvature_ratio(eps_sq)).fold(f64::INFINITY, f64::min);
    assert!(min_ratio.is_finite());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rsc_probe.csv");
    write_probe_report(&results, File::create(&path).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn sigma_sweep_writes_one_trace_per_sigma() {
    let spec = QuantileSpec { d: 40, n: 30, s_star: 3, seed: 3, ..Default::default() };
    let data = generate_dataset(&spec).unwrap();
    let gamma = lipschitz_gamma(&data.phi).unwrap();
    let sigmas = [5e-3, 1e-2, 2e-2, 5e-2];
    let runs = run_figure2(&spec, &data, gamma, &sigmas, 25, false).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_traces(&runs, dir.path()).unwrap();
    assert_eq!(paths.len(), 4);
    for (path, sigma) in paths.iter().zip(sigmas) {
        assert_eq!(path.file_name().unwrap().to_str().unwrap(), trace_file_name(sigma));
        let records = read_trace(BufReader::new(File::open(path).unwrap())).unwrap();
        assert_eq!(records.len(), 25);
        assert!(records.iter().all(|r| r.objective_avg.is_some() && r.alpha_t.is_none()));
    }
    // Concurrent sweep equals sequential single runs.
    let single = run_sigma(&spec.with_sigma(2e-2), &data, gamma, 25, false).unwrap();
    assert_eq!(single.trace, runs[2].trace);
}
