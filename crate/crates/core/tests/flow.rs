use qflow::flow::{detect_free_boundary, run_flow, FlowConfig, KernelSign, SolverOptions};
use qflow::measure::{density_from_quantile, Grid, QuantileVector, TargetMeasure};
use qflow::Error;

fn dirac_cfg(cells: usize, tau: f64, lambda: f64, horizon: f64) -> FlowConfig {
    let grid = Grid::new(cells).unwrap();
    FlowConfig::new(
        TargetMeasure::dirac(0.0).unwrap(),
        QuantileVector::constant(grid, -1.0),
        tau,
        lambda,
        horizon,
    )
    .unwrap()
}

#[test]
fn target_is_stationary() {
    let grid = Grid::new(80).unwrap();
    for target in [
        TargetMeasure::uniform(0.0, 1.0).unwrap(),
        TargetMeasure::truncated_gaussian(0.0, 1.0, 0.01, 0.99).unwrap(),
    ] {
        let cfg = FlowConfig::new(target.clone(), target.sample(&grid), 1e-2, 1e-2, 1.0).unwrap();
        let traj = run_flow(&cfg).unwrap();
        assert_eq!(traj.steps(), 100);
        for g in &traj.states {
            assert!(g.max_abs_diff(&cfg.initial).unwrap() < 1e-8);
        }
    }
}

#[test]
fn mean_moves_at_unit_speed_before_contact() {
    // with R = 0 and zero boundary flux the mean obeys d/dt mean = 1
    let (cells, tau) = (100, 1e-3);
    let h = 1.0 / cells as f64;
    let traj = run_flow(&dirac_cfg(cells, tau, 1e-2, 0.4)).unwrap();
    for (t, g) in traj.times.iter().zip(&traj.states) {
        assert!((g.mean() - (t - 1.0)).abs() <= tau + h * h, "t={t}");
    }
}

#[test]
fn unregularized_flow_spreads_linearly() {
    let traj = run_flow(&dirac_cfg(50, 1e-2, 0.0, 0.3)).unwrap();
    let grid = Grid::new(50).unwrap();
    let span = grid.node(49) - grid.node(0);
    for (t, g) in traj.times.iter().zip(&traj.states) {
        let v = g.values();
        assert!((v[49] - v[0] - 2.0 * t * span).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn unregularized_flow_builds_an_atom() {
    let traj = run_flow(&dirac_cfg(50, 1e-2, 0.0, 0.8)).unwrap();
    let masses: Vec<f64> = traj
        .states
        .iter()
        .zip(&traj.slopes)
        .map(|(g, d)| {
            density_from_quantile(g, d, 1e-9, Some(0.0), 1e-12)
                .unwrap()
                .atoms
                .iter()
                .filter(|a| a.location == 0.0)
                .map(|a| a.mass)
                .sum::<f64>()
        })
        .collect();
    assert_eq!(masses[0], 0.0);
    assert!(masses.windows(2).all(|w| w[1] >= w[0]));
    // g_i(t) = -1 + 2 s_i t reaches 0 for s_i >= 1 / (2t)
    assert!((masses.last().unwrap() - 0.38).abs() < 1e-12);
}

#[test]
fn free_boundary_recedes_after_contact() {
    let cells = 100;
    let h = 1.0 / cells as f64;
    let traj = run_flow(&dirac_cfg(cells, 2e-3, 1e-2, 1.0)).unwrap();
    let beta: Vec<f64> = traj
        .states
        .iter()
        .map(|g| detect_free_boundary(g, 0.0, 1e-9))
        .collect();
    let first = beta.iter().position(|&b| b < 1.0).expect("contact happens");
    assert!(traj.times[first] > 0.4);
    for w in beta[first..].windows(2) {
        assert!(w[1] <= w[0] + h);
    }
    assert!(*beta.last().unwrap() < beta[first]);
}

#[test]
fn horizon_shorter_than_step() {
    let traj = run_flow(&dirac_cfg(20, 0.1, 1e-2, 0.05)).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.steps(), 0);
    assert_eq!(traj.times, vec![0.0]);
    assert!(traj.energies.len() == 1 && traj.step_norms.is_empty());
}

#[test]
fn repulsive_flow_translates_constants() {
    let cfg = dirac_cfg(30, 1e-2, 1e-2, 0.5).with_kernel(KernelSign::Positive);
    let traj = run_flow(&cfg).unwrap();
    for (t, g) in traj.times.iter().zip(&traj.states) {
        assert!(g.values().iter().all(|v| (v - (-1.0 - t)).abs() < 1e-9));
    }
}

#[test]
fn output_stride_keeps_last_state() {
    let mut cfg = dirac_cfg(20, 1e-2, 1e-2, 0.25);
    cfg.output_stride = 10;
    let traj = run_flow(&cfg).unwrap();
    assert_eq!(traj.steps(), 25);
    assert_eq!(traj.len(), 4);
    assert!((traj.times[3] - 0.25).abs() < 1e-12);
    assert_eq!(traj.energies.len(), 26);
}

#[test]
fn failing_step_returns_partial_run() {
    let mut cfg = dirac_cfg(40, 1e-2, 1e-2, 0.5);
    cfg.solver = SolverOptions {
        max_iter: 1,
        ..SolverOptions::default()
    };
    match run_flow(&cfg) {
        Err(Error::StepFailed { step, partial, .. }) => {
            assert_eq!(step, 1);
            assert_eq!(partial.len(), 1);
        }
        other => panic!("expected a step failure, got {other:?}"),
    }
}

#[test]
fn dissipation_holds_along_runs() {
    for kernel in [KernelSign::Negative, KernelSign::Positive] {
        let cfg = dirac_cfg(40, 1e-2, 1e-2, 0.8).with_kernel(kernel);
        let traj = run_flow(&cfg).unwrap();
        let summary = traj.summary(cfg.solver.tol);
        assert!(summary.cone_ok && summary.energy_ok, "{kernel:?}: {summary:?}");
    }
}
