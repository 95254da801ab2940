use necrostrip_core::evolution::{
    decay_rate_fit, evaluate_psi, numerical_jacobian_mode, run_simulation, step,
    write_trajectory_csv, GridConfig, PsiEvaluator, Scheme, SimulationConfig, Termination,
    TrajectorySidecar,
};
use necrostrip_core::fourier::{periodic_nodes, Periodic};
use necrostrip_core::{flat_stationary, gamma_star, lambda_k, FlatStationary, TumorParams};

fn p0() -> (TumorParams, FlatStationary) {
    let p = TumorParams::new(1.0, 2.0, 6.0, 1.0, 1.0, 1.0).unwrap();
    let fs = flat_stationary(&p).unwrap();
    (p, fs)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn cosine(nx: usize, k: f64, eps: f64) -> Vec<f64> {
    periodic_nodes(nx)
        .iter()
        .map(|x| eps * (k * x).cos())
        .collect()
}

#[test]
fn flat_flux_is_second_order_small() {
    let (p, fs) = p0();
    let sizes = [(64, 128), (128, 256), (256, 512)];
    let norms: Vec<f64> = sizes
        .iter()
        .map(|&(nx, ny)| {
            max_abs(&evaluate_psi(&vec![0.0; nx], &p, &fs, 1.0, GridConfig { nx, ny }).unwrap())
        })
        .collect();
    for w in norms.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{norms:?}");
    }
}

#[test]
fn mean_mode_probe_recovers_dissolution_rate() {
    let (p, fs) = p0();
    let grid = GridConfig { nx: 64, ny: 128 };
    let probe = numerical_jacobian_mode(0, 1e-4, &p, &fs, 1.0, grid).unwrap();
    assert!(probe.lambda_hat > 0.0);
    assert!((probe.lambda_hat - p.nu).abs() < 1e-2 * p.nu, "{probe:?}");

    let faster = p.with_nu(2.5).unwrap();
    let fs2 = flat_stationary(&faster).unwrap();
    let probe = numerical_jacobian_mode(0, 1e-4, &faster, &fs2, 1.0, grid).unwrap();
    assert!((probe.lambda_hat - 2.5).abs() < 2.5e-2, "{probe:?}");
}

#[test]
fn forward_euler_multiplies_mode_amplitude() {
    let (p, fs) = p0();
    let grid = GridConfig { nx: 64, ny: 128 };
    let gamma = 1.0;
    let (eps, dt) = (1e-4, 1e-3);
    let mut eval = PsiEvaluator::new(&p, &fs, gamma, grid).unwrap();
    eval.subtract_flat_flux().unwrap();
    let mut fft = Periodic::new(grid.nx);
    for k in [1_usize, 3] {
        let rho = cosine(grid.nx, k as f64, eps);
        let next = step(&mut eval, 0.0, &rho, dt, Scheme::Explicit).unwrap();
        let ratio = fft.mode_amplitudes(&next)[k] / eps;
        let lambda = lambda_k(&p, &fs, k as i64, gamma);
        let expected = 1.0 - lambda * dt;
        assert!(
            (ratio - expected).abs() < 0.02 * lambda.abs() * dt,
            "k = {k}: {ratio} vs {expected}"
        );
    }
}

#[test]
fn splitting_error_is_first_order_in_dt() {
    let (p, fs) = p0();
    let grid = GridConfig { nx: 32, ny: 64 };
    let gamma = 2.0 * gamma_star(&p, &fs, 64).unwrap().value;
    let rho0: Vec<f64> = periodic_nodes(grid.nx)
        .iter()
        .map(|x| 1e-3 * (x.cos() + 0.5 * (2.0 * x).sin()))
        .collect();
    let t_end = 0.1;
    let run = |n_steps: usize| {
        let mut eval = PsiEvaluator::new(&p, &fs, gamma, grid).unwrap();
        eval.subtract_flat_flux().unwrap();
        let dt = t_end / n_steps as f64;
        let mut rho = rho0.clone();
        for n in 0..n_steps {
            rho = step(&mut eval, n as f64 * dt, &rho, dt, Scheme::Imex).unwrap();
        }
        rho
    };
    let (a, b, c) = (run(10), run(20), run(40));
    let diff = |u: &[f64], v: &[f64]| {
        u.iter()
            .zip(v)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let ratio = diff(&a, &b) / diff(&b, &c);
    assert!((1.6..2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn zero_data_stays_at_rest() {
    let (p, fs) = p0();
    let cfg = SimulationConfig {
        t_final: 0.5,
        grid: GridConfig { nx: 32, ny: 64 },
        ..Default::default()
    };
    let sim = run_simulation(&vec![0.0; 32], &p, &fs, 1.0, &cfg).unwrap();
    assert_eq!(sim.termination, Termination::Completed);
    assert!(sim.trajectory.max_abs_rho().iter().all(|&m| m < 1e-12));
}

#[test]
fn stable_and_unstable_runs_separate() {
    let (p, fs) = p0();
    let star = gamma_star(&p, &fs, 64).unwrap();
    let grid = GridConfig { nx: 64, ny: 128 };
    let rho0 = cosine(grid.nx, 1.0, 1e-3);

    let stable_cfg = SimulationConfig {
        t_final: 1.5,
        grid,
        ..Default::default()
    };
    let gamma = 2.0 * star.value;
    let sim = run_simulation(&rho0, &p, &fs, gamma, &stable_cfg).unwrap();
    assert_eq!(sim.termination, Termination::Completed);
    let fit = decay_rate_fit(&sim.trajectory, 1, 0.5).unwrap();
    let expected = -lambda_k(&p, &fs, 1, gamma);
    assert!(
        (fit.rate / expected - 1.0).abs() < 0.1,
        "{} vs {expected}",
        fit.rate
    );

    let unstable_cfg = SimulationConfig {
        t_final: 1.5,
        grid,
        ..Default::default()
    };
    let gamma = 0.5 * star.value;
    let sim = run_simulation(&rho0, &p, &fs, gamma, &unstable_cfg).unwrap();
    let amps = sim.trajectory.amplitude_series(1);
    assert!(amps.windows(2).all(|w| w[1] > w[0]));
    let fit = decay_rate_fit(&sim.trajectory, 1, 0.5).unwrap();
    let expected = -lambda_k(&p, &fs, 1, gamma);
    assert!(expected > 0.0);
    assert!(
        (fit.rate / expected - 1.0).abs() < 0.1,
        "{} vs {expected}",
        fit.rate
    );
}

#[test]
fn exports_are_reproducible() {
    let (p, fs) = p0();
    let cfg = SimulationConfig {
        t_final: 0.2,
        grid: GridConfig { nx: 32, ny: 64 },
        ..Default::default()
    };
    let rho0 = cosine(32, 2.0, 1e-3);
    let render = || {
        let sim = run_simulation(&rho0, &p, &fs, 1.0, &cfg).unwrap();
        let mut csv = Vec::new();
        write_trajectory_csv(&mut csv, &sim.trajectory, 4, &["run".to_string()]).unwrap();
        let side = TrajectorySidecar::new(&sim.trajectory, sim.termination, &p, &fs, 1.0, &cfg, 4);
        (csv, serde_json::to_string(&side).unwrap())
    };
    let (a, b) = (render(), render());
    assert_eq!(a, b);
    let text = String::from_utf8(a.0).unwrap();
    assert!(text.starts_with("# run\nt,max_abs_rho,A_0,A_1,A_2,A_3,A_4\n"));
}
