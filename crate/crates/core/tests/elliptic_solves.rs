use necrostrip_core::elliptic::{build_grid, solve_nutrient_obstacle, solve_pressure};
use necrostrip_core::fourier::{periodic_nodes, Periodic};
use necrostrip_core::{
    eval_p_s, eval_sigma_s, flat_stationary, FlatStationary, ModeShape, TumorParams,
};

fn p0() -> (TumorParams, FlatStationary) {
    let p = TumorParams::new(1.0, 2.0, 6.0, 1.0, 1.0, 1.0).unwrap();
    let fs = flat_stationary(&p).unwrap();
    (p, fs)
}

fn flat_sigma_error(ny: usize) -> f64 {
    let (p, fs) = p0();
    let grid = build_grid(16, ny, &fs, &[0.0; 16]).unwrap();
    let sol = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    (0..=ny)
        .map(|j| {
            let exact = eval_sigma_s(&fs, &p, grid.y_physical(0, j)).unwrap();
            (sol.sigma_field[grid.idx(0, j)] - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn flat_nutrient_converges_at_second_order() {
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&ny| flat_sigma_error(ny))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "errors {errs:?}");
    }
}

#[test]
fn uniform_lift_translates_the_interface() {
    let (p, fs) = p0();
    let lift = 0.05;
    let grid = build_grid(16, 128, &fs, &[lift; 16]).unwrap();
    let sol = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    let h = grid.dy(0);
    for e in &sol.eta {
        assert!((e - fs.eta_s - lift).abs() < 0.1 * h, "eta {e}");
    }
}

#[test]
fn even_surface_gives_even_interface() {
    let (p, fs) = p0();
    let nx = 32;
    let x = periodic_nodes(nx);
    let rho: Vec<f64> = x
        .iter()
        .map(|x| 0.01 * x.cos() + 0.005 * (3.0 * x).cos())
        .collect();
    let grid = build_grid(nx, 64, &fs, &rho).unwrap();
    let sol = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    for i in 1..nx {
        assert!((sol.eta[i] - sol.eta[nx - i]).abs() < 1e-9);
    }
}

#[test]
fn interface_follows_linear_response() {
    let (p, fs) = p0();
    let (nx, ny) = (64, 128);
    let eps = 1e-3;
    let rho: Vec<f64> = periodic_nodes(nx).iter().map(|x| eps * x.cos()).collect();
    let grid = build_grid(nx, ny, &fs, &rho).unwrap();
    let sol = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    let shift: Vec<f64> = sol.eta.iter().map(|e| e - fs.eta_s).collect();
    let amp = 2.0 * Periodic::new(nx).coefficients(&shift)[1].re;
    let d1 = ModeShape::new(&p, &fs, 1, 1.0).d();
    assert!(
        (amp / (eps * d1) - 1.0).abs() < 0.05,
        "amp {amp}, expected {}",
        eps * d1
    );
}

#[test]
fn complementarity_and_pde_residuals_are_small() {
    let (p, fs) = p0();
    let rho: Vec<f64> = periodic_nodes(32)
        .iter()
        .map(|x| 0.02 * (2.0 * x).sin())
        .collect();
    let grid = build_grid(32, 64, &fs, &rho).unwrap();
    let sol = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    assert!(sol.complementarity_residual <= 1e-8 * p.sigma_bar);
    assert!(sol.pde_residual <= 1e-8 * p.sigma_bar);
    assert!(sol
        .sigma_field
        .iter()
        .all(|&s| s >= p.sigma_hat - 1e-9 * p.sigma_bar));
}

#[test]
fn flat_surface_flux_vanishes_with_refinement() {
    let (p, fs) = p0();
    let flux = |ny: usize| {
        let grid = build_grid(16, ny, &fs, &[0.0; 16]).unwrap();
        let obstacle = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
        let pressure = solve_pressure(&grid, &p, &fs, &obstacle, 1.0).unwrap();
        pressure
            .top_flux
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    };
    let (coarse, fine) = (flux(64), flux(128));
    assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
}

#[test]
fn flat_pressure_matches_closed_form() {
    let (p, fs) = p0();
    let err = |ny: usize| {
        let grid = build_grid(16, ny, &fs, &[0.0; 16]).unwrap();
        let obstacle = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
        let pressure = solve_pressure(&grid, &p, &fs, &obstacle, 1.0).unwrap();
        (0..=ny)
            .map(|j| {
                let exact = eval_p_s(&fs, &p, grid.y_physical(5, j)).unwrap();
                (pressure.p_field[grid.idx(5, j)] - exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(64), err(128));
    let h = fs.rho_s / 128.0;
    assert!(fine < 10.0 * h * h, "{fine}");
    assert!(coarse / fine > 3.0, "{coarse} -> {fine}");
}

#[test]
fn higher_obstacle_never_shrinks_the_necrotic_set() {
    let (p, fs) = p0();
    let rho: Vec<f64> = periodic_nodes(32).iter().map(|x| 0.03 * x.cos()).collect();
    let grid = build_grid(32, 64, &fs, &rho).unwrap();
    let base = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    for delta in [0.01, 0.05, 0.2] {
        let raised = TumorParams {
            sigma_hat: p.sigma_hat + delta,
            ..p
        };
        let sol = solve_nutrient_obstacle(&grid, &raised, &fs).unwrap();
        for (k, (&was, &now)) in base.active_mask.iter().zip(&sol.active_mask).enumerate() {
            assert!(
                was || !now,
                "node {k} left the necrotic set at delta = {delta}"
            );
        }
        for (a, b) in base.eta.iter().zip(&sol.eta) {
            assert!(b >= a);
        }
    }
}

#[test]
fn oversized_surface_is_rejected() {
    let (_, fs) = p0();
    let rho: Vec<f64> = periodic_nodes(64)
        .iter()
        .map(|x| 0.6 * fs.gap() * x.cos())
        .collect();
    assert!(matches!(
        build_grid(64, 128, &fs, &rho),
        Err(necrostrip_core::Error::GeometryViolation { .. })
    ));
}
