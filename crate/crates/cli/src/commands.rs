use std::path::{Path, PathBuf};

use necrostrip_core::elliptic::{
    build_grid, solve_nutrient_obstacle, solve_pressure, write_field_snapshot,
};
use necrostrip_core::evolution::{
    initial_data_bound, run_simulation, write_trajectory_csv, GridConfig, JacobianProber,
    Termination, TrajectorySidecar,
};
use necrostrip_core::fourier::periodic_nodes;
use necrostrip_core::spectral::curvature_symbol;
use necrostrip_core::{
    classify_stability, eval_p_s, eval_sigma_s, existence_threshold, flat_stationary, gamma_k,
    gamma_star, gamma_star_sensitivity, lambda_k, validate_params, verify_stationary_residual,
    Error, FlatStationary, Stability, StationaryResidualReport, TumorParams,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, row, Outputs, Provenance};

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "NECROSTRIP_THREADS";

#[derive(Debug, Serialize)]
struct StationaryOut {
    eta_s: f64,
    rho_s: f64,
    p0: f64,
    sigma_star: f64,
    residual: StationaryResidualReport,
}

pub fn cmd_stationary(cfg: &RunConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let (params, fs) = cfg.stationary_model()?;
    let sigma_star = existence_threshold(params.sigma_hat, params.sigma_tilde)?;
    let residual = verify_stationary_residual(&fs, &params, cfg.stationary.residual_samples);
    let prov = Provenance::new("stationary", cfg, json!({ "sigma_star": sigma_star }));

    let n = cfg.stationary.samples;
    let mut csv = String::new();
    row(&mut csv, &["y".into(), "sigma_s".into(), "p_s".into()]);
    for i in 0..n {
        let y = fs.rho_s * i as f64 / (n - 1) as f64;
        let s = eval_sigma_s(&fs, &params, y)?;
        let p = eval_p_s(&fs, &params, y)?;
        row(&mut csv, &[num(y), num(s), num(p)]);
    }

    let mut out = Outputs::new(cfg, dir);
    out.json(
        "stationary.json",
        &prov,
        &StationaryOut {
            eta_s: fs.eta_s,
            rho_s: fs.rho_s,
            p0: fs.p0,
            sigma_star,
            residual,
        },
    );
    out.csv("profiles.csv", &prov, csv);
    out.flush()
}

#[derive(Debug, Serialize)]
struct ThresholdOut {
    gamma: f64,
    k_max: u32,
    gamma_star: f64,
    argmax_k: Vec<i64>,
    tail_bound_ok: bool,
    classification: Stability,
    unstable_modes: Vec<i64>,
    min_lambda: f64,
}

pub fn cmd_spectrum(cfg: &RunConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let r = cfg.resolve()?;
    let k_max = cfg.spectral.k_max;
    let report = classify_stability(&r.params, &r.fs, r.gamma, k_max)?;
    let prov = Provenance::new("spectrum", cfg, json!({ "gamma": r.gamma }));

    let mut csv = String::new();
    row(
        &mut csv,
        &[
            "k".into(),
            "lambda_k".into(),
            "gamma_k".into(),
            "k3_tanh_k_rho_s".into(),
        ],
    );
    for &(k, l) in &report.lambda {
        let g = if k == 0 {
            String::new()
        } else {
            num(gamma_k(&r.params, &r.fs, k))
        };
        row(
            &mut csv,
            &[k.to_string(), num(l), g, num(curvature_symbol(&r.fs, k))],
        );
    }

    let mut out = Outputs::new(cfg, dir);
    out.csv("spectrum.csv", &prov, csv);
    out.json(
        "threshold.json",
        &prov,
        &ThresholdOut {
            gamma: r.gamma,
            k_max,
            gamma_star: report.gamma_star,
            argmax_k: report.argmax_k.clone(),
            tail_bound_ok: report.tail_bound_ok,
            classification: report.classification,
            unstable_modes: report.unstable_modes.clone(),
            min_lambda: report.min_lambda(),
        },
    );
    if !cfg.spectral.nu_grid.is_empty() {
        let curve = gamma_star_sensitivity(&r.params, &cfg.spectral.nu_grid, k_max)?;
        let mut csv = String::new();
        row(&mut csv, &["nu".into(), "gamma_star".into()]);
        for (nu, g) in curve {
            row(&mut csv, &[num(nu), num(g)]);
        }
        out.csv("gamma_star_vs_nu.csv", &prov, csv);
    }
    out.flush()
}

#[derive(Debug, Serialize)]
struct RatesOut {
    #[serde(flatten)]
    sidecar: TrajectorySidecar,
    blowup_threshold: f64,
    failure: Option<String>,
}

pub fn cmd_simulate(cfg: &RunConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let r = cfg.resolve()?;
    let rho0 = cfg.initial_surface(&r.fs)?;
    let sim_cfg = cfg.simulation();
    let sim = run_simulation(&rho0, &r.params, &r.fs, r.gamma, &sim_cfg)?;
    let prov = Provenance::new("simulate", cfg, json!({ "gamma": r.gamma }));
    let k_report = cfg.evolution.report_k_max;

    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &sim.trajectory, k_report, &prov.header_lines())
        .expect("writing to memory");
    let sidecar = TrajectorySidecar::new(
        &sim.trajectory,
        sim.termination,
        &r.params,
        &r.fs,
        r.gamma,
        &sim_cfg,
        k_report,
    );

    let mut out = Outputs::new(cfg, dir);
    out.csv_with_header(
        "trajectory.csv",
        String::from_utf8(csv).expect("ascii output"),
    );
    out.json(
        "rates.json",
        &prov,
        &RatesOut {
            sidecar,
            blowup_threshold: sim.blowup_threshold,
            failure: sim.failure.as_ref().map(ToString::to_string),
        },
    );
    let Some(failure) = sim.failure else {
        return out.flush();
    };
    if let Some(last) = sim.trajectory.rho_snapshots.last() {
        if let Some(text) = field_snapshot(&r.params, &r.fs, r.gamma, cfg.grid, last, &prov) {
            out.csv_with_header("snapshot.csv", text);
        }
    }
    let t = sim.trajectory.times.last().copied().unwrap_or(0.0);
    out.flush()?;
    Err(CliError::Failed {
        context: format!(
            "simulation aborted at t = {t}; trajectory up to the last accepted step written"
        ),
        source: failure,
    })
}

fn field_snapshot(
    params: &TumorParams,
    fs: &FlatStationary,
    gamma: f64,
    grid: GridConfig,
    rho: &[f64],
    prov: &Provenance,
) -> Option<String> {
    let strip = build_grid(grid.nx, grid.ny, fs, rho).ok()?;
    let obstacle = solve_nutrient_obstacle(&strip, params, fs).ok()?;
    let pressure = solve_pressure(&strip, params, fs, &obstacle, gamma).ok()?;
    let mut buf = prov.csv_header().into_bytes();
    write_field_snapshot(&mut buf, &strip, params, fs, &obstacle, &pressure).ok()?;
    String::from_utf8(buf).ok()
}

pub fn cmd_jacobian(cfg: &RunConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let r = cfg.resolve()?;
    let jc = &cfg.jacobian;
    let grids = if jc.grids.is_empty() {
        vec![cfg.grid]
    } else {
        jc.grids.clone()
    };
    let prov = Provenance::new("jacobian", cfg, json!({ "gamma": r.gamma }));

    let mut csv = String::new();
    let header = [
        "nx",
        "ny",
        "k",
        "epsilon",
        "lambda_hat",
        "lambda_k",
        "rel_err",
        "leakage",
        "order",
    ];
    row(&mut csv, &header.map(String::from));
    let mut previous: Option<(GridConfig, Vec<f64>)> = None;
    for grid in grids {
        let mut prober = JacobianProber::new(&r.params, &r.fs, r.gamma, grid)?;
        let mut errs = Vec::new();
        for (idx, k) in (jc.k_min..=jc.k_max).enumerate() {
            let probe = prober.probe(k, jc.epsilon)?;
            let exact = lambda_k(&r.params, &r.fs, k as i64, r.gamma);
            let err = (probe.lambda_hat - exact).abs() / exact.abs().max(1.0);
            errs.push(err);
            let order = previous
                .as_ref()
                .map(|(g, e)| num((e[idx] / err).ln() / (grid.nx as f64 / g.nx as f64).ln()))
                .unwrap_or_default();
            row(
                &mut csv,
                &[
                    grid.nx.to_string(),
                    grid.ny.to_string(),
                    k.to_string(),
                    num(jc.epsilon),
                    num(probe.lambda_hat),
                    num(exact),
                    num(err),
                    num(probe.leakage),
                    order,
                ],
            );
        }
        previous = Some((grid, errs));
    }

    let mut out = Outputs::new(cfg, dir);
    out.csv("jacobian.csv", &prov, csv);
    out.flush()
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma_bar: f64,
    pub mu: f64,
    pub nu: f64,
    /// The swept adhesiveness as given: absolute, or a multiple of `gamma_*`.
    pub gamma_input: f64,
    pub status: String,
    pub eta_s: Option<f64>,
    pub rho_s: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_star: Option<f64>,
    pub leading_mode: Option<i64>,
    pub classification: Option<Stability>,
    pub lambda_leading: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub rate_rel_err: Option<f64>,
    pub termination: Option<Termination>,
}

fn axis(values: &[f64], fallback: f64) -> Vec<f64> {
    let mut v = if values.is_empty() {
        vec![fallback]
    } else {
        values.to_vec()
    };
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Parameter tuples `(sigma_bar, mu, nu, gamma)` in lexicographic order, and
/// whether the last entry is a factor of `gamma_*`.
pub fn sweep_points(cfg: &RunConfig) -> (Vec<[f64; 4]>, bool) {
    let s: &SweepConfig = &cfg.sweep;
    let p = &cfg.params;
    let (gammas, relative) = if !s.gamma_factor.is_empty() {
        (axis(&s.gamma_factor, 1.0), true)
    } else if !s.gamma.is_empty() {
        (axis(&s.gamma, 1.0), false)
    } else if let Some(f) = p.gamma_factor {
        (vec![f], true)
    } else {
        (vec![p.gamma.unwrap_or(1.0)], false)
    };
    let mut points = Vec::new();
    for &sb in &axis(&s.sigma_bar, p.sigma_bar) {
        for &mu in &axis(&s.mu, p.mu) {
            for &nu in &axis(&s.nu, p.nu) {
                for &g in &gammas {
                    points.push([sb, mu, nu, g]);
                }
            }
        }
    }
    (points, relative)
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::NoFlatStationary { .. } => "no_flat_stationary",
        Error::TailNotCertified { .. } => "tail_not_certified",
        Error::OrderingViolation { .. }
        | Error::NonPositiveRate { .. }
        | Error::NonFinite { .. } => "invalid_params",
        Error::GeometryViolation { .. } => "geometry_violation",
        Error::MinStepReached { .. } => "min_step_reached",
        _ => "failed",
    }
}

fn sweep_point(cfg: &RunConfig, point: [f64; 4], relative: bool) -> SweepRow {
    let [sigma_bar, mu, nu, g] = point;
    let mut out = SweepRow {
        sigma_bar,
        mu,
        nu,
        gamma_input: g,
        status: "ok".into(),
        eta_s: None,
        rho_s: None,
        gamma: None,
        gamma_star: None,
        leading_mode: None,
        classification: None,
        lambda_leading: None,
        fitted_rate: None,
        rate_rel_err: None,
        termination: None,
    };
    if let Err(e) = fill_sweep_row(cfg, relative, &mut out) {
        out.status = status_of(&e).into();
    }
    out
}

fn fill_sweep_row(
    cfg: &RunConfig,
    relative: bool,
    out: &mut SweepRow,
) -> necrostrip_core::Result<()> {
    let mut raw = cfg.raw_params(1.0);
    raw.sigma_bar = out.sigma_bar;
    raw.mu = out.mu;
    raw.nu = out.nu;
    let base = validate_params(raw)?;
    let fs = flat_stationary(&base)?;
    out.eta_s = Some(fs.eta_s);
    out.rho_s = Some(fs.rho_s);
    let star = gamma_star(&base, &fs, cfg.spectral.k_max)?;
    let gamma = if relative {
        out.gamma_input * star.value
    } else {
        out.gamma_input
    };
    let params = base.with_gamma(gamma)?;
    let k_hat = star.leading_mode();
    out.gamma = Some(gamma);
    out.gamma_star = Some(star.value);
    out.leading_mode = Some(k_hat);
    out.classification =
        Some(classify_stability(&params, &fs, gamma, cfg.spectral.k_max)?.classification);
    let lambda = lambda_k(&params, &fs, k_hat, gamma);
    out.lambda_leading = Some(lambda);
    if !cfg.sweep.simulate {
        return Ok(());
    }

    let nx = cfg.grid.nx;
    let amp = 1e-3_f64.min(0.5 * initial_data_bound(&fs));
    let rho0: Vec<f64> = if cfg.evolution.rho0.is_empty() {
        periodic_nodes(nx)
            .iter()
            .map(|x| amp * (k_hat as f64 * x).cos())
            .collect()
    } else {
        cfg.initial_surface(&fs)
            .map_err(|e| Error::GeometryViolation {
                reason: e.to_string(),
            })?
    };
    let sim = run_simulation(&rho0, &params, &fs, gamma, &cfg.simulation())?;
    out.termination = Some(sim.termination);
    if let Some(e) = sim.failure {
        return Err(e);
    }
    let rate = sim
        .trajectory
        .fitted_rates
        .iter()
        .find(|m| m.k() == k_hat as usize)
        .and_then(|m| m.rate());
    out.fitted_rate = rate;
    out.rate_rel_err = rate.map(|r| (r + lambda).abs() / lambda.abs());
    Ok(())
}

fn worker_count() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn cmd_sweep(cfg: &RunConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let (points, relative) = sweep_points(cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start sweep workers: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|&p| sweep_point(cfg, p, relative))
            .collect()
    });

    let prov = Provenance::new(
        "sweep",
        cfg,
        json!({ "points": points.len(), "gamma_is_factor": relative }),
    );
    let mut csv = String::new();
    let header = [
        "sigma_bar",
        "mu",
        "nu",
        "gamma_input",
        "status",
        "eta_s",
        "rho_s",
        "gamma",
        "gamma_star",
        "leading_mode",
        "classification",
        "lambda_leading",
        "fitted_rate",
        "rate_rel_err",
        "termination",
    ];
    row(&mut csv, &header.map(String::from));
    for r in &rows {
        let tag = |v: Option<String>| v.unwrap_or_default();
        row(
            &mut csv,
            &[
                num(r.sigma_bar),
                num(r.mu),
                num(r.nu),
                num(r.gamma_input),
                r.status.clone(),
                opt(r.eta_s),
                opt(r.rho_s),
                opt(r.gamma),
                opt(r.gamma_star),
                tag(r.leading_mode.map(|k| k.to_string())),
                tag(r.classification.map(|c| format!("{c:?}").to_lowercase())),
                opt(r.lambda_leading),
                opt(r.fitted_rate),
                opt(r.rate_rel_err),
                tag(r.termination.map(|t| {
                    serde_json::to_value(t)
                        .unwrap()
                        .as_str()
                        .unwrap()
                        .to_string()
                })),
            ],
        );
    }
    let mut out = Outputs::new(cfg, dir);
    out.csv("sweep.csv", &prov, csv);
    out.json("sweep.json", &prov, &rows);
    out.flush()
}
