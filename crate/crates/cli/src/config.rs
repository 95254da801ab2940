//! Run configuration: a single TOML file with a strict schema, plus
//! `KEY=VALUE` overrides applied to the parsed tree before validation.

use std::path::{Path, PathBuf};

use necrostrip_core::elliptic::geometry_margin;
use necrostrip_core::evolution::{initial_data_bound, GridConfig, Scheme, SimulationConfig};
use necrostrip_core::fourier::periodic_nodes;
use necrostrip_core::{
    flat_stationary, gamma_star, validate_params, FlatStationary, RawParams, TumorParams,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub sigma_hat: f64,
    pub sigma_tilde: f64,
    pub sigma_bar: f64,
    pub mu: f64,
    pub nu: f64,
    /// Absolute adhesiveness. Exactly one of `gamma` and `gamma_factor` is required.
    pub gamma: Option<f64>,
    /// Adhesiveness as a multiple of the critical value `gamma_*`.
    pub gamma_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationaryConfig {
    /// Rows of `profiles.csv`.
    pub samples: usize,
    /// Samples per layer used by the residual report.
    pub residual_samples: usize,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            samples: 201,
            residual_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub k_max: u32,
    /// Dissolution rates for `gamma_star_vs_nu.csv`. Empty skips the file.
    pub nu_grid: Vec<f64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            k_max: 64,
            nu_grid: Vec::new(),
        }
    }
}

/// One term `amplitude * cos(k x + phase)` of the initial surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub dt0: f64,
    pub dt_max: f64,
    pub max_rel_change: f64,
    pub scheme: Scheme,
    pub fit_window: f64,
    pub well_balanced: bool,
    /// Highest mode written to the trajectory and rate files.
    pub report_k_max: usize,
    pub rho0: Vec<ModeSpec>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        let sim = SimulationConfig::default();
        Self {
            t_final: sim.t_final,
            dt0: sim.dt0,
            dt_max: sim.dt_max,
            max_rel_change: sim.max_rel_change,
            scheme: sim.scheme,
            fit_window: sim.fit_window,
            well_balanced: sim.well_balanced,
            report_k_max: 8,
            rho0: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JacobianConfig {
    pub k_min: u32,
    pub k_max: u32,
    pub epsilon: f64,
    /// Grids probed in order; the `order` column compares consecutive ones.
    /// Empty means the `[grid]` section alone.
    pub grids: Vec<GridConfig>,
}

impl Default for JacobianConfig {
    fn default() -> Self {
        Self {
            k_min: 0,
            k_max: 8,
            epsilon: 1e-4,
            grids: Vec::new(),
        }
    }
}

/// Axes of a parameter sweep. Unset axes keep the `[params]` value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub sigma_bar: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_factor: Vec<f64>,
    /// Also run a simulation per point and report the fitted rate of the leading mode.
    pub simulate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Not part of the provenance block, so relocating a run keeps its files identical.
    #[serde(skip_serializing)]
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub stationary: StationaryConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub jacobian: JacobianConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        for raw in overrides {
            apply_override(&mut table, raw)?;
        }
        let merged = toml::to_string(&table).map_err(|e| CliError::Parse(e.to_string()))?;
        let cfg: RunConfig = toml::from_str(&merged).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    fn check(&self) -> CliResult<()> {
        match (self.params.gamma, self.params.gamma_factor) {
            (Some(_), Some(_)) => {
                return Err(CliError::Invalid(
                    "set only one of params.gamma and params.gamma_factor".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Invalid(
                    "params.gamma or params.gamma_factor is required".into(),
                ))
            }
            (_, Some(f)) if !(f > 0.0 && f.is_finite()) => {
                return Err(CliError::Invalid(format!(
                    "params.gamma_factor must be positive, got {f}"
                )))
            }
            _ => {}
        }
        if self.stationary.samples < 2 || self.stationary.residual_samples < 2 {
            return Err(CliError::Invalid(
                "stationary sample counts must be at least 2".into(),
            ));
        }
        if self.jacobian.k_min > self.jacobian.k_max {
            return Err(CliError::Invalid(format!(
                "jacobian.k_min ({}) exceeds jacobian.k_max ({})",
                self.jacobian.k_min, self.jacobian.k_max
            )));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Invalid("output.formats must not be empty".into()));
        }
        if !self.sweep.gamma.is_empty() && !self.sweep.gamma_factor.is_empty() {
            return Err(CliError::Invalid(
                "set only one of sweep.gamma and sweep.gamma_factor".into(),
            ));
        }
        Ok(())
    }

    pub fn simulation(&self) -> SimulationConfig {
        let e = &self.evolution;
        SimulationConfig {
            t_final: e.t_final,
            dt0: e.dt0,
            dt_max: e.dt_max,
            max_rel_change: e.max_rel_change,
            scheme: e.scheme,
            fit_window: e.fit_window,
            well_balanced: e.well_balanced,
            grid: self.grid,
        }
    }

    pub fn raw_params(&self, gamma: f64) -> RawParams {
        let p = &self.params;
        RawParams {
            sigma_hat: p.sigma_hat,
            sigma_tilde: p.sigma_tilde,
            sigma_bar: p.sigma_bar,
            mu: p.mu,
            nu: p.nu,
            gamma,
        }
    }

    /// Validated constants and flat state, with `gamma` taken literally (or
    /// `1` when given as a factor). Does not need the spectrum.
    pub fn stationary_model(&self) -> CliResult<(TumorParams, FlatStationary)> {
        let params = validate_params(self.raw_params(self.params.gamma.unwrap_or(1.0)))?;
        let fs = flat_stationary(&params)?;
        Ok((params, fs))
    }

    /// Everything a run needs, with `gamma_factor` turned into an absolute value.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let (params, fs) = self.stationary_model()?;
        let gamma = match self.params.gamma_factor {
            Some(f) => f * gamma_star(&params, &fs, self.spectral.k_max)?.value,
            None => params.gamma,
        };
        let params = params.with_gamma(gamma)?;
        Ok(Resolved { params, fs, gamma })
    }

    /// Samples the configured initial surface on the `[grid]` nodes and checks
    /// it against the smallness bound of the flat state.
    pub fn initial_surface(&self, fs: &FlatStationary) -> CliResult<Vec<f64>> {
        let nx = self.grid.nx;
        for m in &self.evolution.rho0 {
            if m.k as usize >= nx / 2 {
                return Err(CliError::Invalid(format!(
                    "evolution.rho0 mode {} is not resolved by nx = {nx}",
                    m.k
                )));
            }
            if !m.amplitude.is_finite() || !m.phase.is_finite() {
                return Err(CliError::Invalid(
                    "evolution.rho0 entries must be finite".into(),
                ));
            }
        }
        let rho: Vec<f64> = periodic_nodes(nx)
            .iter()
            .map(|x| {
                self.evolution
                    .rho0
                    .iter()
                    .map(|m| m.amplitude * (m.k as f64 * x + m.phase).cos())
                    .sum()
            })
            .collect();
        let amp = rho.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let bound = initial_data_bound(fs);
        if amp > bound {
            return Err(CliError::Invalid(format!(
                "max |rho0| = {amp:.6e} exceeds the smallness bound (rho_s - eta_s)/8 = {bound:.6e} \
                 (geometry margin {:.6e})",
                geometry_margin(fs)
            )));
        }
        Ok(rho)
    }

    pub fn writes(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub params: TumorParams,
    pub fs: FlatStationary,
    pub gamma: f64,
}

/// Sets a dotted key such as `params.nu=2` or `output.dir="runs/a"`.
/// Values are read as TOML and fall back to a bare string.
pub fn apply_override(table: &mut toml::Table, raw: &str) -> CliResult<()> {
    let err = |reason: &str| CliError::Override {
        raw: raw.to_string(),
        reason: reason.to_string(),
    };
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| err("expected KEY=VALUE"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(err("empty key segment"));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));

    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = table;
    for seg in parents {
        let entry = node
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| err(&format!("`{seg}` is not a table")))?;
    }
    node.insert(last.to_string(), parsed);
    Ok(())
}
