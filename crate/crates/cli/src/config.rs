use std::path::{Path, PathBuf};

use floquet_chopper::protocol::{CouplingProtocol, ShapeParams, ShapeRegistry};
use floquet_chopper::single_photon::ScatterParams;
use floquet_chopper::two_photon::default_horizon;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MIN_GRID: usize = 16;
pub const DEFAULT_N_GRID: usize = 2048;
pub const DEFAULT_N_TAU: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One run: protocol, drive, detuning, nonlinearity and sampling grids.
/// `taud_horizon` and `tauc_over_T` are in units of `1/Γ⁽⁰⁾` and `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: String,
    #[serde(default = "default_g0")]
    pub g0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_off: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<(u32, f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default)]
    pub delta_over_gamma0: f64,
    #[serde(default)]
    pub u_over_gamma0: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    #[serde(default = "default_n_tau")]
    pub n_tauc: usize,
    #[serde(default = "default_n_tau")]
    pub n_taud: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taud_horizon: Option<f64>,
    #[serde(default, rename = "tauc_over_T", skip_serializing_if = "Option::is_none")]
    pub tauc_over_t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_g0() -> f64 {
    1.0
}

fn default_n_grid() -> usize {
    DEFAULT_N_GRID
}

fn default_n_tau() -> usize {
    DEFAULT_N_TAU
}

impl RunConfig {
    pub fn new(protocol: &str, beta: f64) -> Self {
        Self {
            protocol: protocol.to_owned(),
            g0: 1.0,
            duty: None,
            g_off: None,
            harmonics: Vec::new(),
            beta: Some(beta),
            omega: None,
            delta_over_gamma0: 0.0,
            u_over_gamma0: 0.0,
            n_grid: DEFAULT_N_GRID,
            n_tauc: DEFAULT_N_TAU,
            n_taud: DEFAULT_N_TAU,
            taud_horizon: None,
            tauc_over_t: None,
            output: None,
            format: Format::Csv,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        match (self.beta, self.omega) {
            (Some(_), Some(_)) | (None, None) => return bad("exactly one of beta and omega must be given".into()),
            (Some(x), None) | (None, Some(x)) if !(x.is_finite() && x > 0.0) => {
                return bad(format!("drive rate must be positive, got {x}"))
            }
            _ => {}
        }
        for (name, n) in [("n_tauc", self.n_tauc), ("n_taud", self.n_taud), ("n_grid", self.n_grid)] {
            if n < MIN_GRID {
                return bad(format!("{name} must be at least {MIN_GRID}, got {n}"));
            }
        }
        if !self.n_grid.is_power_of_two() || self.n_grid < 64 {
            return bad(format!("n_grid must be a power of two >= 64, got {}", self.n_grid));
        }
        if !(self.g0.is_finite() && self.delta_over_gamma0.is_finite() && self.u_over_gamma0.is_finite()) {
            return bad("g0, delta_over_gamma0 and u_over_gamma0 must be finite".into());
        }
        if let Some(h) = self.taud_horizon {
            if !(h.is_finite() && h > 0.0) {
                return bad(format!("taud_horizon must be positive, got {h}"));
            }
        }
        if let Some(cuts) = &self.tauc_over_t {
            if cuts.is_empty() || cuts.iter().any(|c| !c.is_finite()) {
                return bad("tauc_over_T must be a non-empty list of finite numbers".into());
            }
        }
        Ok(())
    }

    fn shape_params(&self) -> ShapeParams {
        ShapeParams { g0: self.g0, duty: self.duty, g_off: self.g_off, harmonics: self.harmonics.clone() }
    }

    pub fn protocol(&self) -> Result<CouplingProtocol, CliError> {
        self.validate()?;
        let shape = ShapeRegistry::with_builtins().build(&self.protocol, &self.shape_params())?;
        Ok(match (self.beta, self.omega) {
            (Some(beta), _) => CouplingProtocol::with_beta(shape, beta)?,
            (None, Some(omega)) => CouplingProtocol::new(shape, omega)?,
            (None, None) => unreachable!("validated"),
        })
    }

    pub fn scatter_params(&self) -> Result<ScatterParams, CliError> {
        let kernel = self.protocol()?.rate_kernel(self.n_grid)?;
        let g0 = kernel.gamma0();
        Ok(ScatterParams::new(kernel, self.delta_over_gamma0 * g0, self.u_over_gamma0 * g0)?)
    }

    /// Fills defaults that depend on the protocol so the header reproduces the run.
    pub fn resolved(&self, params: &ScatterParams) -> Self {
        let mut cfg = self.clone();
        cfg.output = None;
        if cfg.taud_horizon.is_none() {
            cfg.taud_horizon = Some(default_horizon(params) * params.gamma0());
        }
        cfg
    }
}
