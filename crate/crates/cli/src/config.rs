//! TOML experiment configuration and its translation into solver types.

use serde::Deserialize;

use gnls_core::inversion::{
    DataRoute, InversionGrid, InversionMethod, RecoveryConfig, Regularizer, XiChoice,
};
use gnls_core::numerics::SpatialGrid;
use gnls_core::potential::{CoefficientFunction, NonlinearPotential};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default)]
    pub extract: ExtractConfig,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub roundtrip: RoundtripConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub b: f64,
    pub degree: usize,
    #[serde(default)]
    pub coefficients: Vec<CoefficientConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub power: usize,
    pub kind: String,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub wavenumber: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    /// Spatial panels on [0, b] for forward solves.
    pub nx: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
    /// Explicit incident amplitudes; empty means derive from `eps_count`.
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default = "default_eps_count")]
    pub eps_count: usize,
    /// Trial amplitude radius for the existence estimate.
    #[serde(default = "default_r_amplitude")]
    pub r_amplitude: f64,
}

fn default_eps_count() -> usize {
    5
}

fn default_r_amplitude() -> f64 {
    1.0
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self {
            nx: 2000,
            k_min: 0.5,
            k_max: 5.0,
            k_count: 20,
            eps: Vec::new(),
            eps_count: default_eps_count(),
            r_amplitude: default_r_amplitude(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractConfig {
    pub n_max: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { n_max: 5 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionConfig {
    #[serde(default = "default_n_target")]
    pub n_target: usize,
    /// "auto" or a fixed positive number.
    #[serde(default)]
    pub xi: XiSetting,
    #[serde(default = "default_m_modes")]
    pub m_modes: usize,
    #[serde(default = "default_nx_inv")]
    pub nx_inv: usize,
    /// "direct" or "neumann".
    #[serde(default = "default_method")]
    pub method: String,
    /// "identity" or "first_difference".
    #[serde(default = "default_regularizer")]
    pub regularizer: String,
    /// Use the F-route (A and B data) when true, the E-route (B data only)
    /// when false.
    #[serde(default = "default_use_f")]
    pub use_f: bool,
    /// "closed" or "periodic".
    #[serde(default = "default_grid_kind")]
    pub grid: String,
}

fn default_n_target() -> usize {
    3
}
fn default_m_modes() -> usize {
    64
}
fn default_nx_inv() -> usize {
    512
}
fn default_method() -> String {
    "direct".to_string()
}
fn default_regularizer() -> String {
    "first_difference".to_string()
}
fn default_use_f() -> bool {
    true
}
fn default_grid_kind() -> String {
    "closed".to_string()
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            n_target: default_n_target(),
            xi: XiSetting::default(),
            m_modes: default_m_modes(),
            nx_inv: default_nx_inv(),
            method: default_method(),
            regularizer: default_regularizer(),
            use_f: default_use_f(),
            grid: default_grid_kind(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum XiSetting {
    Keyword(String),
    Fixed(f64),
}

impl Default for XiSetting {
    fn default() -> Self {
        XiSetting::Keyword("auto".to_string())
    }
}

/// Data source for `invert`: third-order closed forms or the cascade of the
/// configured potential.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// "constant" | "exponential" | "synthetic" | "series".
    pub source: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundtripConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-2
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

fn default_out_dir() -> String {
    "out".to_string()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
        }
    }
}

pub fn load(path: &std::path::Path) -> Result<(ExperimentConfig, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    validate(&config)?;
    Ok((config, text))
}

fn validate(config: &ExperimentConfig) -> Result<(), CliError> {
    let p = &config.potential;
    if !(p.b.is_finite() && p.b > 0.0) {
        return Err(CliError::Config(format!(
            "potential.b must be positive, got {}",
            p.b
        )));
    }
    for c in &p.coefficients {
        if c.power > p.degree {
            return Err(CliError::Config(format!(
                "potential.coefficients: power {} exceeds potential.degree {}",
                c.power, p.degree
            )));
        }
        match c.kind.as_str() {
            "zero" => {}
            "constant" => {
                if c.value.is_none() {
                    return Err(CliError::Config(format!(
                        "potential.coefficients[power={}]: constant kind needs `value`",
                        c.power
                    )));
                }
            }
            "exponential" => {
                if c.rate.is_none() {
                    return Err(CliError::Config(format!(
                        "potential.coefficients[power={}]: exponential kind needs `rate`",
                        c.power
                    )));
                }
            }
            "sinusoid" => {
                if c.amplitude.is_none() || c.wavenumber.is_none() {
                    return Err(CliError::Config(format!(
                        "potential.coefficients[power={}]: sinusoid kind needs `amplitude` and `wavenumber`",
                        c.power
                    )));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "potential.coefficients[power={}]: unknown kind {other:?} (expected zero, constant, exponential, sinusoid)",
                    c.power
                )));
            }
        }
    }
    let g = &config.grids;
    if g.nx < 2 || !g.nx.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "grids.nx must be even and >= 2, got {}",
            g.nx
        )));
    }
    if g.k_count == 0 || !(g.k_min.is_finite() && g.k_max.is_finite()) || g.k_min > g.k_max {
        return Err(CliError::Config(
            "grids.k_min/k_max/k_count do not describe a valid grid".to_string(),
        ));
    }
    if g.k_min <= 0.0 && g.k_max >= 0.0 {
        return Err(CliError::Config(
            "grids: the k grid must exclude 0".to_string(),
        ));
    }
    if g.eps.contains(&0.0) {
        return Err(CliError::Config(
            "grids.eps_list entries must be nonzero".to_string(),
        ));
    }
    if g.eps.is_empty() && g.eps_count == 0 {
        return Err(CliError::Config(
            "grids: need explicit eps or eps_count > 0".to_string(),
        ));
    }
    let inv = &config.inversion;
    if let XiSetting::Keyword(word) = &inv.xi {
        if word != "auto" {
            return Err(CliError::Config(format!(
                "inversion.xi must be \"auto\" or a positive number, got {word:?}"
            )));
        }
    }
    if let XiSetting::Fixed(value) = &inv.xi {
        if !(value.is_finite() && *value > 0.0) {
            return Err(CliError::Config(format!(
                "inversion.xi must be positive, got {value}"
            )));
        }
    }
    if inv.n_target < 2 {
        return Err(CliError::Config(format!(
            "inversion.n_target must be >= 2, got {}",
            inv.n_target
        )));
    }
    if !matches!(inv.method.as_str(), "direct" | "neumann") {
        return Err(CliError::Config(format!(
            "inversion.method must be \"direct\" or \"neumann\", got {:?}",
            inv.method
        )));
    }
    if !matches!(inv.regularizer.as_str(), "identity" | "first_difference") {
        return Err(CliError::Config(format!(
            "inversion.regularizer must be \"identity\" or \"first_difference\", got {:?}",
            inv.regularizer
        )));
    }
    if !matches!(inv.grid.as_str(), "closed" | "periodic") {
        return Err(CliError::Config(format!(
            "inversion.grid must be \"closed\" or \"periodic\", got {:?}",
            inv.grid
        )));
    }
    if let Some(data) = &config.data {
        match data.source.as_str() {
            "constant" => {
                if data.gamma.is_none() {
                    return Err(CliError::Config(
                        "data.source = \"constant\" needs data.gamma".to_string(),
                    ));
                }
            }
            "exponential" => {
                if data.alpha.is_none() {
                    return Err(CliError::Config(
                        "data.source = \"exponential\" needs data.alpha".to_string(),
                    ));
                }
            }
            "synthetic" => {}
            "series" => {
                if data.path.is_none() {
                    return Err(CliError::Config(
                        "data.source = \"series\" needs data.path".to_string(),
                    ));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "data.source must be constant, exponential, synthetic, or series; got {other:?}"
                )));
            }
        }
    }
    Ok(())
}

impl PotentialConfig {
    pub fn build(&self) -> Result<NonlinearPotential, CliError> {
        let b = self.b;
        let mut coeffs = vec![CoefficientFunction::zero(b); self.degree + 1];
        for c in &self.coefficients {
            coeffs[c.power] = match c.kind.as_str() {
                "zero" => CoefficientFunction::zero(b),
                "constant" => CoefficientFunction::constant(c.value.unwrap(), b),
                "exponential" => CoefficientFunction::exponential(c.rate.unwrap(), b),
                "sinusoid" => {
                    CoefficientFunction::sinusoid(c.amplitude.unwrap(), c.wavenumber.unwrap(), b)
                }
                _ => unreachable!("validated"),
            };
        }
        NonlinearPotential::new(b, coeffs).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl GridsConfig {
    pub fn spatial_grid(&self, b: f64) -> Result<SpatialGrid, CliError> {
        SpatialGrid::new(b, self.nx).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn k_grid(&self) -> Vec<f64> {
        if self.k_count == 1 {
            return vec![self.k_min];
        }
        (0..self.k_count)
            .map(|i| self.k_min + (self.k_max - self.k_min) * i as f64 / (self.k_count - 1) as f64)
            .collect()
    }
}

impl InversionConfig {
    pub fn recovery_config(&self, b: f64) -> Result<RecoveryConfig, CliError> {
        let xi = match &self.xi {
            XiSetting::Keyword(_) => XiChoice::Auto,
            XiSetting::Fixed(value) => XiChoice::Fixed(*value),
        };
        let grid = match self.grid.as_str() {
            "closed" => InversionGrid::closed(b, self.nx_inv),
            _ => InversionGrid::periodic(b, self.nx_inv),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        let regularizer = match self.regularizer.as_str() {
            "identity" => Regularizer::Identity,
            _ => Regularizer::FirstDifference,
        };
        let method = match self.method.as_str() {
            "neumann" => InversionMethod::Neumann {
                max_terms: 200,
                tol: 1e-12,
                force: false,
            },
            _ => InversionMethod::Direct { regularizer },
        };
        Ok(RecoveryConfig {
            xi,
            m_max: self.m_modes,
            grid,
            route: if self.use_f {
                DataRoute::FData
            } else {
                DataRoute::EData
            },
            method,
            compute_norms: false,
        })
    }
}
