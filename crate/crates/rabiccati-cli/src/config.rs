//! Custom-model config files: JSON with top-level keys
//! `{mode, expressions, parameters, grid, tolerances}`.
//!
//! `mode: "X"` needs `expressions.mag` (A), `expressions.phase` (φ) and
//! `expressions.longitudinal` (Ω); `mode: "Theta"` needs
//! `expressions.theta`, `expressions.omega_mag` and
//! `expressions.omega_phase`. All expressions are in `t` and may mention
//! names bound under `parameters`.

use std::collections::BTreeMap;
use std::path::Path;

use rabiccati::expr::Params;
use rabiccati::timefn::RealFn;
use serde::Deserialize;

use crate::error::AppError;
use crate::model::Model;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    pub mode: Mode,
    pub expressions: BTreeMap<String, String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Mode {
    #[serde(rename = "X", alias = "x")]
    X,
    #[serde(rename = "Theta", alias = "theta")]
    Theta,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            t_max: 3.0,
            steps: 301,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quad")]
    pub quad: f64,
    #[serde(default = "default_rel")]
    pub rel: f64,
    #[serde(default = "default_abs")]
    pub abs: f64,
}

fn default_quad() -> f64 {
    1e-10
}
fn default_rel() -> f64 {
    1e-10
}
fn default_abs() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: default_quad(),
            rel: default_rel(),
            abs: default_abs(),
        }
    }
}

impl CustomConfig {
    pub fn load(path: &Path) -> Result<CustomConfig, AppError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| AppError::Usage(format!("malformed config {}: {e}", path.display())))
    }

    fn expression(&self, key: &str, binds: &Params) -> Result<RealFn, AppError> {
        let text = self.expressions.get(key).ok_or_else(|| {
            AppError::Usage(format!(
                "config expressions.{key} is required for this mode"
            ))
        })?;
        RealFn::parse(text, binds)
            .map_err(|e| AppError::Usage(format!("in expressions.{key} = `{text}`: {e}")))
    }

    /// Builds the model; `t_max` may override the config grid.
    pub fn build(&self, t_max_override: Option<f64>) -> Result<Model, AppError> {
        let binds: Params = self.parameters.clone().into_iter().collect();
        let t_max = t_max_override.unwrap_or(self.grid.t_max);
        if !t_max.is_finite() || t_max <= 0.0 || self.grid.steps < 2 {
            return Err(AppError::Usage(format!(
                "grid needs t_max > 0 and steps >= 2, got t_max={t_max}, steps={}",
                self.grid.steps
            )));
        }
        match self.mode {
            Mode::X => Model::from_x_recipe(
                "custom(X)",
                self.expression("mag", &binds)?,
                self.expression("phase", &binds)?,
                self.expression("longitudinal", &binds)?,
                t_max,
                self.tolerances.quad,
            ),
            Mode::Theta => Model::from_theta_recipe(
                "custom(Theta)",
                self.expression("omega_mag", &binds)?,
                self.expression("omega_phase", &binds)?,
                self.expression("theta", &binds)?,
                t_max,
                self.tolerances.quad,
            ),
        }
    }
}
