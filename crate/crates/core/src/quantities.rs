//! Physical inputs and their reduction to dimensionless groups.
//!
//! Energies are expressed as temperatures in Kelvin with the Boltzmann
//! constant set to 1, so the characteristic nuclear energy appears as the
//! temperature `temp_nr`. Times are years. No other unit exists anywhere in
//! the crate; all core math runs on the dimensionless groups
//! `alpha = temp_nr / temp_0` and `beta = t_0 / t_nr`.

use thiserror::Error;

/// Validation failures for model parameters and parameter sources.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} must be finite (got {value})")]
    NonFinite { field: &'static str, value: f64 },
    #[error("{field} must be strictly positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("temp_nr = {temp_nr} K must exceed temp_0 = {temp_0} K")]
    WienLimit { temp_nr: f64, temp_0: f64 },
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
}

fn ensure_positive(field: &'static str, value: f64) -> Result<f64, ParamError> {
    if !value.is_finite() {
        return Err(ParamError::NonFinite { field, value });
    }
    if value <= 0.0 {
        return Err(ParamError::NonPositive { field, value });
    }
    Ok(value)
}

/// The four physical inputs of the model.
///
/// * `temp_nr`: characteristic nuclear energy as a temperature, Kelvin.
/// * `t_nr`: mean nuclear lifetime (inverse decay rate), years.
/// * `t_0`: age of the universe, years.
/// * `temp_0`: present radiation temperature, Kelvin.
///
/// Construction validates that every field is strictly positive and finite
/// and that `temp_nr > temp_0`; nuclear energies far above the background
/// temperature are what puts the peaked spectral weight in the Wien tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    temp_nr: f64,
    t_nr: f64,
    t_0: f64,
    temp_0: f64,
}

impl ModelParams {
    pub fn new(temp_nr: f64, t_nr: f64, t_0: f64, temp_0: f64) -> Result<Self, ParamError> {
        let temp_nr = ensure_positive("temp_nr", temp_nr)?;
        let t_nr = ensure_positive("t_nr", t_nr)?;
        let t_0 = ensure_positive("t_0", t_0)?;
        let temp_0 = ensure_positive("temp_0", temp_0)?;
        if temp_nr <= temp_0 {
            return Err(ParamError::WienLimit { temp_nr, temp_0 });
        }
        Ok(Self {
            temp_nr,
            t_nr,
            t_0,
            temp_0,
        })
    }

    /// Lower-bound nuclear parameters with the standard age and background
    /// temperature: (1e6 K, 1e6 yr, 1.5e10 yr, 3 K).
    pub fn fiducial() -> Self {
        Self {
            temp_nr: 1e6,
            t_nr: 1e6,
            t_0: 1.5e10,
            temp_0: 3.0,
        }
    }

    pub fn temp_nr(&self) -> f64 {
        self.temp_nr
    }

    pub fn t_nr(&self) -> f64 {
        self.t_nr
    }

    pub fn t_0(&self) -> f64 {
        self.t_0
    }

    pub fn temp_0(&self) -> f64 {
        self.temp_0
    }

    /// Nuclear decay rate `1 / t_nr`, per year.
    pub fn gamma(&self) -> f64 {
        1.0 / self.t_nr
    }

    /// Reduce to the dimensionless groups the core math runs on.
    pub fn dimensionless(&self) -> DimensionlessParams {
        DimensionlessParams {
            alpha: self.temp_nr / self.temp_0,
            beta: self.t_0 / self.t_nr,
            t_0: self.t_0,
        }
    }
}

/// Dimensionless groups `alpha = temp_nr / temp_0` and `beta = t_0 / t_nr`,
/// with `t_0` retained to map dimensionless times back to years.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub alpha: f64,
    pub beta: f64,
    pub t_0: f64,
}

/// Partial parameter set collected from a config file or from CLI flags.
///
/// Sources merge field by field, later sources winning, and resolve against
/// the fiducial defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub temp_nr: Option<f64>,
    pub t_nr: Option<f64>,
    pub t_0: Option<f64>,
    pub temp_0: Option<f64>,
}

impl ParamOverrides {
    /// Parse a plain-text `key = value` config.
    ///
    /// Recognized keys: `temp_nr_kelvin`, `t_nr_years`, `t_0_years`,
    /// `temp_0_kelvin`. Values may use decimal or scientific notation.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_config_str(text: &str) -> Result<Self, ParamError> {
        let mut out = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ParamError::Config {
                line,
                reason: format!("expected `key = value`, got `{trimmed}`"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| ParamError::Config {
                line,
                reason: format!("`{}` is not a number", value.trim()),
            })?;
            let slot = match key {
                "temp_nr_kelvin" => &mut out.temp_nr,
                "t_nr_years" => &mut out.t_nr,
                "t_0_years" => &mut out.t_0,
                "temp_0_kelvin" => &mut out.temp_0,
                _ => {
                    return Err(ParamError::Config {
                        line,
                        reason: format!("unknown key `{key}`"),
                    })
                }
            };
            *slot = Some(value);
        }
        Ok(out)
    }

    /// Merge with a later source; fields set in `later` win.
    pub fn merged_with(self, later: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            temp_nr: later.temp_nr.or(self.temp_nr),
            t_nr: later.t_nr.or(self.t_nr),
            t_0: later.t_0.or(self.t_0),
            temp_0: later.temp_0.or(self.temp_0),
        }
    }

    /// Resolve against the fiducial defaults into validated parameters.
    pub fn resolve(self) -> Result<ModelParams, ParamError> {
        let base = ModelParams::fiducial();
        ModelParams::new(
            self.temp_nr.unwrap_or(base.temp_nr),
            self.t_nr.unwrap_or(base.t_nr),
            self.t_0.unwrap_or(base.t_0),
            self.temp_0.unwrap_or(base.temp_0),
        )
    }
}
