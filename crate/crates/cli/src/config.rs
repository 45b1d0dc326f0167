//! Flat key-value run configuration: defaults, figure presets, config files
//! and `--set` overrides, in that order of precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use trs_core::bath::{BathSpec, SpectralDensity};
use trs_core::quadrature::QuadSpec;
use trs_core::response::{GapConvention, Simulation, SystemParams};
use trs_core::TimeGrid;

use crate::CliError;

/// Hard cap on the number of grid points.
pub const MAX_GRID_POINTS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Ohmic,
    Tabulated,
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ohmic => write!(f, "ohmic"),
            Self::Tabulated => write!(f, "tabulated"),
        }
    }
}

/// Fully resolved run configuration. Serialized verbatim into every report
/// so outputs are self-describing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Drive frequency in units of omega_0.
    pub omega_p: f64,
    /// Which gap is one unit: "renormalized" or "bare".
    pub gap_convention: String,
    /// Lower-level energy.
    pub e0: f64,
    /// Spectral density kind.
    pub density: DensityKind,
    /// Ohmic coupling strength.
    pub s: f64,
    /// Ohmic cutoff frequency.
    pub omega_c: f64,
    /// Two-column (omega, h) file for tabulated densities.
    pub table_path: Option<String>,
    /// Temperature T~ = 1/beta~.
    pub temperature: f64,
    /// End of the time grid.
    pub t_end: f64,
    /// Grid step.
    pub dt: f64,
    /// Relative band used for stationarity and rise times.
    pub stationarity_tol: f64,
    /// Fraction of the grid treated as the asymptotic tail.
    pub tail_fraction: f64,
    /// Output directory.
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega_p: 1.0,
            gap_convention: "renormalized".into(),
            e0: 0.0,
            density: DensityKind::Ohmic,
            s: 1.0,
            omega_c: 0.2,
            table_path: None,
            temperature: 10.0,
            t_end: 200.0,
            dt: 0.01,
            stationarity_tol: 1e-3,
            tail_fraction: 0.2,
            out_dir: "out".into(),
        }
    }
}

/// Named parameter sets for the four reference scenarios; each also picks a
/// time range long enough for the slow case-2 rise at its cutoff.
pub const PRESETS: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        match name {
            "fig1" => {
                cfg.temperature = 10.0;
            }
            "fig2" => {
                cfg.temperature = 1.0;
            }
            "fig3" => {
                cfg.temperature = 0.2;
            }
            "fig4" => {
                cfg.temperature = 1e4;
                cfg.omega_c = 0.02;
                cfg.t_end = 1500.0;
                cfg.dt = 0.05;
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset '{other}' (expected one of {PRESETS:?})"
                )))
            }
        }
        Ok(cfg)
    }

    /// Apply one `key = value` pair. Unknown keys are rejected.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num(key: &str, value: &str) -> Result<f64, CliError> {
            value.trim().parse::<f64>().map_err(|_| {
                CliError::Config(format!("{key}: cannot parse '{value}' as a number"))
            })
        }
        let value = value.trim();
        match key {
            "omega_p" => self.omega_p = num(key, value)?,
            "gap_convention" => match value {
                "renormalized" | "bare" => self.gap_convention = value.into(),
                other => {
                    return Err(CliError::Config(format!(
                        "gap_convention: expected 'renormalized' or 'bare', got '{other}'"
                    )))
                }
            },
            "e0" => self.e0 = num(key, value)?,
            "density" => match value {
                "ohmic" => self.density = DensityKind::Ohmic,
                "tabulated" => self.density = DensityKind::Tabulated,
                other => {
                    return Err(CliError::Config(format!(
                        "density: expected 'ohmic' or 'tabulated', got '{other}'"
                    )))
                }
            },
            "s" => self.s = num(key, value)?,
            "omega_c" => self.omega_c = num(key, value)?,
            "table_path" => self.table_path = Some(value.to_string()),
            "temperature" => self.temperature = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "stationarity_tol" => self.stationarity_tol = num(key, value)?,
            "tail_fraction" => self.tail_fraction = num(key, value)?,
            "out_dir" => self.out_dir = value.to_string(),
            other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a config file: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            self.apply(key.trim(), value)?;
        }
        Ok(())
    }

    /// Apply a `--set key=value` override.
    pub fn apply_set(&mut self, pair: &str) -> Result<(), CliError> {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(CliError::Config(format!(
                "--set expects key=value, got '{pair}'"
            )));
        };
        self.apply(key.trim(), value)
    }

    /// Field-by-field validation; messages name the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.omega_p >= 0.0) || !self.omega_p.is_finite() {
            return bad(format!("omega_p must be >= 0, got {}", self.omega_p));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return bad(format!("temperature must be > 0, got {}", self.temperature));
        }
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return bad(format!("s must be >= 0, got {}", self.s));
        }
        if !(self.omega_c > 0.0) || !self.omega_c.is_finite() {
            return bad(format!("omega_c must be > 0, got {}", self.omega_c));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.t_end / self.dt > MAX_GRID_POINTS {
            return bad(format!(
                "t_end/dt = {:.3e} exceeds the grid cap of {MAX_GRID_POINTS:e} points",
                self.t_end / self.dt
            ));
        }
        if !(self.stationarity_tol > 0.0) || !self.stationarity_tol.is_finite() {
            return bad(format!(
                "stationarity_tol must be > 0, got {}",
                self.stationarity_tol
            ));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return bad(format!(
                "tail_fraction must be in (0, 0.5], got {}",
                self.tail_fraction
            ));
        }
        if !self.e0.is_finite() {
            return bad(format!("e0 must be finite, got {}", self.e0));
        }
        if self.density == DensityKind::Tabulated && self.table_path.is_none() {
            return bad("table_path is required when density = tabulated".into());
        }
        Ok(())
    }

    pub fn gap_convention_enum(&self) -> GapConvention {
        match self.gap_convention.as_str() {
            "bare" => GapConvention::BareGapIsOne,
            _ => GapConvention::RenormalizedGapIsOne,
        }
    }

    /// Build the core simulation inputs. Validates first.
    pub fn to_simulation(&self) -> Result<Simulation, CliError> {
        self.validate()?;
        let density = match self.density {
            DensityKind::Ohmic => SpectralDensity::ohmic(self.s, self.omega_c)?,
            DensityKind::Tabulated => {
                let path = self.table_path.as_ref().expect("validated above");
                load_density_table(Path::new(path))?
            }
        };
        let bath = BathSpec::new(density, 1.0 / self.temperature)?;
        let system = SystemParams {
            e0: self.e0,
            gap_convention: self.gap_convention_enum(),
            omega_p: self.omega_p,
        };
        let grid = TimeGrid::new(self.t_end, self.dt)?;
        Ok(Simulation {
            system,
            bath,
            grid,
            quad: QuadSpec::default(),
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.out_dir)
    }
}

/// Load a two-column (omega, h) table; whitespace separated, `#` comments.
pub fn load_density_table(path: &Path) -> Result<SpectralDensity, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read table {}: {e}", path.display())))?;
    let mut omega = Vec::new();
    let mut h = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |field: Option<&str>| -> Result<f64, CliError> {
            field
                .and_then(|v| f64::from_str(v).ok())
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "{}:{}: expected two numbers, got '{line}'",
                        path.display(),
                        lineno + 1
                    ))
                })
        };
        omega.push(parse(cols.next())?);
        h.push(parse(cols.next())?);
    }
    Ok(SpectralDensity::tabulated(omega, h)?)
}

/// Sweepable parameter axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Temperature,
    S,
    OmegaC,
    OmegaP,
}

impl Axis {
    pub fn key(&self) -> &'static str {
        match self {
            Self::Temperature => "temperature",
            Self::S => "s",
            Self::OmegaC => "omega_c",
            Self::OmegaP => "omega_p",
        }
    }

    pub fn set(&self, cfg: &mut RunConfig, value: f64) {
        match self {
            Self::Temperature => cfg.temperature = value,
            Self::S => cfg.s = value,
            Self::OmegaC => cfg.omega_c = value,
            Self::OmegaP => cfg.omega_p = value,
        }
    }
}

impl FromStr for Axis {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "temperature" => Ok(Self::Temperature),
            "s" => Ok(Self::S),
            "omega_c" => Ok(Self::OmegaC),
            "omega_p" => Ok(Self::OmegaP),
            other => Err(CliError::Config(format!(
                "unknown sweep axis '{other}' (expected temperature, s, omega_c or omega_p)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn presets_bind_their_parameters() {
        let fig1 = RunConfig::preset("fig1").unwrap();
        assert_eq!(
            (fig1.temperature, fig1.s, fig1.omega_c, fig1.omega_p),
            (10.0, 1.0, 0.2, 1.0)
        );
        assert_eq!(RunConfig::preset("fig2").unwrap().temperature, 1.0);
        assert_eq!(RunConfig::preset("fig3").unwrap().temperature, 0.2);
        let fig4 = RunConfig::preset("fig4").unwrap();
        assert_eq!((fig4.temperature, fig4.omega_c, fig4.s), (1e4, 0.02, 1.0));
        assert!(RunConfig::preset("fig5").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply("nonsense", "1").is_err());
        assert!(cfg.apply("dt", "fast").is_err());
        cfg.apply("dt", "-1").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("dt"), "message: {err}");
    }

    #[test]
    fn grid_cap_enforced() {
        let mut cfg = RunConfig::default();
        cfg.apply("t_end", "1e9").unwrap();
        cfg.apply("dt", "1e-2").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn set_override_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_set("temperature=0.5").unwrap();
        assert_eq!(cfg.temperature, 0.5);
        assert!(cfg.apply_set("temperature").is_err());
    }
}
