//! Run configuration: a TOML file with at most two levels of nesting,
//! unknown keys rejected, plus `key=value` overrides on dotted paths.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hilbert::{fock_state, projector, thermal_state, SpaceDims, GROUND};
use crate::lindblad::QuantumState;
use crate::linalg::ComplexMatrix;

/// Correlation window in units of the qubit lifetime 1/γ.
pub const DEFAULT_WINDOW_LIFETIMES: f64 = 12.0;
/// Samples per NEMS period.
pub const DEFAULT_SAMPLES_PER_PERIOD: f64 = 16.0;
pub const DEFAULT_EVOLVE_STEPS: usize = 2000;
pub const DEFAULT_N_MAX_PEAKS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub fock_cutoff: usize,
    pub seed_state: SeedState,
    pub device: DeviceParams,
    pub time: TimeConfig,
    pub spectrum: SpectrumConfig,
    pub outputs: OutputConfig,
}

/// Initial NEMS state; the qubit starts in its ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedState {
    Vacuum,
    /// Thermal at the reservoir occupation `device.n_bar`.
    Thermal,
    Fock(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    /// Correlation window; defaults to 12/γ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Correlation sampling step; defaults to π/(8ω).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Number of steps of the density-matrix evolution over `t_max`.
    pub evolve_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub zero_pad_factor: usize,
    pub n_max_peaks: usize,
    /// Written frequency range; defaults to the comb ± 10|χ|.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fock_cutoff: SpaceDims::DEFAULT_FOCK_CUTOFF,
            seed_state: SeedState::Thermal,
            device: DeviceParams::default(),
            time: TimeConfig::default(),
            spectrum: SpectrumConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_max: None, dt: None, evolve_steps: DEFAULT_EVOLVE_STEPS }
    }
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { zero_pad_factor: 4, n_max_peaks: DEFAULT_N_MAX_PEAKS, omega_min: None, omega_max: None }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![OutputFormat::Csv, OutputFormat::Json] }
    }
}

impl RunConfig {
    /// Parses TOML text, applies overrides, and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::Config(format!("invalid config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate().map_err(|e| Error::Config(e.to_string()))?;
        SpaceDims::new(self.fock_cutoff).map_err(|e| Error::Config(e.to_string()))?;
        let (t_max, dt) = (self.t_max(), self.dt());
        if !(dt > 0.0 && t_max > dt && t_max.is_finite()) {
            return Err(Error::Config(format!("need t_max > dt > 0, got t_max = {t_max}, dt = {dt}")));
        }
        if self.time.evolve_steps == 0 {
            return Err(Error::Config("time.evolve_steps must be at least 1".into()));
        }
        if self.spectrum.zero_pad_factor == 0 || self.spectrum.n_max_peaks == 0 {
            return Err(Error::Config("spectrum.zero_pad_factor and spectrum.n_max_peaks must be at least 1".into()));
        }
        if let SeedState::Fock(k) = self.seed_state {
            if k >= self.fock_cutoff {
                return Err(Error::Config(format!("Fock seed {k} exceeds the cutoff {}", self.fock_cutoff)));
            }
        }
        if let (Some(lo), Some(hi)) = (self.spectrum.omega_min, self.spectrum.omega_max) {
            if lo >= hi {
                return Err(Error::Config("spectrum.omega_min must be below spectrum.omega_max".into()));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> SpaceDims {
        SpaceDims::new(self.fock_cutoff).expect("validated cutoff")
    }

    pub fn t_max(&self) -> f64 {
        self.time.t_max.unwrap_or_else(|| {
            let g = self.device.gamma.max(self.device.kappa);
            if g > 0.0 {
                DEFAULT_WINDOW_LIFETIMES / g
            } else {
                1000.0 * self.dt()
            }
        })
    }

    pub fn dt(&self) -> f64 {
        self.time.dt.unwrap_or(2.0 * PI / (DEFAULT_SAMPLES_PER_PERIOD * self.device.omega))
    }

    pub fn nems_seed(&self) -> Result<ComplexMatrix> {
        let n = self.fock_cutoff;
        match self.seed_state {
            SeedState::Vacuum => Ok(projector(0, n)),
            SeedState::Thermal => thermal_state(self.device.n_bar, n),
            SeedState::Fock(k) => fock_state(k, n),
        }
    }

    /// Qubit ground state ⊗ NEMS seed.
    pub fn initial_state(&self) -> Result<QuantumState> {
        QuantumState::product(&projector(GROUND, 2), &self.nems_seed()?, self.dims())
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.outputs.formats.contains(&f)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Sets `a.b = value`. The value is read as a TOML literal, falling back to a
/// bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let path: Vec<&str> = key.split('.').collect();
    if key.is_empty() || path.len() > 2 || path.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` must be `name` or `section.name`")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut target = table;
    for part in &path[..path.len() - 1] {
        let entry = target
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        target = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path `{key}`: `{part}` is not a section")))?;
    }
    target.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}
