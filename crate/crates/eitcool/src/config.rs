//! Scenario files (TOML). Every physical quantity is a string with a unit.
//!
//! ```toml
//! [scenario]
//! name = "deit_scan"
//!
//! [[modes]]
//! label = "axial"
//! frequency = "904.6 kHz"
//!
//! [scheme]
//! kind = "double_eit"
//! mode = "axial"
//! delta = "3 Gamma"
//! field = "416 uT"
//!
//! [[scheme.lasers]]
//! label = "pi397"
//! rabi = "2 MHz"
//!
//! [experiment]
//! kind = "spectrum_scan"
//! start = "-1 MHz"
//! stop = "4 MHz"
//! points = 501
//! ```

use serde::{Deserialize, Serialize};

use crate::quantity::Quantity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scenario: Meta,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeConfig>,
    pub scheme: SchemeConfig,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// Pulse sequence for `cooling_trajectory`; every mode in `modes` is run
    /// through all pulses.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pulses: Vec<PulseConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Output file prefix; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub label: String,
    pub frequency: Quantity,
    /// Initial thermal occupation for runs on this mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_heating: Option<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    SingleEit,
    DoubleEit,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Label of an entry in `modes`. Not needed for pulses, which are
    /// applied to every mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub delta: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_s: Option<f64>,
    /// "full" (default) or "lambda".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
    /// Emission Lamb-Dicke factor for the carrier diffusion term of the
    /// Lamb-Dicke predictions; the master equation has no emission recoil,
    /// so the default is 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission_eta: Option<f64>,
    #[serde(default)]
    pub lasers: Vec<LaserConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub label: String,
    pub rabi: Quantity,
    /// Defaults to the Raman-resonant value for the scheme kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<Quantity>,
    #[serde(default)]
    pub eta_axial: f64,
    #[serde(default)]
    pub eta_radial: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<String>,
}

/// Bright-state targets. D-EIT needs both; single EIT exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axial: Option<Quantity>,
}

/// Ideal sideband readout on the logic transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Readout {
    pub eta: f64,
    pub rabi: Quantity,
    /// Defaults to π/(ηΩ√(n̄₀+1)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    SpectrumScan {
        start: Quantity,
        stop: Quantity,
        points: usize,
        /// "probe" (default) or "laser".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<String>,
        /// Beam whose pattern (probe) or detuning (laser) is scanned.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beam: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe_rabi: Option<Quantity>,
        /// Also write the Lamb-Dicke spectrum S(ω) on the same grid.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        analytic: Option<bool>,
    },
    CoolingTrajectory {
        /// Required unless `pulses` is given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<Quantity>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nbar0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervals: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        checkpoint: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        restore: Option<String>,
    },
    RabiMap {
        pump: Vec<Quantity>,
        probe: Vec<Quantity>,
        duration: Quantity,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nbar0: Option<f64>,
        readout: Readout,
    },
    DetuningSweep {
        deltas: Vec<Quantity>,
        /// "lamb_dicke" (default) or "master_equation".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        engine: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<Quantity>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nbar0: Option<f64>,
    },
    TtmRate {
        nbar0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<Quantity>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<usize>,
        /// "master_equation" (default) or "rate_equation".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        engine: Option<String>,
    },
    ThermometryReplay {
        readout: Readout,
        /// Fock-population CSV written by `cooling_trajectory`; simulated
        /// afresh when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<Quantity>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nbar0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervals: Option<usize>,
        /// "direct" (default) or "sideband_fit".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pipeline: Option<String>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::SpectrumScan { .. } => "spectrum_scan",
            Experiment::CoolingTrajectory { .. } => "cooling_trajectory",
            Experiment::RabiMap { .. } => "rabi_map",
            Experiment::DetuningSweep { .. } => "detuning_sweep",
            Experiment::TtmRate { .. } => "ttm_rate",
            Experiment::ThermometryReplay { .. } => "thermometry_replay",
        }
    }
}

/// Runs the experiment once per value of one scheme parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// delta, omega_pi, omega_sigma, omega_d, field, mode_frequency,
    /// tune_radial or tune_axial.
    pub parameter: String,
    pub values: Vec<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub name: String,
    pub duration: Quantity,
    pub scheme: SchemeConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ConfigError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Field { field: field.into(), reason: reason.into() }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn output_prefix(&self) -> &str {
        self.scenario.output.as_deref().unwrap_or(&self.scenario.name)
    }
}
