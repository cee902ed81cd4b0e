//! JSON run configuration.
//!
//! Every field is optional; omitted values resolve to the defaults
//! of [`SystemParams::default`]. Decay rates are given in units of `g`
//! (`0.005`, `"0.005g"`) or in units of `Omega0` with a `w0` suffix (`"0.025w0"`)
//! and are stored in `Omega0` units once resolved.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::basis::BasisState;
use crate::error::{Error, Result};
use crate::params::{default_window, SystemParams, DEFAULT_RECORD_POINTS, DEFAULT_STEPS_PER_TAU, DEFAULT_WIDTH_DIVISOR};
use crate::pulses::PulseSchedule;
use crate::simulation::{Scenario, INITIAL_STATE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// Multiple of the coupling `g`.
    PerG(f64),
    /// Multiple of `Omega0`.
    PerOmega0(f64),
}

impl Rate {
    pub fn resolve(self, g: f64, omega0: f64) -> f64 {
        match self {
            Rate::PerG(x) => x * g,
            Rate::PerOmega0(x) => x * omega0,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::PerG(x) => write!(f, "{x:?}g"),
            Rate::PerOmega0(x) => write!(f, "{x:?}w0"),
        }
    }
}

impl FromStr for Rate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (number, per_g) = if let Some(x) = s.strip_suffix("w0") {
            (x, false)
        } else if let Some(x) = s.strip_suffix("Ω0").or_else(|| s.strip_suffix("Ω₀")) {
            (x, false)
        } else if let Some(x) = s.strip_suffix('g') {
            (x, true)
        } else {
            (s, true)
        };
        let x: f64 = number
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse rate `{s}` (expected e.g. 0.005g or 0.025w0)"))?;
        Ok(if per_g { Rate::PerG(x) } else { Rate::PerOmega0(x) })
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Rate::PerG(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_divisor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_points: Option<usize>,
}

/// Parameter names accepted by [`ParamsConfig::set`] (and by scan axes).
pub const PARAM_NAMES: [&str; 12] = [
    "omega0",
    "g",
    "tau",
    "t0",
    "kappa",
    "gamma",
    "width_divisor",
    "n_max",
    "t_start",
    "t_end",
    "step",
    "record_points",
];

impl ParamsConfig {
    /// Overwrites `self` with every value set in `other`.
    pub fn merge(&mut self, other: &ParamsConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(omega0, g, tau, t0, kappa, gamma, width_divisor, n_max, t_start, t_end, step, record_points);
    }

    /// Sets a named parameter from a number; rates are read in units of `g`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let count = |key: &str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::config(key, "must be a non-negative integer"))
            }
        };
        match name {
            "omega0" => self.omega0 = Some(value),
            "g" => self.g = Some(value),
            "tau" => self.tau = Some(value),
            "t0" => self.t0 = Some(value),
            "kappa" => self.kappa = Some(Rate::PerG(value)),
            "gamma" => self.gamma = Some(Rate::PerG(value)),
            "width_divisor" => self.width_divisor = Some(value),
            "n_max" => self.n_max = Some(count("params.n_max")?),
            "t_start" => self.t_start = Some(value),
            "t_end" => self.t_end = Some(value),
            "step" => self.step = Some(value),
            "record_points" => self.record_points = Some(count("params.record_points")?),
            other => {
                return Err(Error::config(
                    other,
                    format!("unknown parameter (expected one of {})", PARAM_NAMES.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Same configuration with every default written out.
    pub fn filled(&self) -> ParamsConfig {
        let width_divisor = self.width_divisor.unwrap_or(DEFAULT_WIDTH_DIVISOR);
        let t0 = self.t0.unwrap_or(2.0);
        let (a, b) = default_window(width_divisor, t0);
        ParamsConfig {
            omega0: Some(self.omega0.unwrap_or(1.0)),
            g: Some(self.g.unwrap_or(5.0)),
            tau: Some(self.tau.unwrap_or(1.0)),
            t0: Some(t0),
            kappa: Some(self.kappa.unwrap_or(Rate::PerG(0.005))),
            gamma: Some(self.gamma.unwrap_or(Rate::PerG(0.005))),
            width_divisor: Some(width_divisor),
            n_max: Some(self.n_max.unwrap_or(1)),
            t_start: Some(self.t_start.unwrap_or(a)),
            t_end: Some(self.t_end.unwrap_or(b)),
            step: Some(self.step.unwrap_or(1.0 / DEFAULT_STEPS_PER_TAU)),
            record_points: Some(self.record_points.unwrap_or(DEFAULT_RECORD_POINTS)),
        }
    }

    pub fn resolve(&self) -> Result<SystemParams> {
        let f = self.filled();
        let omega0 = f.omega0.unwrap();
        let g = f.g.unwrap();
        let params = SystemParams {
            omega0,
            g,
            tau: f.tau.unwrap(),
            t0: f.t0.unwrap(),
            kappa: f.kappa.unwrap().resolve(g, omega0),
            gamma: f.gamma.unwrap().resolve(g, omega0),
            width_divisor: f.width_divisor.unwrap(),
            n_max: f.n_max.unwrap(),
            t_start: f.t_start.unwrap(),
            t_end: f.t_end.unwrap(),
            step: f.step.unwrap(),
            record_points: f.record_points.unwrap(),
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub meta: PathBuf,
}

impl OutputConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        let dir = Path::new("out");
        OutputConfig {
            csv: dir.join(format!("{}.csv", scenario.name())),
            meta: dir.join(format!("{}.meta.json", scenario.name())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    /// Renormalize the simulated state before the dark-state overlap.
    pub normalize_pe: bool,
    pub restrict_to_s: bool,
    /// Write the basis order and subspace map next to the metrics.
    pub dump_basis: bool,
    /// Write `H_nh` at this time (units of tau) next to the metrics.
    pub dump_hamiltonian: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DarkcheckConfig {
    pub points: usize,
    /// Draw pulse values uniformly from `[0, max_pulse]` instead of evaluating the schedule.
    pub random_seed: Option<u64>,
    pub max_pulse: f64,
    pub csv: Option<PathBuf>,
}

impl Default for DarkcheckConfig {
    fn default() -> Self {
        DarkcheckConfig {
            points: 101,
            random_seed: None,
            max_pulse: 10.0,
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PulseSchedule>,
    #[serde(default = "default_initial")]
    pub initial: BasisState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub darkcheck: DarkcheckConfig,
}

fn default_scenario() -> Scenario {
    Scenario::Stirap
}

fn default_initial() -> BasisState {
    INITIAL_STATE
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: default_scenario(),
            params: ParamsConfig::default(),
            schedule: None,
            initial: default_initial(),
            output: None,
            flags: Flags::default(),
            darkcheck: DarkcheckConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses a config document. A metadata sidecar written by `simulate` is
    /// accepted too: its `config` member is used.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("config") => map.remove("config").unwrap(),
            other => other,
        };
        serde_json::from_value(value).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn output(&self) -> OutputConfig {
        self.output
            .clone()
            .unwrap_or_else(|| OutputConfig::for_scenario(self.scenario))
    }

    /// Config with every default written out, suitable for reproducing a run.
    pub fn resolved(&self) -> RunConfig {
        RunConfig {
            params: self.params.filled(),
            output: Some(self.output()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<SystemParams> {
        let params = self.params.resolve()?;
        if self.scenario == Scenario::Custom && self.schedule.is_none() {
            return Err(Error::config("schedule", "scenario `custom` requires a schedule"));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        if self.initial.n_r > params.n_max || self.initial.n_l > params.n_max {
            return Err(Error::config("initial", "photon numbers exceed params.n_max"));
        }
        if self.darkcheck.points < 1 {
            return Err(Error::config("darkcheck.points", "must be >= 1"));
        }
        if !(self.darkcheck.max_pulse.is_finite() && self.darkcheck.max_pulse > 0.0) {
            return Err(Error::config("darkcheck.max_pulse", "must be > 0"));
        }
        Ok(params)
    }
}
