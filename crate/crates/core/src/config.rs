//! Simulation configuration: JSON parsing, validation, and sweeps.
//!
//! The defaults reproduce the resonant Gaussian reference run
//! (omega0 = 1, tau = 5, sigma = 1, window [0, 10], dt = 1e-3, ground
//! start), so an empty `{}` config is immediately useful.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::LogicThresholds;
use crate::pulse::{DetuningSpec, PulseProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    pub format: OutputFormat,
}

/// Initial state of the atom: a named state, an explicit coherence vector
/// (validated to be a physical density matrix), or an unchecked vector for
/// linearity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedState {
    Ground,
    Excited,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    Unchecked { unchecked: Vec<f64> },
    Vector(Vec<f64>),
}

impl InitialState {
    pub const GROUND: InitialState = InitialState::Named(NamedState::Ground);
    pub const EXCITED: InitialState = InitialState::Named(NamedState::Excited);
    pub const MIXED: InitialState = InitialState::Named(NamedState::Mixed);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Number of atomic levels. The built-in drive is two-level.
    pub n: usize,
    pub pulse: PulseProfile,
    pub delta: DetuningSpec,
    /// Simulation window (t0, t1) in reduced units.
    pub window: (f64, f64),
    /// RK4 step size.
    pub dt: f64,
    pub initial_state: InitialState,
    pub output: Option<OutputSpec>,
    pub thresholds: LogicThresholds,
    /// Record every k-th step (the endpoint is always recorded).
    pub decimation: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 2,
            pulse: PulseProfile::Gaussian {
                omega0: 1.0,
                tau: 5.0,
                sigma: 1.0,
            },
            delta: DetuningSpec { delta: 0.0 },
            window: (0.0, 10.0),
            dt: 1e-3,
            initial_state: InitialState::GROUND,
            output: None,
            thresholds: LogicThresholds::default(),
            decimation: 1,
        }
    }
}

impl SimulationConfig {
    /// Collect every violated invariant; empty list means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n < 2 {
            v.push(format!("n must be >= 2, got {}", self.n));
        }
        if let Err(e) = self.pulse.validate() {
            v.push(e.to_string());
        }
        if !self.delta.delta.is_finite() {
            v.push(format!("delta must be finite, got {}", self.delta.delta));
        }
        if !(self.window.0.is_finite() && self.window.1.is_finite()) {
            v.push("window bounds must be finite".into());
        } else if self.window.1 < self.window.0 {
            v.push(format!(
                "window inverted: [{}, {}]",
                self.window.0, self.window.1
            ));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            v.push(format!("dt must be positive, got {}", self.dt));
        }
        if let Err(e) = self.thresholds.validate() {
            v.push(e.to_string());
        }
        let want = self.n * self.n - 1;
        match &self.initial_state {
            InitialState::Vector(s) | InitialState::Unchecked { unchecked: s } => {
                if s.len() != want {
                    v.push(format!(
                        "initial state vector needs {want} components for n = {}, got {}",
                        self.n,
                        s.len()
                    ));
                }
                if s.iter().any(|x| !x.is_finite()) {
                    v.push("initial state vector has non-finite components".into());
                }
            }
            _ => {}
        }
        if self.decimation == 0 {
            v.push("decimation must be >= 1".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Parse and validate a JSON configuration. Unknown keys are rejected, and
/// validation failures report every violated invariant at once.
pub fn parse_config(text: &[u8]) -> Result<SimulationConfig> {
    let s = std::str::from_utf8(text)
        .map_err(|e| Error::Config(vec![format!("config is not UTF-8: {e}")]))?;
    let cfg: SimulationConfig =
        serde_json::from_str(s).map_err(|e| Error::Config(vec![e.to_string()]))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &SimulationConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// Sweep axis: a numeric field of the base configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Omega0,
    Sigma,
    Tau,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: SimulationConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_parallelism() -> usize {
    1
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut v = self.base.violations();
        if self.values.is_empty() {
            v.push("sweep values must be nonempty".into());
        }
        if self.values.iter().any(|x| !x.is_finite()) {
            v.push("sweep values must be finite".into());
        }
        if self.parallelism == 0 {
            v.push("parallelism must be >= 1".into());
        }
        match (self.axis, &self.base.pulse) {
            (SweepAxis::Delta, _) => {}
            (_, PulseProfile::Gaussian { .. }) => {}
            (SweepAxis::Omega0, PulseProfile::Constant { .. }) => {}
            (axis, pulse) => v.push(format!(
                "sweep axis {axis:?} does not name a numeric field of pulse {pulse:?}"
            )),
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Base configuration with the axis field set to `value`.
    pub fn instantiate(&self, value: f64) -> SimulationConfig {
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::Delta => cfg.delta = DetuningSpec { delta: value },
            SweepAxis::Omega0 => match &mut cfg.pulse {
                PulseProfile::Gaussian { omega0, .. } | PulseProfile::Constant { omega0 } => {
                    *omega0 = value
                }
                _ => {}
            },
            SweepAxis::Sigma => {
                if let PulseProfile::Gaussian { sigma, .. } = &mut cfg.pulse {
                    *sigma = value
                }
            }
            SweepAxis::Tau => {
                if let PulseProfile::Gaussian { tau, .. } = &mut cfg.pulse {
                    *tau = value
                }
            }
        }
        cfg
    }
}

/// Parse and validate a JSON sweep specification.
pub fn parse_sweep(text: &[u8]) -> Result<SweepSpec> {
    let s = std::str::from_utf8(text)
        .map_err(|e| Error::Config(vec![format!("sweep spec is not UTF-8: {e}")]))?;
    let spec: SweepSpec =
        serde_json::from_str(s).map_err(|e| Error::Config(vec![e.to_string()]))?;
    spec.validate()?;
    Ok(spec)
}
