//! Scenario schema (TOML) and `key=value` overrides.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::digitize::Scheme;
use crate::error::{Error, Result};
use crate::model::{effective_params, RabiParams};
use crate::observables::{BosonState, QubitState};

pub const DEFAULT_SAMPLES: usize = 401;
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FidelityScan,
    EvolveExact,
    EvolveTrotter,
    EvolveLindblad,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FidelityScan => "fidelity_scan",
            Mode::EvolveExact => "evolve_exact",
            Mode::EvolveTrotter => "evolve_trotter",
            Mode::EvolveLindblad => "evolve_lindblad",
            Mode::Compare => "compare",
        }
    }

    fn needs_plan(self) -> bool {
        matches!(self, Mode::FidelityScan | Mode::EvolveTrotter | Mode::Compare)
    }
}

/// Which split term is applied first (leftmost) in each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    JcFirst,
    AjcFirst,
}

impl Ordering {
    pub fn as_str(self) -> &'static str {
        match self {
            Ordering::JcFirst => "jc_first",
            Ordering::AjcFirst => "ajc_first",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub schemes: Vec<Scheme>,
    pub steps: Vec<usize>,
    pub ordering: Ordering,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub qubit: QubitState,
    pub boson: BosonState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Ns,
    /// Multiples of the effective boson period, `ω_b_eff·T/2π`.
    Periods,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub unit: TimeUnit,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// I⊗b
    PhotonLoss,
    /// σ⁻⊗I
    QubitRelaxation,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::PhotonLoss => "photon_loss",
            ChannelKind::QubitRelaxation => "qubit_relaxation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    /// Overrides the shared `gamma` for this channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSpec {
    pub gamma: f64,
    pub channels: Vec<ChannelSpec>,
    /// Integrator step in ns; defaults to `min(0.01/‖H‖, 0.01/γ)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

/// Re-runs the scenario for each coupling ratio, moving `omega_b` so that
/// `g / ω_b_eff` takes the listed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub g_over_omega_b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub mode: Mode,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_leakage_threshold")]
    pub leakage_threshold: f64,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    pub params: RabiParams,
    pub plan: PlanSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipation: Option<DissipationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_leakage_threshold() -> f64 {
    DEFAULT_LEAKAGE_THRESHOLD
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Scenario::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config_err("name must not be empty"));
        }
        if self
            .name
            .chars()
            .any(|c| !(c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'))
        {
            return Err(config_err(format!(
                "name {:?} may only contain ASCII letters, digits, '_', '-' and '.'",
                self.name
            )));
        }
        self.params
            .validate()
            .map_err(|e| config_err(format!("params: {e}")))?;
        if self.n_samples < 2 {
            return Err(config_err("n_samples must be >= 2"));
        }
        if !(self.leakage_threshold > 0.0) {
            return Err(config_err("leakage_threshold must be positive"));
        }
        if self.mode.needs_plan() {
            if self.plan.schemes.is_empty() {
                return Err(config_err("plan.schemes must not be empty"));
            }
            if self.plan.steps.is_empty() {
                return Err(config_err(format!(
                    "plan.steps must not be empty for mode {}",
                    self.mode.as_str()
                )));
            }
            if self.plan.steps.contains(&0) {
                return Err(config_err("plan.steps entries must be >= 1"));
            }
        }
        if self.time.values.is_empty() {
            return Err(config_err("time.values must not be empty"));
        }
        if self.time.values.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(config_err("time.values must be positive and finite"));
        }
        if self.mode != Mode::FidelityScan && self.time.values.len() != 1 {
            return Err(config_err(format!(
                "mode {} takes exactly one time value",
                self.mode.as_str()
            )));
        }
        if let BosonState::Fock(n) = self.initial.boson {
            if n > self.params.cutoff.n_max() {
                return Err(config_err(format!(
                    "initial fock state {n} exceeds n_max = {}",
                    self.params.cutoff.n_max()
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.g_over_omega_b.is_empty()
                || sweep.g_over_omega_b.iter().any(|&r| !(r > 0.0) || !r.is_finite())
            {
                return Err(config_err("sweep.g_over_omega_b must hold positive ratios"));
            }
            if self.params.g <= 0.0 {
                return Err(config_err("a coupling-ratio sweep needs g > 0"));
            }
        }
        match (&self.dissipation, self.mode) {
            (None, Mode::EvolveLindblad) => {
                return Err(config_err("mode evolve_lindblad needs a [dissipation] table"))
            }
            (Some(d), _) => {
                let rates = std::iter::once(d.gamma).chain(d.channels.iter().filter_map(|c| c.gamma));
                for g in rates {
                    if !(g >= 0.0) || !g.is_finite() {
                        return Err(config_err("dissipation rates must be finite and >= 0"));
                    }
                }
                if let Some(dt) = d.dt {
                    if !(dt > 0.0) || !dt.is_finite() {
                        return Err(config_err("dissipation.dt must be positive"));
                    }
                }
            }
            _ => {}
        }
        for p in self.resolved_params() {
            if self.time.unit == TimeUnit::Periods && effective_params(&p).omega_b_eff <= 0.0 {
                return Err(config_err(
                    "time in periods needs a positive effective boson frequency",
                ));
            }
        }
        Ok(())
    }

    /// Parameter sets after applying the coupling-ratio sweep (or just `params`).
    pub fn resolved_params(&self) -> Vec<RabiParams> {
        match &self.sweep {
            None => vec![self.params.clone()],
            Some(sweep) => sweep
                .g_over_omega_b
                .iter()
                .map(|&ratio| RabiParams {
                    omega_b: self.params.omega_re + self.params.g / ratio / 2.0,
                    ..self.params.clone()
                })
                .collect(),
        }
    }

    /// Evolution time in ns for a configured time value.
    pub fn total_time(&self, params: &RabiParams, value: f64) -> f64 {
        match self.time.unit {
            TimeUnit::Ns => value,
            TimeUnit::Periods => value * TAU / effective_params(params).omega_b_eff,
        }
    }

    /// Applies dotted-path overrides such as `params.n_max=40` or `plan.schemes=["general"]`.
    ///
    /// Values are parsed as TOML literals; anything that does not parse is taken as a string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Scenario> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root: toml::Table =
            toml::from_str(&self.to_toml()?).map_err(|e| config_err(e.to_string()))?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| config_err(format!("override {item:?} is not key=value")))?;
            set_path(&mut root, key.trim(), parse_literal(raw.trim()))?;
        }
        let text = toml::to_string(&root).map_err(|e| config_err(e.to_string()))?;
        Scenario::from_toml(&text)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("bad override key {key:?}")));
    }
    let (last, parents) = parts.split_last().expect("nonempty");
    let mut table = root;
    for part in parents {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override key {key:?}: {part} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
