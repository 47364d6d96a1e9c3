//! Experiment configs: one flat JSON object per run.
//!
//! Every key is optional and falls back to the documented default. Unknown
//! keys are rejected with the key name in the message.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CouplingScan,
    GraphFidelity,
    PurityScan,
    PhaseDiagram,
    Adiabatic,
    RingProfile,
    StarkMap,
    RegressAll,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CouplingScan => "coupling-scan",
            ExperimentKind::GraphFidelity => "graph-fidelity",
            ExperimentKind::PurityScan => "purity-scan",
            ExperimentKind::PhaseDiagram => "phase-diagram",
            ExperimentKind::Adiabatic => "adiabatic",
            ExperimentKind::RingProfile => "ring-profile",
            ExperimentKind::StarkMap => "stark-map",
            ExperimentKind::RegressAll => "regress-all",
        }
    }
}

fn default_n3() -> usize {
    3
}
fn default_eps() -> f64 {
    0.1
}
fn default_ratio() -> f64 {
    dipolar_spin_core::crystal::CrystalSpec::DEFAULT_DIPOLAR_RATIO
}
fn default_margin() -> f64 {
    dipolar_spin_core::couplings::DEFAULT_MARGIN_FACTOR
}
fn default_equal_point() -> f64 {
    2.977
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingScanParams {
    #[serde(default = "default_n3")]
    pub n_molecules: usize,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_ratio")]
    pub dipolar_ratio: f64,
    #[serde(default = "CouplingScanParams::omega_min")]
    pub omega_min: f64,
    #[serde(default = "CouplingScanParams::omega_max")]
    pub omega_max: f64,
    #[serde(default = "CouplingScanParams::omega_step")]
    pub omega_step: f64,
    /// Explicit grid; replaces min/max/step when present.
    #[serde(default)]
    pub omegas: Option<Vec<f64>>,
    #[serde(default = "default_margin")]
    pub margin_factor: f64,
}

impl CouplingScanParams {
    fn omega_min() -> f64 {
        0.1
    }
    fn omega_max() -> f64 {
        5.0
    }
    fn omega_step() -> f64 {
        0.01
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFidelityParams {
    #[serde(default = "default_n3")]
    pub n_molecules: usize,
    #[serde(default = "GraphFidelityParams::epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_equal_point")]
    pub omega: f64,
    #[serde(default = "default_ratio")]
    pub dipolar_ratio: f64,
    /// End of the time axis in units of the gate time `pi / (4 G_12)`.
    #[serde(default = "GraphFidelityParams::gate_fraction_end")]
    pub gate_fraction_end: f64,
    #[serde(default = "GraphFidelityParams::samples_per_period")]
    pub samples_per_period: usize,
    #[serde(default = "default_true")]
    pub oracle: bool,
    #[serde(default = "GraphFidelityParams::n_max")]
    pub n_max: usize,
    /// Mean phonon occupation of every mode.
    #[serde(default)]
    pub nbar: f64,
    #[serde(default = "GraphFidelityParams::thermal_samples")]
    pub thermal_samples: usize,
    #[serde(default = "default_margin")]
    pub margin_factor: f64,
}

impl GraphFidelityParams {
    fn epsilons() -> Vec<f64> {
        vec![0.05, 0.1]
    }
    fn gate_fraction_end() -> f64 {
        1.0
    }
    fn samples_per_period() -> usize {
        40
    }
    fn n_max() -> usize {
        dipolar_spin_core::oracle::DEFAULT_N_MAX
    }
    fn thermal_samples() -> usize {
        64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurityScanParams {
    #[serde(default = "default_n3")]
    pub n_molecules: usize,
    #[serde(default = "PurityScanParams::epsilon_min")]
    pub epsilon_min: f64,
    #[serde(default = "PurityScanParams::epsilon_max")]
    pub epsilon_max: f64,
    #[serde(default = "PurityScanParams::epsilon_count")]
    pub epsilon_count: usize,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "default_equal_point")]
    pub omega: f64,
    #[serde(default = "default_ratio")]
    pub dipolar_ratio: f64,
    #[serde(default)]
    pub nbar: f64,
    /// Half-width of the window around the gate time for the envelope.
    #[serde(default = "PurityScanParams::envelope_half_width")]
    pub envelope_half_width: f64,
    #[serde(default = "GraphFidelityParams::samples_per_period")]
    pub samples_per_period: usize,
    #[serde(default = "default_margin")]
    pub margin_factor: f64,
}

impl PurityScanParams {
    fn epsilon_min() -> f64 {
        0.02
    }
    fn epsilon_max() -> f64 {
        0.1
    }
    fn epsilon_count() -> usize {
        41
    }
    pub fn envelope_half_width() -> f64 {
        crate::experiments::ENVELOPE_HALF_WIDTH
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramParams {
    #[serde(default = "default_n3")]
    pub n_molecules: usize,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_ratio")]
    pub dipolar_ratio: f64,
    #[serde(default = "PhaseDiagramParams::omega_min")]
    pub omega_min: f64,
    #[serde(default = "CouplingScanParams::omega_max")]
    pub omega_max: f64,
    #[serde(default = "CouplingScanParams::omega_step")]
    pub omega_step: f64,
    #[serde(default)]
    pub omegas: Option<Vec<f64>>,
    #[serde(default)]
    pub field_min: f64,
    #[serde(default = "PhaseDiagramParams::field_max")]
    pub field_max: f64,
    #[serde(default = "PhaseDiagramParams::field_step")]
    pub field_step: f64,
    #[serde(default)]
    pub field_ratios: Option<Vec<f64>>,
    #[serde(default = "default_margin")]
    pub margin_factor: f64,
}

impl PhaseDiagramParams {
    fn omega_min() -> f64 {
        0.5
    }
    fn field_max() -> f64 {
        2.0
    }
    fn field_step() -> f64 {
        0.05
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticParams {
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_ratio")]
    pub dipolar_ratio: f64,
    #[serde(default = "default_equal_point")]
    pub omega: f64,
    /// Slows the standard schedule down by this factor.
    #[serde(default = "AdiabaticParams::stretch")]
    pub stretch: f64,
    /// Duration in units of `1/G` (defaults to `60 * stretch`).
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default = "AdiabaticParams::samples")]
    pub samples: usize,
    /// Ground-space window relative to `G_rms`.
    #[serde(default = "AdiabaticParams::ground_window")]
    pub ground_window: f64,
    #[serde(default = "default_margin")]
    pub margin_factor: f64,
}

impl AdiabaticParams {
    fn stretch() -> f64 {
        1.0
    }
    fn samples() -> usize {
        201
    }
    fn ground_window() -> f64 {
        dipolar_spin_core::spinmodel::DEGENERACY_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RingFormName {
    NearestNeighbour,
    LatticeSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingProfileParams {
    #[serde(default = "RingProfileParams::n_molecules")]
    pub n_molecules: usize,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "RingProfileParams::gamma")]
    pub gamma: f64,
    /// Drives at `(w~_k + w~_{k+1}) / 2`, one column each.
    #[serde(default = "RingProfileParams::midpoints")]
    pub midpoints: Vec<usize>,
    /// Explicit drives `w~`, one column each.
    #[serde(default)]
    pub omega_tildes: Vec<f64>,
    #[serde(default = "RingProfileParams::form")]
    pub form: RingFormName,
    /// Resonance margin factor; absent means only exact poles are rejected.
    #[serde(default)]
    pub margin_factor: Option<f64>,
}

impl RingProfileParams {
    fn n_molecules() -> usize {
        21
    }
    fn gamma() -> f64 {
        100.0
    }
    fn midpoints() -> Vec<usize> {
        vec![1, 3, 9]
    }
    fn form() -> RingFormName {
        RingFormName::NearestNeighbour
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarkMapParams {
    #[serde(default = "StarkMapParams::j_max")]
    pub j_max: usize,
    #[serde(default)]
    pub field_min: f64,
    #[serde(default = "StarkMapParams::field_max")]
    pub field_max: f64,
    #[serde(default = "StarkMapParams::points")]
    pub points: usize,
    /// Number of lowest tracked states written out.
    #[serde(default = "StarkMapParams::states")]
    pub states: usize,
    #[serde(default = "StarkMapParams::pair")]
    pub pair: [usize; 2],
    #[serde(default = "StarkMapParams::window_tolerance")]
    pub window_tolerance: f64,
    #[serde(default = "default_eps")]
    pub epsilon_target: f64,
}

impl StarkMapParams {
    fn j_max() -> usize {
        dipolar_spin_core::rotor::DEFAULT_J_MAX
    }
    fn field_max() -> f64 {
        6.0
    }
    fn points() -> usize {
        601
    }
    fn states() -> usize {
        4
    }
    fn pair() -> [usize; 2] {
        [1, 2]
    }
    fn window_tolerance() -> f64 {
        dipolar_spin_core::rotor::DEFAULT_WINDOW_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressParams {
    /// Criterion numbers to run; all when absent.
    #[serde(default)]
    pub only: Option<Vec<u32>>,
    /// Replacement tolerances keyed by row id, e.g. `"2b": 1e-6`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    CouplingScan(CouplingScanParams),
    GraphFidelity(GraphFidelityParams),
    PurityScan(PurityScanParams),
    PhaseDiagram(PhaseDiagramParams),
    Adiabatic(AdiabaticParams),
    RingProfile(RingProfileParams),
    StarkMap(StarkMapParams),
    RegressAll(RegressParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out: Option<String>,
    pub params: Params,
}

fn parse_params<T: DeserializeOwned>(rest: Map<String, Value>) -> Result<T, CliError> {
    serde_path_to_error::deserialize(Value::Object(rest)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        if path == "." {
            CliError::Config(inner)
        } else {
            CliError::config(&path, inner)
        }
    })
}

pub const DEFAULT_SEED: u64 = 2024;

impl ExperimentConfig {
    /// Parses a config document for `kind`.
    pub fn parse(kind: ExperimentKind, text: &str) -> Result<Self, CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let Value::Object(mut map) = value else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        if let Some(k) = map.remove("kind") {
            let named: ExperimentKind =
                serde_json::from_value(k).map_err(|e| CliError::config("kind", e))?;
            if named != kind {
                return Err(CliError::config(
                    "kind",
                    format!("config is for {} but {} was requested", named.name(), kind.name()),
                ));
            }
        }
        let seed = match map.remove("seed") {
            Some(v) => serde_json::from_value(v).map_err(|e| CliError::config("seed", e))?,
            None => DEFAULT_SEED,
        };
        let out = match map.remove("out") {
            Some(v) => Some(serde_json::from_value(v).map_err(|e| CliError::config("out", e))?),
            None => None,
        };
        let params = match kind {
            ExperimentKind::CouplingScan => Params::CouplingScan(parse_params(map)?),
            ExperimentKind::GraphFidelity => Params::GraphFidelity(parse_params(map)?),
            ExperimentKind::PurityScan => Params::PurityScan(parse_params(map)?),
            ExperimentKind::PhaseDiagram => Params::PhaseDiagram(parse_params(map)?),
            ExperimentKind::Adiabatic => Params::Adiabatic(parse_params(map)?),
            ExperimentKind::RingProfile => Params::RingProfile(parse_params(map)?),
            ExperimentKind::StarkMap => Params::StarkMap(parse_params(map)?),
            ExperimentKind::RegressAll => Params::RegressAll(parse_params(map)?),
        };
        Ok(Self { kind, seed, out, params })
    }

    /// All defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        Self::parse(kind, "{}").expect("defaults parse")
    }

    /// Fully expanded document (defaults filled in, keys sorted). The output
    /// path is left out because it does not affect results.
    pub fn canonical(&self) -> Value {
        let params = match &self.params {
            Params::CouplingScan(p) => serde_json::to_value(p),
            Params::GraphFidelity(p) => serde_json::to_value(p),
            Params::PurityScan(p) => serde_json::to_value(p),
            Params::PhaseDiagram(p) => serde_json::to_value(p),
            Params::Adiabatic(p) => serde_json::to_value(p),
            Params::RingProfile(p) => serde_json::to_value(p),
            Params::StarkMap(p) => serde_json::to_value(p),
            Params::RegressAll(p) => serde_json::to_value(p),
        }
        .expect("params serialize");
        let mut map = match params {
            Value::Object(m) => m,
            _ => unreachable!("params are structs"),
        };
        map.insert("kind".into(), Value::String(self.kind.name().into()));
        map.insert("seed".into(), Value::from(self.seed));
        Value::Object(map)
    }

    pub fn canonical_text(&self) -> String {
        serde_json::to_string_pretty(&self.canonical()).expect("canonical config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

/// `min, min + step, ...` up to `max` inclusive (with a small slack).
pub fn uniform_grid(key: &str, min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(CliError::config(key, "grid bounds must be finite"));
    }
    if !(step > 0.0) {
        return Err(CliError::config(key, format!("step {step} must be positive")));
    }
    if max < min {
        return Err(CliError::config(key, format!("empty grid: max {max} < min {min}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| min + step * k as f64).collect())
}

/// Explicit grid (`list_key`) when given, else the uniform one
/// (`range_key`); empty grids are errors.
pub fn grid(
    list_key: &str,
    explicit: &Option<Vec<f64>>,
    range_key: &str,
    min: f64,
    max: f64,
    step: f64,
) -> Result<Vec<f64>, CliError> {
    match explicit {
        Some(v) if v.is_empty() => Err(CliError::config(list_key, "empty grid")),
        Some(v) => {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(CliError::config(list_key, "grid values must be finite"));
            }
            Ok(v.clone())
        }
        None => uniform_grid(range_key, min, max, step),
    }
}

/// `count` evenly spaced values in `[min, max]`.
pub fn linspace(key: &str, min: f64, max: f64, count: usize) -> Result<Vec<f64>, CliError> {
    match count {
        0 => Err(CliError::config(key, "empty grid")),
        1 => Ok(vec![min]),
        _ if max < min => Err(CliError::config(key, format!("empty grid: max {max} < min {min}"))),
        _ => Ok((0..count).map(|k| min + (max - min) * k as f64 / (count - 1) as f64).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::parse(ExperimentKind::CouplingScan, r#"{"omgea_min": 1.0}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("omgea_min"), "{err}");
    }

    #[test]
    fn wrong_type_is_named() {
        let err = ExperimentConfig::parse(ExperimentKind::CouplingScan, r#"{"epsilon": "big"}"#).unwrap_err();
        assert!(err.to_string().contains("epsilon"), "{err}");
    }

    #[test]
    fn kind_must_match() {
        let err = ExperimentConfig::parse(ExperimentKind::StarkMap, r#"{"kind": "adiabatic"}"#).unwrap_err();
        assert!(err.to_string().contains("kind"));
        assert!(ExperimentConfig::parse(ExperimentKind::StarkMap, r#"{"kind": "stark-map"}"#).is_ok());
    }

    #[test]
    fn canonical_form_is_stable() {
        let a = ExperimentConfig::parse(ExperimentKind::CouplingScan, r#"{"epsilon": 0.1, "seed": 3}"#).unwrap();
        let b = ExperimentConfig::parse(ExperimentKind::CouplingScan, r#"{"seed": 3, "out": "x.csv"}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::parse(ExperimentKind::CouplingScan, &a.canonical_text()).unwrap();
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid("w", 0.1, 5.0, 0.01).unwrap().len(), 491);
        assert!(uniform_grid("w", 1.0, 0.0, 0.1).is_err());
        assert!(grid("omegas", &Some(vec![]), "omega_min", 0.0, 1.0, 0.1).is_err());
        assert_eq!(linspace("e", 0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
