//! Experiment configuration: a JSON document with every default spelled out
//! after parsing, so the echo in a result record reproduces the run.
//!
//! Matrices are row-major nested arrays whose entries are `[re, im]` pairs;
//! a bare number is accepted as a real entry and normalized to a pair.

use std::fmt;
use std::path::{Path, PathBuf};

use coordsim::cq::{CqNetworkState, Extension, Topology};
use coordsim::limits::{Caps, Tolerances};
use coordsim::qstate::{registers, DensityOperator, Register};
use coordsim::region::{OptimizerOptions, OracleObjective, OracleOptions, RegionVariant};
use coordsim::softcover::CEnsemble;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Info,
    Resolvability,
    SimulateTwoNode,
    SimulateNc,
    SimulateBroadcast,
    RegionTwoNode,
    RegionNc,
    RegionBroadcast,
    Oracle,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Info => "info",
            Kind::Resolvability => "resolvability",
            Kind::SimulateTwoNode => "simulate-two-node",
            Kind::SimulateNc => "simulate-nc",
            Kind::SimulateBroadcast => "simulate-broadcast",
            Kind::RegionTwoNode => "region-two-node",
            Kind::RegionNc => "region-nc",
            Kind::RegionBroadcast => "region-broadcast",
            Kind::Oracle => "oracle",
        }
    }

    fn topology(self) -> Option<Topology> {
        match self {
            Kind::SimulateTwoNode | Kind::RegionTwoNode => Some(Topology::TwoNode),
            Kind::SimulateNc | Kind::RegionNc => Some(Topology::NoComm),
            Kind::SimulateBroadcast | Kind::RegionBroadcast => Some(Topology::Broadcast),
            Kind::Info | Kind::Resolvability | Kind::Oracle => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologySpec {
    TwoNode,
    NoComm,
    Broadcast,
}

impl From<TopologySpec> for Topology {
    fn from(t: TopologySpec) -> Self {
        match t {
            TopologySpec::TwoNode => Topology::TwoNode,
            TopologySpec::NoComm => Topology::NoComm,
            TopologySpec::Broadcast => Topology::Broadcast,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(f64),
    Complex([f64; 2]),
}

/// A complex matrix as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<RawEntry>>")]
pub struct Matrix(pub Vec<Vec<[f64; 2]>>);

impl From<Vec<Vec<RawEntry>>> for Matrix {
    fn from(rows: Vec<Vec<RawEntry>>) -> Self {
        Matrix(
            rows.into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|e| match e {
                            RawEntry::Real(x) => [x, 0.0],
                            RawEntry::Complex(z) => z,
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

impl Matrix {
    pub fn from_complex(m: &coordsim::linalg::CMatrix) -> Self {
        Matrix((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Matrix((0..d).map(|i| (0..d).map(|j| [if i == j { diag[i] } else { 0.0 }, 0.0]).collect()).collect())
    }

    fn to_complex(&self, field: &str) -> Result<coordsim::linalg::CMatrix, CliError> {
        let rows = self.0.len();
        if rows == 0 || self.0.iter().any(|r| r.len() != rows) {
            return Err(CliError::validation(field, "matrix must be square and nonempty"));
        }
        Ok(coordsim::linalg::CMatrix::from_fn(rows, rows, |i, j| Complex64::new(self.0[i][j][0], self.0[i][j][1])))
    }

    fn to_state(&self, field: &str, regs: Vec<Register>, tol: &Tolerances) -> Result<DensityOperator, CliError> {
        DensityOperator::validate(self.to_complex(field)?, regs, tol).map_err(|e| CliError::validation(field, &e.to_string()))
    }
}

/// A c-q target, inline or loaded from a JSON file holding the same fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
    /// `p_X`; omitted for no-comm.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pmf: Vec<f64>,
    /// One conditional state per `x` (a single state for no-comm).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<Matrix>,
    /// Local dimensions; required for broadcast and no-comm.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub pmf: Vec<f64>,
    pub states: Vec<Matrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionName {
    /// Run the region search and use its argmin.
    Auto,
    /// `U = X`.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitExtension {
    /// `p(x, u)` rows (a single row `p(u)` for no-comm).
    pub joint: Vec<Vec<f64>>,
    /// For each `u`, one factor per party.
    pub factors: Vec<Vec<Matrix>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtensionSpec {
    Named(ExtensionName),
    Explicit(ExplicitExtension),
}

impl Default for ExtensionSpec {
    fn default() -> Self {
        ExtensionSpec::Named(ExtensionName::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    /// Common-randomness rate (bits/symbol).
    #[serde(rename = "R0", default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    /// Communication rate (bits/symbol).
    #[serde(rename = "R1", default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    /// Codebook rate of a resolvability experiment (bits/symbol).
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantSpec {
    #[default]
    Proof,
    Printed,
}

impl From<VariantSpec> for RegionVariant {
    fn from(v: VariantSpec) -> Self {
        match v {
            VariantSpec::Proof => RegionVariant::Proof,
            VariantSpec::Printed => RegionVariant::Printed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSpec {
    pub restarts: usize,
    /// Largest `|U|`; `null` uses the cardinality bound.
    pub u_max: Option<usize>,
    pub iterations: usize,
    pub early_stop: bool,
    pub lambdas: Vec<f64>,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        let d = OptimizerOptions::default();
        Self { restarts: d.restarts, u_max: d.u_max, iterations: d.iterations, early_stop: d.early_stop, lambdas: d.lambdas }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OracleObjectiveSpec {
    /// `I(X;U)`.
    Input,
    /// Mutual information between `U` and every coordinate.
    #[default]
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub objective: OracleObjectiveSpec,
    pub max_u: usize,
    pub grid_step: f64,
    pub budget: u64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        let d = OracleOptions::default();
        Self { objective: OracleObjectiveSpec::All, max_u: d.max_u, grid_step: d.grid_step, budget: d.budget }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsSpec {
    pub max_dim: usize,
    pub max_blocks: usize,
    pub max_block_dim: usize,
    pub max_nc_dim: usize,
    pub max_codebook_symbols: usize,
}

impl Default for CapsSpec {
    fn default() -> Self {
        let c = Caps::default();
        Self {
            max_dim: c.max_dim,
            max_blocks: c.max_blocks,
            max_block_dim: c.max_block_dim,
            max_nc_dim: c.max_nc_dim,
            max_codebook_symbols: c.max_codebook_symbols,
        }
    }
}

impl CapsSpec {
    pub fn to_caps(self) -> Caps {
        Caps {
            max_dim: self.max_dim,
            max_blocks: self.max_blocks,
            max_block_dim: self.max_block_dim,
            max_nc_dim: self.max_nc_dim,
            max_codebook_symbols: self.max_codebook_symbols,
        }
    }

    /// Applies `key=value` overrides separated by commas, e.g. `max_dim=65536,max_blocks=8192`.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<(), CliError> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::validation("COORDSIM_CAPS", &format!("`{item}` is not key=value")))?;
            let v: usize = value
                .trim()
                .parse()
                .map_err(|_| CliError::validation("COORDSIM_CAPS", &format!("`{value}` is not a nonnegative integer")))?;
            let slot = match key.trim() {
                "max_dim" => &mut self.max_dim,
                "max_blocks" => &mut self.max_blocks,
                "max_block_dim" => &mut self.max_block_dim,
                "max_nc_dim" => &mut self.max_nc_dim,
                "max_codebook_symbols" => &mut self.max_codebook_symbols,
                other => return Err(CliError::validation("COORDSIM_CAPS", &format!("unknown cap `{other}`"))),
            };
            *slot = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesSpec {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub num: f64,
    pub feas: f64,
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        Self { herm: t.herm, trace: t.trace, psd: t.psd, num: t.num, feas: t.feas }
    }
}

impl TolerancesSpec {
    pub fn to_tolerances(self) -> Tolerances {
        Tolerances { herm: self.herm, trace: self.trace, psd: self.psd, num: self.num, feas: self.feas }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Filled from the subcommand when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub extension: ExtensionSpec,
    #[serde(default)]
    pub rates: Rates,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, rename = "R0_grid")]
    pub r0_grid: Vec<f64>,
    #[serde(default)]
    pub region_variant: VariantSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub caps: CapsSpec,
    #[serde(default)]
    pub tolerances: TolerancesSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(CliError::from_json)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

fn nonnegative(field: &str, v: Option<f64>) -> Result<(), CliError> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => Err(CliError::validation(field, "nonnegative")),
        _ => Ok(()),
    }
}

fn required<T>(field: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::validation(field, "required for this experiment kind"))
}

impl ExperimentConfig {
    /// Field-level checks that do not need the target loaded.
    pub fn validate(&self) -> Result<(), CliError> {
        nonnegative("R0", self.rates.r0)?;
        nonnegative("R1", self.rates.r1)?;
        nonnegative("R", self.rates.r)?;
        for &r in &self.r0_grid {
            nonnegative("R0_grid", Some(r))?;
        }
        for &l in &self.optimizer.lambdas {
            if !(0.0..=1.0).contains(&l) {
                return Err(CliError::validation("optimizer.lambdas", "each weight must lie in [0, 1]"));
            }
        }
        if self.n_list.contains(&0) {
            return Err(CliError::validation("n_list", "blocklengths must be positive"));
        }
        let Some(kind) = self.kind else { return Ok(()) };
        let needs_curve = matches!(kind, Kind::Resolvability | Kind::SimulateTwoNode | Kind::SimulateNc | Kind::SimulateBroadcast);
        if needs_curve {
            if self.n_list.is_empty() {
                return Err(CliError::validation("n_list", "required for this experiment kind"));
            }
            if self.trials < 2 {
                return Err(CliError::validation("trials", "at least 2"));
            }
        }
        match kind {
            Kind::Resolvability => {
                required("ensemble", self.ensemble.as_ref())?;
                required("R", self.rates.r)?;
            }
            Kind::SimulateTwoNode | Kind::SimulateBroadcast => {
                required("R0", self.rates.r0)?;
                required("R1", self.rates.r1)?;
            }
            Kind::SimulateNc => {
                required("R0", self.rates.r0)?;
            }
            Kind::RegionTwoNode | Kind::RegionBroadcast => {
                if self.r0_grid.is_empty() {
                    return Err(CliError::validation("R0_grid", "required for this experiment kind"));
                }
            }
            _ => {}
        }
        if kind != Kind::Resolvability {
            let t = required("target", self.target.as_ref())?;
            if t.file.is_none() {
                let topo = required("target.topology", t.topology)?;
                if let Some(expected) = kind.topology() {
                    if Topology::from(topo) != expected {
                        return Err(CliError::validation("target.topology", &format!("{kind} needs a {expected} target")));
                    }
                }
            }
        }
        if !(self.oracle.max_u >= 1) {
            return Err(CliError::validation("oracle.max_u", "at least 1"));
        }
        Ok(())
    }

    pub fn kind(&self) -> Kind {
        self.kind.expect("kind is set before running")
    }

    pub fn caps(&self) -> Caps {
        self.caps.to_caps()
    }

    pub fn tol(&self) -> Tolerances {
        self.tolerances.to_tolerances()
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            restarts: self.optimizer.restarts,
            u_max: self.optimizer.u_max,
            iterations: self.optimizer.iterations,
            seed: self.seed,
            early_stop: self.optimizer.early_stop,
            lambdas: self.optimizer.lambdas.clone(),
            tolerances: self.tol(),
        }
    }

    pub fn oracle_options(&self) -> (OracleObjective, OracleOptions) {
        let obj = match self.oracle.objective {
            OracleObjectiveSpec::Input => OracleObjective::ClassicalInput,
            OracleObjectiveSpec::All => OracleObjective::All,
        };
        (obj, OracleOptions { max_u: self.oracle.max_u, grid_step: self.oracle.grid_step, budget: self.oracle.budget })
    }

    /// Builds the target, reading `target.file` relative to `base` when set.
    pub fn load_target(&self, base: &Path) -> Result<CqNetworkState, CliError> {
        let spec = required("target", self.target.as_ref())?;
        let loaded;
        let spec = match &spec.file {
            Some(path) => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full).map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
                loaded = serde_json::from_str::<TargetSpec>(&text).map_err(CliError::from_json)?;
                if loaded.file.is_some() {
                    return Err(CliError::validation("target.file", "state files cannot reference other files"));
                }
                &loaded
            }
            None => spec,
        };
        build_target(spec, &self.tol())
    }

    pub fn load_ensemble(&self) -> Result<CEnsemble, CliError> {
        let spec = required("ensemble", self.ensemble.as_ref())?;
        let tol = self.tol();
        let states = spec
            .states
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let d = m.0.len();
                m.to_state(&format!("ensemble.states[{i}]"), registers(&[("A", d)]), &tol)
            })
            .collect::<Result<Vec<_>, _>>()?;
        CEnsemble::new(spec.pmf.clone(), states).map_err(|e| CliError::validation("ensemble", &e.to_string()))
    }

    /// The explicit extension, if one was given.
    pub fn explicit_extension(&self, topology: Topology) -> Result<Option<Extension>, CliError> {
        let ExtensionSpec::Explicit(spec) = &self.extension else { return Ok(None) };
        let tol = self.tol();
        let labels = topology.quantum_labels();
        let factors = spec
            .factors
            .iter()
            .enumerate()
            .map(|(u, per_u)| {
                per_u
                    .iter()
                    .zip(labels)
                    .enumerate()
                    .map(|(l, (m, name))| m.to_state(&format!("extension.factors[{u}][{l}]"), registers(&[(name, m.0.len())]), &tol))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Extension::new(topology, spec.joint.clone(), factors)
            .map(Some)
            .map_err(|e| CliError::validation("extension", &e.to_string()))
    }
}

fn build_target(spec: &TargetSpec, tol: &Tolerances) -> Result<CqNetworkState, CliError> {
    let topology: Topology = required("target.topology", spec.topology)?.into();
    let labels = topology.quantum_labels();
    let dims: Vec<usize> = if spec.dims.is_empty() {
        if labels.len() != 1 {
            return Err(CliError::validation("target.dims", "required for this topology"));
        }
        vec![spec.states.first().map_or(0, |m| m.0.len())]
    } else {
        spec.dims.clone()
    };
    if dims.len() != labels.len() {
        return Err(CliError::validation("target.dims", &format!("expected {} local dimensions", labels.len())));
    }
    let regs: Vec<Register> = labels.iter().zip(&dims).map(|(n, &d)| Register::new(*n, d)).collect();
    let states = spec
        .states
        .iter()
        .enumerate()
        .map(|(i, m)| m.to_state(&format!("target.states[{i}]"), regs.clone(), tol))
        .collect::<Result<Vec<_>, _>>()?;
    let result = match topology {
        Topology::NoComm => {
            if states.len() != 1 || !spec.pmf.is_empty() {
                return Err(CliError::validation("target.states", "a no-comm target is one state and no pmf"));
            }
            CqNetworkState::no_comm(states.into_iter().next().expect("one state"))
        }
        _ => CqNetworkState::new(topology, spec.pmf.clone(), states),
    };
    result.map_err(|e| CliError::validation("target", &e.to_string()))
}

impl TargetSpec {
    /// Inline spec of an existing target, used by tests and fixtures.
    pub fn from_state(target: &CqNetworkState) -> Self {
        let topology = match target.topology() {
            Topology::TwoNode => TopologySpec::TwoNode,
            Topology::NoComm => TopologySpec::NoComm,
            Topology::Broadcast => TopologySpec::Broadcast,
        };
        Self {
            file: None,
            topology: Some(topology),
            pmf: if target.topology().has_classical() { target.pmf().to_vec() } else { Vec::new() },
            states: target.conditionals().iter().map(|s| Matrix::from_complex(s.matrix())).collect(),
            dims: target.local_dims(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{
        "kind": "simulate-two-node",
        "target": {
            "topology": "two-node",
            "pmf": [0.5, 0.5],
            "states": [
                [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
                [[0, 0], [0, 1]]
            ]
        },
        "rates": {"R0": 0.25, "R1": 1.25},
        "n_list": [1, 2]
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.extension, ExtensionSpec::Named(ExtensionName::Auto));
        assert_eq!(cfg.region_variant, VariantSpec::Proof);
        assert_eq!(cfg.caps.to_caps(), Caps::default());
        let target = cfg.load_target(Path::new(".")).unwrap();
        assert_eq!(target.classical_size(), 2);
        // Bare numbers and [re, im] pairs both parse.
        assert_eq!(cfg.target.unwrap().states[1].0[1][1], [1.0, 0.0]);
    }

    #[test]
    fn negative_rate_is_rejected() {
        let text = MINIMAL.replace("\"R1\": 1.25", "\"R1\": -1");
        match parse_config(&text) {
            Err(CliError::Validation { field, reason }) => {
                assert_eq!(field, "R1");
                assert_eq!(reason, "nonnegative");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = MINIMAL.replace("\"n_list\"", "\"bogus\": 1, \"n_list\"");
        match parse_config(&text) {
            Err(CliError::Parse { line, message, .. }) => {
                assert!(line > 1);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn caps_overrides() {
        let mut caps = CapsSpec::default();
        caps.apply_overrides("max_dim=65536, max_blocks=10").unwrap();
        assert_eq!((caps.max_dim, caps.max_blocks), (65536, 10));
        assert!(caps.apply_overrides("nope=1").is_err());
        assert!(caps.apply_overrides("max_dim").is_err());
    }

    #[test]
    fn wrong_topology_for_kind() {
        let text = MINIMAL.replace("simulate-two-node", "region-nc");
        assert!(matches!(parse_config(&text), Err(CliError::Validation { .. })));
    }

    fn matrix_strategy() -> impl Strategy<Value = Matrix> {
        (1usize..4).prop_flat_map(|d| {
            prop::collection::vec(prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3).prop_map(|(a, b)| [a, b]), d), d)
                .prop_map(Matrix)
        })
    }

    fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
        (
            any::<u64>(),
            prop::option::of(0.0f64..8.0),
            prop::option::of(0.0f64..8.0),
            prop::collection::vec(1usize..10, 0..5),
            2usize..500,
            prop::collection::vec(0.0f64..4.0, 0..4),
            prop::collection::vec(matrix_strategy(), 0..3),
            prop::collection::vec(0.0f64..1.0, 0..3),
            prop::option::of(1usize..20),
            any::<bool>(),
        )
            .prop_map(|(seed, r0, r1, n_list, trials, grid, states, pmf, u_max, printed)| ExperimentConfig {
                kind: None,
                seed,
                target: Some(TargetSpec { file: None, topology: Some(TopologySpec::TwoNode), pmf, states, dims: Vec::new() }),
                ensemble: None,
                extension: if printed { ExtensionSpec::Named(ExtensionName::Identity) } else { ExtensionSpec::default() },
                rates: Rates { r0, r1, r: None },
                n_list,
                trials,
                r0_grid: grid,
                region_variant: if printed { VariantSpec::Printed } else { VariantSpec::Proof },
                optimizer: OptimizerSpec { u_max, ..Default::default() },
                oracle: OracleSpec::default(),
                caps: CapsSpec::default(),
                tolerances: TolerancesSpec::default(),
                output: OutputSpec::default(),
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(cfg in config_strategy()) {
            let text = to_json(&cfg);
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(to_json(&back), text);
        }
    }
}
