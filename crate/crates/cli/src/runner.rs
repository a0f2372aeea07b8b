//! Dispatch from a validated config to the library, plus the JSON record and
//! CSV side file every run leaves behind.
//!
//! The CSV holds only quantities determined by (config, seed, version), so two
//! runs of the same config produce identical bytes. Wall time lives in the JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use coordsim::cq::{CqNetworkState, Extension, Topology};
use coordsim::protocols::{self, ProtocolRow};
use coordsim::region::{self, Diagnostics, PptCertificate, RegionBoundary, RegionResult, RegionStatus};
use coordsim::softcover::{self, CurveRow};
use coordsim::{qstate, RegisterCut};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExplicitExtension, ExtensionName, ExtensionSpec, Kind, Matrix};
use crate::error::{exit_code, CliError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where a run left its outputs and how the process should exit.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
    pub record: Value,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct CurveCsv {
    n: usize,
    #[serde(rename = "R")]
    rate: f64,
    trials: usize,
    mean_gap: f64,
    std_err: f64,
    mutual_info_ref: f64,
}

impl From<&CurveRow> for CurveCsv {
    fn from(r: &CurveRow) -> Self {
        Self { n: r.n, rate: r.rate, trials: r.trials, mean_gap: r.mean_gap, std_err: r.std_err, mutual_info_ref: r.mutual_info_ref }
    }
}

#[derive(Serialize)]
struct ProtocolCsv {
    topology: &'static str,
    n: usize,
    #[serde(rename = "R0")]
    r0: f64,
    #[serde(rename = "R1")]
    r1: Option<f64>,
    trials: usize,
    mean_gap: f64,
    std_err: f64,
    max_marginal_error: f64,
}

impl From<&ProtocolRow> for ProtocolCsv {
    fn from(r: &ProtocolRow) -> Self {
        Self {
            topology: r.topology.name(),
            n: r.n,
            r0: r.r0,
            r1: r.r1,
            trials: r.trials,
            mean_gap: r.mean_gap,
            std_err: r.std_err,
            max_marginal_error: r.max_marginal_error,
        }
    }
}

/// One boundary point; an empty `R1` means no finite rate was found.
#[derive(Serialize)]
struct BoundaryCsv {
    variant: &'static str,
    #[serde(rename = "R0")]
    r0: f64,
    #[serde(rename = "R1")]
    r1: Option<f64>,
}

#[derive(Serialize)]
struct RegionCsv {
    topology: &'static str,
    objective: &'static str,
    status: &'static str,
    value: Option<f64>,
    i_xu: Option<f64>,
    i_all: Option<f64>,
    cr_rate: Option<f64>,
    residual: Option<f64>,
    u_count: Option<usize>,
}

#[derive(Serialize)]
struct OracleCsv {
    objective: &'static str,
    value: f64,
    components: usize,
    visited: u64,
}

#[derive(Serialize)]
struct InfoCsv {
    quantity: String,
    value: f64,
}

/// A kind-specific result: CSV rows plus extra JSON fields.
struct Outcome {
    status: &'static str,
    exit_code: i32,
    rows: Vec<Value>,
    csv: Vec<u8>,
    extra: Value,
}

fn write_csv<T: Serialize>(rows: &[T]) -> Result<(Vec<u8>, Vec<Value>), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let values = rows.iter().map(|r| serde_json::to_value(r).expect("row serializes")).collect();
    Ok((bytes, values))
}

fn ok_outcome<T: Serialize>(rows: &[T], extra: Value) -> Result<Outcome, CliError> {
    let (csv, rows) = write_csv(rows)?;
    Ok(Outcome { status: "OK", exit_code: exit_code::OK, rows, csv, extra })
}

fn status_exit(status: RegionStatus) -> i32 {
    match status {
        RegionStatus::InfeasibleEntangled => exit_code::INFEASIBLE_ENTANGLED,
        RegionStatus::Feasible | RegionStatus::Unknown => exit_code::OK,
    }
}

fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "restarts": d.restarts,
        "iterations": d.iterations,
        "feasible_candidates": d.feasible_candidates,
        "best_residual": d.best_residual,
        "lower_bound": d.lower_bound,
        "early_stopped": d.early_stopped,
        "u_sizes_searched": d.u_sizes_searched,
    })
}

fn certificates_json(certs: &[PptCertificate]) -> Value {
    Value::Array(
        certs
            .iter()
            .map(|c| json!({ "cut": c.cut, "min_eigenvalue": c.min_eigenvalue, "passed": c.passed }))
            .collect(),
    )
}

/// An extension in the config's explicit form, so it can be pasted back in.
pub fn extension_spec(ext: &Extension) -> ExplicitExtension {
    ExplicitExtension {
        joint: ext.joint().to_vec(),
        factors: (0..ext.u_count())
            .map(|u| ext.factors(u).iter().map(|f| Matrix::from_complex(f.matrix())).collect())
            .collect(),
    }
}

fn region_result_json(r: &RegionResult) -> Value {
    json!({
        "objective": r.objective,
        "status": r.status.name(),
        "value": r.value,
        "i_xu": r.i_xu,
        "i_all": r.i_all,
        "cr_rate": r.cr_rate,
        "residual": r.residual,
        "argmin": r.argmin.as_ref().map(extension_spec),
        "certificates": certificates_json(&r.certificates),
        "diagnostics": diagnostics_json(&r.diagnostics),
    })
}

fn region_result_outcome(r: &RegionResult) -> Result<Outcome, CliError> {
    let row = RegionCsv {
        topology: r.topology.name(),
        objective: r.objective,
        status: r.status.name(),
        value: r.value,
        i_xu: r.i_xu,
        i_all: r.i_all,
        cr_rate: r.cr_rate,
        residual: r.residual,
        u_count: r.argmin.as_ref().map(Extension::u_count),
    };
    let (csv, rows) = write_csv(&[row])?;
    Ok(Outcome { status: r.status.name(), exit_code: status_exit(r.status), rows, csv, extra: region_result_json(r) })
}

fn boundary_outcome(b: &RegionBoundary) -> Result<Outcome, CliError> {
    let rows: Vec<BoundaryCsv> = b.points.iter().map(|p| BoundaryCsv { variant: b.variant.name(), r0: p.r0, r1: p.r1 }).collect();
    let (csv, rows) = write_csv(&rows)?;
    let extra = json!({
        "variant": b.variant.name(),
        "pool": b.pool.iter().map(|&(i_xu, i_all)| json!({ "i_xu": i_xu, "i_all": i_all })).collect::<Vec<_>>(),
        "certificates": certificates_json(&b.certificates),
        "diagnostics": diagnostics_json(&b.diagnostics),
    });
    Ok(Outcome { status: b.status.name(), exit_code: status_exit(b.status), rows, csv, extra })
}

/// The extension a simulation uses: explicit, `U = X`, or the argmin of the
/// matching rate search. `Err(outcome)` carries an entangled-target report.
fn simulation_extension(cfg: &ExperimentConfig, target: &CqNetworkState) -> Result<Result<(Extension, Value), Outcome>, CliError> {
    let topology = target.topology();
    match &cfg.extension {
        ExtensionSpec::Explicit(_) => {
            let ext = cfg.explicit_extension(topology)?.expect("explicit extension");
            Ok(Ok((ext, json!("explicit"))))
        }
        ExtensionSpec::Named(ExtensionName::Identity) => {
            let ext = Extension::identity(target).map_err(|e| CliError::validation("extension", &e.to_string()))?;
            Ok(Ok((ext, json!("identity"))))
        }
        ExtensionSpec::Named(ExtensionName::Auto) => {
            let opts = cfg.optimizer_options();
            let search = match topology {
                Topology::TwoNode => region::min_no_cr_rate(target, &opts)?,
                Topology::Broadcast => region::min_broadcast_rate(target, &opts)?,
                Topology::NoComm => region::nc_capacity(target, &opts)?,
            };
            match (&search.argmin, search.status) {
                (Some(ext), _) => Ok(Ok((ext.clone(), json!({ "auto": region_result_json(&search) })))),
                (None, RegionStatus::InfeasibleEntangled) => {
                    let mut outcome = region_result_outcome(&search)?;
                    outcome.csv = write_csv::<ProtocolCsv>(&[])?.0;
                    outcome.rows.clear();
                    Ok(Err(outcome))
                }
                (None, _) => Err(CliError::Core(coordsim::Error::InfeasibleExtension {
                    residual: search.diagnostics.best_residual,
                    tolerance: opts.tolerances.feas,
                })),
            }
        }
    }
}

fn info_outcome(target: &CqNetworkState) -> Result<Outcome, CliError> {
    let mut rows = vec![
        InfoCsv { quantity: "classical_size".into(), value: target.classical_size() as f64 },
        InfoCsv { quantity: "quantum_dim".into(), value: target.quantum_dim() as f64 },
        InfoCsv { quantity: "entropy_Q".into(), value: qstate::von_neumann_entropy(&target.quantum_marginal()) },
    ];
    if target.topology().has_classical() {
        rows.push(InfoCsv { quantity: "holevo_XQ".into(), value: region::holevo(target) });
    }
    let omega = target.quantum_marginal();
    let labels = target.topology().quantum_labels();
    if labels.len() > 1 {
        for &a in labels {
            let rest: Vec<&str> = labels.iter().copied().filter(|&l| l != a).collect();
            let cut = RegisterCut::new([a], rest.iter().copied());
            rows.push(InfoCsv {
                quantity: format!("I({a};{})", rest.concat()),
                value: qstate::mutual_information(&omega, &cut)?,
            });
            rows.push(InfoCsv {
                quantity: format!("ppt_min_eig({a}|{})", rest.concat()),
                value: qstate::ppt_check(&omega, &cut)?.min_eigenvalue(),
            });
        }
    }
    ok_outcome(&rows, json!({ "topology": target.topology().name(), "local_dims": target.local_dims() }))
}

fn dispatch(cfg: &ExperimentConfig, base: &Path) -> Result<Outcome, CliError> {
    let caps = cfg.caps();
    let tol = cfg.tol();
    let kind = cfg.kind();
    if kind == Kind::Resolvability {
        let ens = cfg.load_ensemble()?;
        let rate = cfg.rates.r.expect("validated");
        let rows = softcover::resolvability_curve(&ens, rate, &cfg.n_list, cfg.trials, cfg.seed, &caps)?;
        let rows: Vec<CurveCsv> = rows.iter().map(CurveCsv::from).collect();
        return ok_outcome(&rows, json!({ "mutual_info_ref": ens.mutual_information() }));
    }
    let target = cfg.load_target(base)?;
    let opts = cfg.optimizer_options();
    let variant = cfg.region_variant.into();
    match kind {
        Kind::Resolvability => unreachable!("handled above"),
        Kind::Info => info_outcome(&target),
        Kind::SimulateTwoNode | Kind::SimulateBroadcast | Kind::SimulateNc => {
            let (ext, ext_info) = match simulation_extension(cfg, &target)? {
                Ok(found) => found,
                Err(entangled) => return Ok(entangled),
            };
            let r0 = cfg.rates.r0.expect("validated");
            let rows = match kind {
                Kind::SimulateTwoNode => {
                    let r1 = cfg.rates.r1.expect("validated");
                    protocols::run_two_node(&target, &ext, r0, r1, &cfg.n_list, cfg.trials, cfg.seed, &caps, &tol)?
                }
                Kind::SimulateBroadcast => {
                    let r1 = cfg.rates.r1.expect("validated");
                    protocols::run_broadcast(&target, &ext, r0, r1, &cfg.n_list, cfg.trials, cfg.seed, &caps, &tol)?
                }
                _ => protocols::run_no_comm(&target, &ext, r0, &cfg.n_list, cfg.trials, cfg.seed, &caps, &tol)?,
            };
            let rows: Vec<ProtocolCsv> = rows.iter().map(ProtocolCsv::from).collect();
            ok_outcome(&rows, json!({ "extension": ext_info, "extension_used": extension_spec(&ext) }))
        }
        Kind::RegionTwoNode => boundary_outcome(&region::trace_two_node_region(&target, &cfg.r0_grid, variant, &opts)?),
        Kind::RegionBroadcast => boundary_outcome(&region::broadcast_region(&target, &cfg.r0_grid, variant, &opts)?),
        Kind::RegionNc => region_result_outcome(&region::nc_capacity(&target, &opts)?),
        Kind::Oracle => {
            let (objective, oracle_opts) = cfg.oracle_options();
            let result = region::brute_force_oracle(&target, objective, &oracle_opts)?;
            let name = match objective {
                region::OracleObjective::ClassicalInput => "I(X;U)",
                region::OracleObjective::All => "I(U;all)",
            };
            let row = OracleCsv { objective: name, value: result.value, components: result.decomposition.len(), visited: result.visited };
            let decomposition: Vec<Value> = result
                .decomposition
                .iter()
                .map(|c| json!({ "weight": c.weight, "factors": c.factors }))
                .collect();
            ok_outcome(&[row], json!({ "decomposition": decomposition }))
        }
    }
}

/// First `<kind>-<unix-ms>` stem in `dir` not already taken.
fn output_stem(dir: &Path, kind: Kind) -> PathBuf {
    let mut ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
    loop {
        let stem = dir.join(format!("{}-{ms}", kind.name()));
        if !stem.with_extension("json").exists() && !stem.with_extension("csv").exists() {
            return stem;
        }
        ms += 1;
    }
}

/// Runs a validated config with `kind` set. `base` resolves relative state files.
///
/// Library errors propagate as `Err`; an entangled target is a completed run
/// whose record carries the failing certificate and a nonzero exit code.
pub fn run(cfg: &ExperimentConfig, base: &Path) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let outcome = dispatch(cfg, base)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let config_echo = serde_json::to_value(cfg).expect("config serializes");
    let mut record = json!({
        "kind": cfg.kind().name(),
        "version": VERSION,
        "seed": cfg.seed,
        "status": outcome.status,
        "wall_time_s": wall_time_s,
        "config": config_echo,
        "rows": outcome.rows,
    });
    if let (Value::Object(map), Value::Object(extra)) = (&mut record, outcome.extra) {
        map.extend(extra);
    }
    fs::create_dir_all(&cfg.output.dir)?;
    let stem = output_stem(&cfg.output.dir, cfg.kind());
    let json_path = stem.with_extension("json");
    let csv_path = stem.with_extension("csv");
    let mut text = serde_json::to_string_pretty(&record).expect("record serializes");
    text.push('\n');
    fs::write(&json_path, text)?;
    fs::write(&csv_path, &outcome.csv)?;
    log::info!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(RunOutput { json_path, csv_path, record, exit_code: outcome.exit_code })
}

/// Reads and parses a config file, fills `kind` from the subcommand and
/// rejects a conflicting one.
pub fn load_config(path: &Path, kind: Kind) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(CliError::from_json)?;
    match cfg.kind {
        Some(k) if k != kind => {
            return Err(CliError::validation("kind", &format!("config is for `{k}`, subcommand is `{kind}`")));
        }
        _ => cfg.kind = Some(kind),
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Applies `COORDSIM_CAPS`-style overrides to a config.
pub fn apply_caps_env(cfg: &mut ExperimentConfig, value: Option<&str>) -> Result<(), CliError> {
    if let Some(v) = value {
        cfg.caps.apply_overrides(v)?;
    }
    Ok(())
}

