//! Capacity regions: minimization of the information functionals over
//! feasible extensions, boundary tracing and entanglement screening.
//!
//! Two readings of the two-node and broadcast regions are exposed through
//! [`RegionVariant`]:
//!
//! * `Proof` (default): `R₁ ≥ I(X;U)`, `R₀ + R₁ ≥ I(XQ;U)`, the region the
//!   achievability and converse arguments establish.
//! * `Printed`: `R₀ ≥ I(X;U)`, `R₀ + R₁ ≥ I(XQ;U)`, the statement as
//!   typeset.
//!
//! All values are "best found": the search is local and multi-start, and
//! global optimality is not claimed.

mod optimizer;
mod oracle;

use rayon::prelude::*;

use crate::cq::{CqNetworkState, Extension, Topology};
use crate::limits::Tolerances;
use crate::qstate::{self, DensityOperator, Ppt, RegisterCut};
use crate::{Error, Result};

pub use oracle::{brute_force_oracle, OracleComponent, OracleObjective, OracleOptions, OracleResult};

use optimizer::{Candidate, Problem};

/// A coordination rate pair in bits per symbol.
///
/// On a traced boundary `r1 = None` means no finite `R₁` is achievable at this
/// `R₀`; for no-comm rates it means the communication rate does not apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub r0: f64,
    pub r1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionVariant {
    #[default]
    Proof,
    Printed,
}

impl RegionVariant {
    pub fn name(self) -> &'static str {
        match self {
            RegionVariant::Proof => "proof",
            RegionVariant::Printed => "printed",
        }
    }
}

impl std::str::FromStr for RegionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(RegionVariant::Proof),
            "printed" => Ok(RegionVariant::Printed),
            other => Err(Error::InvalidStructure(format!("unknown region variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStatus {
    Feasible,
    /// A PPT check failed: no extension exists and the rate is `+∞`.
    InfeasibleEntangled,
    /// No feasible extension was found within the search budget.
    Unknown,
}

impl RegionStatus {
    pub fn name(self) -> &'static str {
        match self {
            RegionStatus::Feasible => "FEASIBLE",
            RegionStatus::InfeasibleEntangled => "INFEASIBLE_ENTANGLED",
            RegionStatus::Unknown => "UNKNOWN",
        }
    }
}

/// Outcome of one partial-transpose check.
#[derive(Debug, Clone, PartialEq)]
pub struct PptCertificate {
    /// The checked state and cut, e.g. `"ω: A|BC"`.
    pub cut: String,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Random restarts per auxiliary alphabet size.
    pub restarts: usize,
    /// Largest `|U|` searched; `None` uses the cardinality bound.
    pub u_max: Option<usize>,
    /// Descent iterations per restart, spread over the penalty schedule.
    pub iterations: usize,
    pub seed: u64,
    /// Stop once the best value meets the analytic lower bound.
    pub early_stop: bool,
    /// Objective weights `λ` pooled when tracing a boundary.
    pub lambdas: Vec<f64>,
    pub tolerances: Tolerances,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            u_max: None,
            iterations: 600,
            seed: 0,
            early_stop: true,
            lambdas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub restarts: usize,
    pub iterations: usize,
    pub feasible_candidates: usize,
    /// Smallest feasibility residual seen over every attempt, feasible or not.
    pub best_residual: f64,
    /// Analytic lower bound used for early stopping.
    pub lower_bound: f64,
    pub early_stopped: bool,
    pub u_sizes_searched: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionResult {
    pub topology: Topology,
    /// Name of the minimized functional.
    pub objective: &'static str,
    pub status: RegionStatus,
    /// Best value found; `None` unless `status` is `Feasible`.
    pub value: Option<f64>,
    /// `I(X;U)` and `I(XQ;U)` (for no-comm: 0 and `I(U;ABC)`) at the argmin.
    pub i_xu: Option<f64>,
    pub i_all: Option<f64>,
    /// Common-randomness rate `I(U;Q|X)` sufficient at the argmin.
    pub cr_rate: Option<f64>,
    pub argmin: Option<Extension>,
    /// Trace-norm feasibility residual of the argmin.
    pub residual: Option<f64>,
    pub certificates: Vec<PptCertificate>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionBoundary {
    pub topology: Topology,
    pub variant: RegionVariant,
    pub status: RegionStatus,
    /// Minimal `R₁` for each requested `R₀`, in grid order.
    pub points: Vec<RatePoint>,
    /// `(I(X;U), I(XQ;U))` of every feasible extension found.
    pub pool: Vec<(f64, f64)>,
    pub certificates: Vec<PptCertificate>,
    pub diagnostics: Diagnostics,
}

struct SearchOutcome {
    candidates: Vec<Candidate>,
    diagnostics: Diagnostics,
}

impl SearchOutcome {
    /// Minimum value, first index on ties.
    fn best(&self, lambda: f64) -> Option<&Candidate> {
        let mut best: Option<&Candidate> = None;
        for c in &self.candidates {
            if best.map_or(true, |b| c.value(lambda) < b.value(lambda)) {
                best = Some(c);
            }
        }
        best
    }
}

fn search(target: &CqNetworkState, lambda: f64, lower_bound: f64, opts: &OptimizerOptions) -> SearchOutcome {
    let tol = &opts.tolerances;
    let mut candidates = Vec::new();
    let mut best_residual = f64::INFINITY;
    for ext in optimizer::canonical_extensions(target) {
        let (res, cand) = optimizer::candidate(ext, target, tol);
        best_residual = best_residual.min(res);
        candidates.extend(cand);
    }
    let met = |cands: &[Candidate]| {
        opts.early_stop && cands.iter().any(|c| c.value(lambda) <= lower_bound + tol.num)
    };
    let mut diagnostics = Diagnostics {
        restarts: 0,
        iterations: 0,
        feasible_candidates: 0,
        best_residual,
        lower_bound,
        early_stopped: false,
        u_sizes_searched: 0,
    };
    if met(&candidates) {
        diagnostics.early_stopped = true;
    } else {
        let problem = Problem::new(target);
        let bound = crate::cq::cardinality_bound(
            if target.topology().has_classical() { target.classical_size() } else { 1 },
            &target.local_dims(),
        );
        let u_max = opts.u_max.unwrap_or(bound).max(1);
        for u_count in 1..=u_max {
            let runs: Vec<(usize, f64, Option<Candidate>)> = (0..opts.restarts)
                .into_par_iter()
                .map(|r| {
                    let seed = optimizer::restart_seed(opts.seed, u_count, r);
                    optimizer::local_search(&problem, target, lambda, u_count, opts.iterations, seed, tol)
                })
                .collect();
            diagnostics.u_sizes_searched += 1;
            for (iters, res, cand) in runs {
                diagnostics.restarts += 1;
                diagnostics.iterations += iters;
                diagnostics.best_residual = diagnostics.best_residual.min(res);
                candidates.extend(cand);
            }
            if met(&candidates) {
                diagnostics.early_stopped = true;
                break;
            }
        }
    }
    diagnostics.feasible_candidates = candidates.len();
    SearchOutcome { candidates, diagnostics }
}

fn require(target: &CqNetworkState, topology: Topology) -> Result<()> {
    if target.topology() == topology {
        Ok(())
    } else {
        Err(Error::TopologyMismatch { expected: topology.to_string(), found: target.topology().to_string() })
    }
}

/// Holevo quantity `I(X;Q)_ω`: a lower bound on `I(X;U)` for every feasible extension.
pub fn holevo(target: &CqNetworkState) -> f64 {
    let avg = qstate::von_neumann_entropy(&target.quantum_marginal());
    let cond: f64 = target.blocks().map(|(p, rho)| if p > 0.0 { p * qstate::von_neumann_entropy(rho) } else { 0.0 }).sum();
    (avg - cond).max(0.0)
}

fn result_from(
    target: &CqNetworkState,
    objective: &'static str,
    lambda: f64,
    outcome: SearchOutcome,
    certificates: Vec<PptCertificate>,
) -> RegionResult {
    let best = outcome.best(lambda).cloned();
    RegionResult {
        topology: target.topology(),
        objective,
        status: if best.is_some() { RegionStatus::Feasible } else { RegionStatus::Unknown },
        value: best.as_ref().map(|c| c.value(lambda)),
        i_xu: best.as_ref().map(|c| c.i_xu),
        i_all: best.as_ref().map(|c| c.i_all),
        cr_rate: best.as_ref().map(|c| (c.i_all - c.i_xu).max(0.0)),
        residual: best.as_ref().map(|c| c.residual),
        argmin: best.map(|c| c.ext),
        certificates,
        diagnostics: outcome.diagnostics,
    }
}

/// `min I(X;U)` over two-node extensions: the communication rate with unlimited
/// common randomness.
pub fn min_comm_rate(target: &CqNetworkState, opts: &OptimizerOptions) -> Result<RegionResult> {
    require(target, Topology::TwoNode)?;
    let outcome = search(target, 1.0, holevo(target), opts);
    Ok(result_from(target, "I(X;U)", 1.0, outcome, Vec::new()))
}

/// `min I(XB;U)` over two-node extensions: the rate without common randomness.
pub fn min_no_cr_rate(target: &CqNetworkState, opts: &OptimizerOptions) -> Result<RegionResult> {
    require(target, Topology::TwoNode)?;
    let outcome = search(target, 0.0, holevo(target), opts);
    Ok(result_from(target, "I(XB;U)", 0.0, outcome, Vec::new()))
}

fn ppt_certificate(state: &DensityOperator, name: &str, first: &[&str], second: &[&str]) -> Result<PptCertificate> {
    let cut = RegisterCut::new(first.iter().copied(), second.iter().copied());
    let outcome = qstate::ppt_check(state, &cut)?;
    Ok(PptCertificate {
        cut: format!("{name}: {}|{}", first.concat(), second.concat()),
        min_eigenvalue: outcome.min_eigenvalue(),
        passed: matches!(outcome, Ppt::Pass { .. }),
    })
}

/// No-comm capacity `min I(U;ABC)` over fully product extensions, after a PPT
/// screen on the three one-versus-rest cuts.
pub fn nc_capacity(target: &CqNetworkState, opts: &OptimizerOptions) -> Result<RegionResult> {
    require(target, Topology::NoComm)?;
    let omega = &target.conditionals()[0];
    let certificates = vec![
        ppt_certificate(omega, "ω", &["A"], &["B", "C"])?,
        ppt_certificate(omega, "ω", &["B"], &["A", "C"])?,
        ppt_certificate(omega, "ω", &["C"], &["A", "B"])?,
    ];
    if certificates.iter().any(|c| !c.passed) {
        return Ok(RegionResult {
            topology: Topology::NoComm,
            objective: "I(U;ABC)",
            status: RegionStatus::InfeasibleEntangled,
            value: None,
            i_xu: None,
            i_all: None,
            cr_rate: None,
            argmin: None,
            residual: None,
            certificates,
            diagnostics: empty_diagnostics(),
        });
    }
    let mut lower_bound: f64 = 0.0;
    for (a, rest) in [("A", ["B", "C"]), ("B", ["A", "C"]), ("C", ["A", "B"])] {
        lower_bound = lower_bound.max(qstate::mutual_information(omega, &RegisterCut::new([a], rest))?);
    }
    let outcome = search(target, 0.0, lower_bound, opts);
    let mut result = result_from(target, "I(U;ABC)", 0.0, outcome, certificates);
    result.cr_rate = None;
    Ok(result)
}

fn boundary_points(pool: &[(f64, f64)], r0_grid: &[f64], variant: RegionVariant, tol: &Tolerances) -> Vec<RatePoint> {
    r0_grid
        .iter()
        .map(|&r0| {
            let r1 = match variant {
                RegionVariant::Proof => pool.iter().map(|&(ixu, iall)| ixu.max(iall - r0).max(0.0)).reduce(f64::min),
                RegionVariant::Printed => pool
                    .iter()
                    .filter(|&&(ixu, _)| ixu <= r0 + tol.num)
                    .map(|&(_, iall)| (iall - r0).max(0.0))
                    .reduce(f64::min),
            };
            RatePoint { r0, r1 }
        })
        .collect()
}

fn check_grid(r0_grid: &[f64]) -> Result<()> {
    match r0_grid.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        Some(bad) => Err(Error::InvalidStructure(format!("R0 = {bad} must be a nonnegative number"))),
        None => Ok(()),
    }
}

fn trace_boundary(
    target: &CqNetworkState,
    r0_grid: &[f64],
    variant: RegionVariant,
    opts: &OptimizerOptions,
    certificates: Vec<PptCertificate>,
) -> RegionBoundary {
    let lower_bound = holevo(target);
    let mut pool = Vec::new();
    let mut diagnostics = Diagnostics {
        restarts: 0,
        iterations: 0,
        feasible_candidates: 0,
        best_residual: f64::INFINITY,
        lower_bound,
        early_stopped: false,
        u_sizes_searched: 0,
    };
    for &lambda in &opts.lambdas {
        let outcome = search(target, lambda, lower_bound, opts);
        let d = &outcome.diagnostics;
        diagnostics.restarts += d.restarts;
        diagnostics.iterations += d.iterations;
        diagnostics.feasible_candidates += d.feasible_candidates;
        diagnostics.best_residual = diagnostics.best_residual.min(d.best_residual);
        diagnostics.early_stopped |= d.early_stopped;
        diagnostics.u_sizes_searched = diagnostics.u_sizes_searched.max(d.u_sizes_searched);
        pool.extend(outcome.candidates.iter().map(|c| (c.i_xu, c.i_all)));
    }
    let status = if pool.is_empty() { RegionStatus::Unknown } else { RegionStatus::Feasible };
    RegionBoundary {
        topology: target.topology(),
        variant,
        status,
        points: boundary_points(&pool, r0_grid, variant, &opts.tolerances),
        pool,
        certificates,
        diagnostics,
    }
}

/// `min I(XB₁B₂;U)` over broadcast extensions, after the same PPT screen as
/// [`broadcast_region`].
pub fn min_broadcast_rate(target: &CqNetworkState, opts: &OptimizerOptions) -> Result<RegionResult> {
    require(target, Topology::Broadcast)?;
    let certificates = broadcast_certificates(target)?;
    if certificates.iter().any(|c| !c.passed) {
        return Ok(RegionResult {
            topology: Topology::Broadcast,
            objective: "I(XB1B2;U)",
            status: RegionStatus::InfeasibleEntangled,
            value: None,
            i_xu: None,
            i_all: None,
            cr_rate: None,
            argmin: None,
            residual: None,
            certificates,
            diagnostics: empty_diagnostics(),
        });
    }
    let outcome = search(target, 0.0, holevo(target), opts);
    Ok(result_from(target, "I(XB1B2;U)", 0.0, outcome, certificates))
}

fn broadcast_certificates(target: &CqNetworkState) -> Result<Vec<PptCertificate>> {
    let mut certificates = Vec::new();
    for (x, rho) in target.conditionals().iter().enumerate() {
        certificates.push(ppt_certificate(rho, &format!("ω^{x}"), &["B1"], &["B2"])?);
    }
    certificates.push(ppt_certificate(&target.quantum_marginal(), "ω", &["B1"], &["B2"])?);
    Ok(certificates)
}

fn empty_diagnostics() -> Diagnostics {
    Diagnostics {
        restarts: 0,
        iterations: 0,
        feasible_candidates: 0,
        best_residual: f64::INFINITY,
        lower_bound: f64::INFINITY,
        early_stopped: false,
        u_sizes_searched: 0,
    }
}

/// Minimal `R₁` over a grid of `R₀` for the two-node region.
///
/// Extensions found while minimizing `λ·I(X;U) + (1−λ)·I(XB;U)` for every
/// `λ` in `opts.lambdas` are pooled. Under the proof reading
/// `R₁(R₀) = min_pool max(I(X;U), I(XB;U) − R₀)`; under the printed reading
/// `R₁(R₀) = min_{pool, I(X;U) ≤ R₀} max(0, I(XB;U) − R₀)`.
pub fn trace_two_node_region(
    target: &CqNetworkState,
    r0_grid: &[f64],
    variant: RegionVariant,
    opts: &OptimizerOptions,
) -> Result<RegionBoundary> {
    require(target, Topology::TwoNode)?;
    check_grid(r0_grid)?;
    Ok(trace_boundary(target, r0_grid, variant, opts, Vec::new()))
}

/// Broadcast analogue of [`trace_two_node_region`] with `I(XB₁B₂;U)`, after a
/// PPT screen of `B₁|B₂` on every conditional and on the average state.
pub fn broadcast_region(
    target: &CqNetworkState,
    r0_grid: &[f64],
    variant: RegionVariant,
    opts: &OptimizerOptions,
) -> Result<RegionBoundary> {
    require(target, Topology::Broadcast)?;
    check_grid(r0_grid)?;
    let certificates = broadcast_certificates(target)?;
    if certificates.iter().any(|c| !c.passed) {
        return Ok(RegionBoundary {
            topology: Topology::Broadcast,
            variant,
            status: RegionStatus::InfeasibleEntangled,
            points: r0_grid.iter().map(|&r0| RatePoint { r0, r1: None }).collect(),
            pool: Vec::new(),
            certificates,
            diagnostics: empty_diagnostics(),
        });
    }
    Ok(trace_boundary(target, r0_grid, variant, opts, certificates))
}
