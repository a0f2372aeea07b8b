//! Exact execution of the coordination codes at small blocklength.
//!
//! Two-node and broadcast codes share one construction. A codebook
//! `u^n(i, j)` is drawn from `p_U` with `⌈2^{nR₀}⌉` bins of `⌈2^{nR₁}⌉`
//! codewords. Given the source sequence `x^n` and common randomness `j`,
//! the encoder picks `i` with probability proportional to
//! `p_{X|U}^n(x^n | u^n(i, j))`. The receivers prepare
//! `⊗_k θ^{u_k(i,j)}` (two-node) or `⊗_k θ^{u_k} ⊗ η^{u_k}` (broadcast).
//!
//! The induced state is computed exactly: the expectation over `j` and `i`
//! is a weighted sum and only the codebook is random. Both the induced state
//! and the target `ω^{⊗n}` are block diagonal over `x^n`, so the trace
//! distance is the sum of the per-block trace norms.

use rayon::prelude::*;

use crate::cq::{self, CqNetworkState, Extension, Topology};
use crate::limits::{self, Caps, Tolerances};
use crate::linalg::{self, CMatrix};
use crate::qstate::{DensityOperator, Register};
use crate::softcover::{self, Codebook};
use crate::tensorsum::{LocalOps, Operator};
use crate::{Error, Result};

fn ensure_feasible(target: &CqNetworkState, ext: &Extension, tol: &Tolerances) -> Result<()> {
    let residual = cq::feasibility_residual(ext, target)?;
    if residual > tol.feas {
        return Err(Error::InfeasibleExtension { residual, tolerance: tol.feas });
    }
    Ok(())
}

/// Local operator sets for the receivers' outputs and for the target blocks,
/// in matching (diagonal or dense) representation.
fn operator_sets(target: &CqNetworkState, ext: &Extension) -> (LocalOps, LocalOps) {
    let outputs = LocalOps::new((0..ext.u_count()).map(|u| ext.output_state(u).into_matrix()).collect());
    let targets = LocalOps::new(target.conditionals().iter().map(|s| s.matrix().clone()).collect());
    if outputs.is_diagonal() && targets.is_diagonal() {
        (outputs, targets)
    } else {
        (outputs.densify(), targets.densify())
    }
}

/// A two-node or broadcast coordination code.
#[derive(Debug, Clone)]
pub struct CqCode {
    target: CqNetworkState,
    ext: Extension,
    r0: f64,
    r1: f64,
    codebook: Codebook,
    p_x_given_u: Vec<Vec<f64>>,
}

pub type TwoNodeCode = CqCode;
pub type BroadcastCode = CqCode;

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidStructure(format!("{name} = {r} must be a nonnegative number")))
    }
}

impl CqCode {
    /// Builds the code with a fresh codebook drawn from `p_U`.
    pub fn new(
        target: &CqNetworkState,
        ext: &Extension,
        r0: f64,
        r1: f64,
        n: usize,
        seed: u64,
        caps: &Caps,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_rate("R0", r0)?;
        check_rate("R1", r1)?;
        let bins = softcover::codebook_size(n, r0);
        let size = softcover::codebook_size(n, r1);
        let codebook = softcover::draw_codebook(&ext.p_u(), n, bins, size, seed, caps)?;
        Self::with_codebook(target, ext, r0, r1, codebook, tol)
    }

    /// Builds the code around a given codebook, which must have the shape the rates imply.
    pub fn with_codebook(
        target: &CqNetworkState,
        ext: &Extension,
        r0: f64,
        r1: f64,
        codebook: Codebook,
        tol: &Tolerances,
    ) -> Result<Self> {
        if !matches!(target.topology(), Topology::TwoNode | Topology::Broadcast) {
            return Err(Error::TopologyMismatch {
                expected: "two-node or broadcast".into(),
                found: target.topology().to_string(),
            });
        }
        ensure_feasible(target, ext, tol)?;
        let n = codebook.n();
        let (bins, size) = (softcover::codebook_size(n, r0), softcover::codebook_size(n, r1));
        if codebook.num_bins() != bins || codebook.bin_size() != size {
            return Err(Error::InvalidStructure(format!(
                "codebook is {}x{}, rates require {bins}x{size}",
                codebook.num_bins(),
                codebook.bin_size()
            )));
        }
        if codebook.alphabet_size() != ext.u_count() {
            return Err(Error::LengthMismatch { expected: ext.u_count(), found: codebook.alphabet_size() });
        }
        Ok(Self {
            target: target.clone(),
            ext: ext.clone(),
            r0,
            r1,
            p_x_given_u: ext.p_x_given_u(),
            codebook,
        })
    }

    pub fn n(&self) -> usize {
        self.codebook.n()
    }

    pub fn rates(&self) -> (f64, f64) {
        (self.r0, self.r1)
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn extension(&self) -> &Extension {
        &self.ext
    }

    pub fn target(&self) -> &CqNetworkState {
        &self.target
    }
}

/// `F(i | x^n, j) ∝ p_{X|U}^n(x^n | u^n(i, j))`, uniform when every likelihood is zero.
pub fn encoder_pmf(code: &CqCode, x_seq: &[u16], j: usize) -> Result<Vec<f64>> {
    let n = code.n();
    if x_seq.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: x_seq.len() });
    }
    if j >= code.codebook.num_bins() {
        return Err(Error::InvalidStructure(format!("bin {j} out of range")));
    }
    let mut weights: Vec<f64> = code
        .codebook
        .bin(j)
        .map(|u| u.iter().zip(x_seq).map(|(&u, &x)| code.p_x_given_u[u as usize][x as usize]).product())
        .collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    } else {
        let m = weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = 1.0 / m);
    }
    Ok(weights)
}

fn for_each_sequence(k: usize, n: usize, mut f: impl FnMut(&[u16])) {
    let mut seq = vec![0u16; n];
    let total = limits::saturating_pow(k, n);
    let mut buf = vec![0usize; n];
    let dims = vec![k; n];
    for idx in 0..total {
        linalg::digits(idx, &dims, &mut buf);
        seq.iter_mut().zip(&buf).for_each(|(s, &b)| *s = b as u16);
        f(&seq);
    }
}

fn check_block_caps(code: &CqCode, caps: &Caps) -> Result<()> {
    let n = code.n();
    limits::check(limits::saturating_pow(code.target.classical_size(), n), caps.max_blocks)?;
    limits::check(limits::saturating_pow(code.target.quantum_dim(), n), caps.max_block_dim)?;
    Ok(())
}

/// Conditional receiver state for source sequence `x^n`:
/// `2^{−nR₀} Σ_j Σ_i F(i|x^n, j) ⊗_k out(u_k(i, j))`.
fn block_state(code: &CqCode, outputs: &LocalOps, x_seq: &[u16]) -> Result<Operator> {
    let bins = code.codebook.num_bins();
    let mut words: Vec<(f64, &[u16])> = Vec::new();
    for j in 0..bins {
        let f = encoder_pmf(code, x_seq, j)?;
        for (i, w) in f.into_iter().enumerate() {
            if w > 0.0 {
                words.push((w / bins as f64, code.codebook.codeword(j, i)));
            }
        }
    }
    Ok(outputs.weighted_sum(&mut words))
}

fn sequence_probability(pmf: &[f64], seq: &[u16]) -> f64 {
    seq.iter().map(|&x| pmf[x as usize]).product()
}

/// One classical block of an induced c-q state.
#[derive(Debug, Clone)]
pub struct InducedBlock {
    pub x_seq: Vec<u16>,
    /// `p_X^n(x^n)`.
    pub weight: f64,
    /// Unit-trace conditional state of the receivers.
    pub state: CMatrix,
}

/// Induced `ρ̂_{X^n Q^n}` as its classical blocks.
#[derive(Debug, Clone)]
pub struct InducedState {
    pub blocks: Vec<InducedBlock>,
    pub quantum_registers: Vec<Register>,
    pub alphabet: usize,
}

impl InducedState {
    /// Dense operator on `Xn ⊗ Q^n`; for cross-checks on small instances.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let d: usize = self.quantum_registers.iter().map(|r| r.dim).product();
        let k = self.blocks.len();
        let mut m = CMatrix::zeros(k * d, k * d);
        for (x, b) in self.blocks.iter().enumerate() {
            m.view_mut((x * d, x * d), (d, d)).copy_from(&(&b.state * linalg::c(b.weight)));
        }
        let mut regs = vec![Register::new("Xn", k)];
        regs.extend(self.quantum_registers.iter().cloned());
        DensityOperator::from_parts(m, regs)
    }
}

fn n_registers(base: &[Register], n: usize) -> Vec<Register> {
    (1..=n)
        .flat_map(|k| base.iter().map(move |r| Register::new(format!("{}_{k}", r.name), r.dim)))
        .collect()
}

/// Exact induced state of the code, one block per source sequence.
pub fn induced_state(code: &CqCode, caps: &Caps) -> Result<InducedState> {
    check_block_caps(code, caps)?;
    let (outputs, _) = operator_sets(&code.target, &code.ext);
    let mut blocks = Vec::new();
    let mut err = None;
    for_each_sequence(code.target.classical_size(), code.n(), |seq| {
        if err.is_some() {
            return;
        }
        match block_state(code, &outputs, seq) {
            Ok(op) => blocks.push(InducedBlock {
                x_seq: seq.to_vec(),
                weight: sequence_probability(code.target.pmf(), seq),
                state: op.into_dense(),
            }),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(InducedState {
        blocks,
        quantum_registers: n_registers(code.target.quantum_registers(), code.n()),
        alphabet: code.target.classical_size(),
    })
}

/// `ω^{⊗n}` in the same block layout as [`induced_state`].
pub fn target_power(target: &CqNetworkState, n: usize, caps: &Caps) -> Result<InducedState> {
    limits::check(limits::saturating_pow(target.classical_size(), n), caps.max_blocks)?;
    limits::check(limits::saturating_pow(target.quantum_dim(), n), caps.max_block_dim)?;
    let ops = LocalOps::new(target.conditionals().iter().map(|s| s.matrix().clone()).collect());
    let mut blocks = Vec::new();
    for_each_sequence(target.classical_size(), n, |seq| {
        blocks.push(InducedBlock {
            x_seq: seq.to_vec(),
            weight: sequence_probability(target.pmf(), seq),
            state: ops.tensor_word(seq).into_dense(),
        })
    });
    Ok(InducedState {
        blocks,
        quantum_registers: n_registers(target.quantum_registers(), n),
        alphabet: target.classical_size(),
    })
}

/// Trace distance of one code realization together with the classical-marginal check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    /// `‖ρ̂_{X^n Q^n} − ω^{⊗n}‖₁`.
    pub gap: f64,
    /// `max_{x^n} p(x^n)·|Tr ρ̂^{x^n} − 1|`: deviation of the induced X-marginal from `p_X^n`.
    pub marginal_error: f64,
}

/// `Σ_{x^n} p(x^n) ‖ρ̂^{x^n} − ω^{x^n}‖₁`.
pub fn protocol_gap(code: &CqCode, caps: &Caps) -> Result<GapReport> {
    check_block_caps(code, caps)?;
    let (outputs, targets) = operator_sets(&code.target, &code.ext);
    let mut gap = 0.0;
    let mut marginal_error = 0.0f64;
    let mut err = None;
    for_each_sequence(code.target.classical_size(), code.n(), |seq| {
        if err.is_some() {
            return;
        }
        let p = sequence_probability(code.target.pmf(), seq);
        if p == 0.0 {
            return;
        }
        match block_state(code, &outputs, seq) {
            Ok(block) => {
                marginal_error = marginal_error.max(p * (block.trace() - 1.0).abs());
                gap += p * block.trace_distance(&targets.tensor_word(seq));
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(GapReport { gap, marginal_error }),
    }
}

/// One row of a protocol Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRow {
    pub topology: Topology,
    pub n: usize,
    pub r0: f64,
    /// Communication rate; absent for no-comm.
    pub r1: Option<f64>,
    pub trials: usize,
    pub mean_gap: f64,
    pub std_err: f64,
    /// Largest classical-marginal deviation over all trials.
    pub max_marginal_error: f64,
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        Err(Error::InvalidStructure("at least two trials are needed for a standard error".into()))
    } else {
        Ok(())
    }
}

fn run_cq(
    topology: Topology,
    target: &CqNetworkState,
    ext: &Extension,
    r0: f64,
    r1: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    caps: &Caps,
    tol: &Tolerances,
) -> Result<Vec<ProtocolRow>> {
    if target.topology() != topology {
        return Err(Error::TopologyMismatch { expected: topology.to_string(), found: target.topology().to_string() });
    }
    check_trials(trials)?;
    ensure_feasible(target, ext, tol)?;
    n_list
        .iter()
        .map(|&n| {
            let reports = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let code = CqCode::new(target, ext, r0, r1, n, softcover::trial_seed(seed, n, t), caps, tol)?;
                    protocol_gap(&code, caps)
                })
                .collect::<Result<Vec<GapReport>>>()?;
            let max_marginal_error = reports.iter().map(|r| r.marginal_error).fold(0.0, f64::max);
            if max_marginal_error > tol.num {
                return Err(Error::InvalidStructure(format!(
                    "induced classical marginal deviates from p_X^n by {max_marginal_error:.3e}"
                )));
            }
            let gaps: Vec<f64> = reports.iter().map(|r| r.gap).collect();
            let (mean_gap, std_err) = softcover::mean_and_std_err(&gaps);
            Ok(ProtocolRow { topology, n, r0, r1: Some(r1), trials, mean_gap, std_err, max_marginal_error })
        })
        .collect()
}

/// Monte Carlo over codebooks of the two-node protocol gap.
#[allow(clippy::too_many_arguments)]
pub fn run_two_node(
    target: &CqNetworkState,
    ext: &Extension,
    r0: f64,
    r1: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    caps: &Caps,
    tol: &Tolerances,
) -> Result<Vec<ProtocolRow>> {
    run_cq(Topology::TwoNode, target, ext, r0, r1, n_list, trials, seed, caps, tol)
}

/// Monte Carlo over codebooks of the broadcast protocol gap.
#[allow(clippy::too_many_arguments)]
pub fn run_broadcast(
    target: &CqNetworkState,
    ext: &Extension,
    r0: f64,
    r1: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    caps: &Caps,
    tol: &Tolerances,
) -> Result<Vec<ProtocolRow>> {
    run_cq(Topology::Broadcast, target, ext, r0, r1, n_list, trials, seed, caps, tol)
}

/// No-communication code: every party reads the same codeword `u^n(j)`.
#[derive(Debug, Clone)]
pub struct NoCommCode {
    target: CqNetworkState,
    ext: Extension,
    r0: f64,
    codebook: Codebook,
}

impl NoCommCode {
    pub fn new(target: &CqNetworkState, ext: &Extension, r0: f64, n: usize, seed: u64, caps: &Caps, tol: &Tolerances) -> Result<Self> {
        if target.topology() != Topology::NoComm {
            return Err(Error::TopologyMismatch { expected: Topology::NoComm.to_string(), found: target.topology().to_string() });
        }
        check_rate("R0", r0)?;
        ensure_feasible(target, ext, tol)?;
        let bins = softcover::codebook_size(n, r0);
        let codebook = softcover::draw_codebook(&ext.joint()[0], n, bins, 1, seed, caps)?;
        Ok(Self { target: target.clone(), ext: ext.clone(), r0, codebook })
    }

    pub fn n(&self) -> usize {
        self.codebook.n()
    }

    pub fn rate(&self) -> f64 {
        self.r0
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }
}

fn nc_mixture(code: &NoCommCode, caps: &Caps) -> Result<(Operator, LocalOps)> {
    let n = code.n();
    limits::check(limits::saturating_pow(code.target.quantum_dim(), n), caps.max_nc_dim)?;
    let (outputs, targets) = operator_sets(&code.target, &code.ext);
    let w = 1.0 / code.codebook.num_bins() as f64;
    let mut words: Vec<(f64, &[u16])> = code.codebook.codewords().map(|cw| (w, cw)).collect();
    Ok((outputs.weighted_sum(&mut words), targets))
}

/// `2^{−nR₀} Σ_j ⊗_k θ_A^{u_k(j)} ⊗ θ_B^{u_k(j)} ⊗ θ_C^{u_k(j)}` on `(ABC)^n`.
pub fn induced_state_no_comm(code: &NoCommCode, caps: &Caps) -> Result<DensityOperator> {
    let (mix, _) = nc_mixture(code, caps)?;
    DensityOperator::from_parts(mix.into_dense(), n_registers(code.target.quantum_registers(), code.n()))
}

/// `‖ρ̂_{A^nB^nC^n} − ω_ABC^{⊗n}‖₁`.
pub fn no_comm_gap(code: &NoCommCode, caps: &Caps) -> Result<f64> {
    let (mix, targets) = nc_mixture(code, caps)?;
    Ok(mix.trace_distance(&targets.tensor_word(&vec![0u16; code.n()])))
}

/// Monte Carlo over codebooks of the no-communication protocol gap.
#[allow(clippy::too_many_arguments)]
pub fn run_no_comm(
    target: &CqNetworkState,
    ext: &Extension,
    r0: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    caps: &Caps,
    tol: &Tolerances,
) -> Result<Vec<ProtocolRow>> {
    if target.topology() != Topology::NoComm {
        return Err(Error::TopologyMismatch { expected: Topology::NoComm.to_string(), found: target.topology().to_string() });
    }
    check_trials(trials)?;
    ensure_feasible(target, ext, tol)?;
    n_list
        .iter()
        .map(|&n| {
            let gaps = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let code = NoCommCode::new(target, ext, r0, n, softcover::trial_seed(seed, n, t), caps, tol)?;
                    no_comm_gap(&code, caps)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_gap, std_err) = softcover::mean_and_std_err(&gaps);
            Ok(ProtocolRow {
                topology: Topology::NoComm,
                n,
                r0,
                r1: None,
                trials,
                mean_gap,
                std_err,
                max_marginal_error: 0.0,
            })
        })
        .collect()
}
