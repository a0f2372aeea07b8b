//! Target states and auxiliary-variable extensions for the three network topologies.
//!
//! A [`CqNetworkState`] is a classical PMF `p_X` joined with one conditional
//! density operator per symbol (`ω_XB`, `ω_XB₁B₂`), or a single tripartite
//! state `ω_ABC` with no classical part. An [`Extension`] adds a classical
//! auxiliary `U`: a joint PMF `p_XU` (or `p_U`) and, for each `u`, a list of
//! local factors whose tensor product is the quantum state given `U = u`.
//! Conditional independence given `u` is therefore structural.

use std::fmt;

use crate::limits::Caps;
use crate::linalg::{self, c, CMatrix};
use crate::qstate::{self, DensityOperator, Register, RegisterCut};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    TwoNode,
    NoComm,
    Broadcast,
}

impl Topology {
    /// Canonical names of the quantum registers, one per local party.
    pub fn quantum_labels(self) -> &'static [&'static str] {
        match self {
            Topology::TwoNode => &["B"],
            Topology::NoComm => &["A", "B", "C"],
            Topology::Broadcast => &["B1", "B2"],
        }
    }

    pub fn has_classical(self) -> bool {
        !matches!(self, Topology::NoComm)
    }

    pub fn name(self) -> &'static str {
        match self {
            Topology::TwoNode => "two-node",
            Topology::NoComm => "no-comm",
            Topology::Broadcast => "broadcast",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn mismatch(expected: Topology, found: Topology) -> Error {
    Error::TopologyMismatch { expected: expected.to_string(), found: found.to_string() }
}

/// Relabels `state` onto the canonical quantum registers of `topology`.
fn canonical(state: &DensityOperator, topology: Topology) -> Result<DensityOperator> {
    let labels = topology.quantum_labels();
    let regs = state.registers();
    let dims: Vec<usize> = if labels.len() == 1 {
        vec![state.dim()]
    } else if regs.len() == labels.len() {
        regs.iter().map(|r| r.dim).collect()
    } else {
        return Err(Error::InvalidStructure(format!(
            "{topology} states need {} registers, got {}",
            labels.len(),
            regs.len()
        )));
    };
    state.relabel(labels.iter().zip(dims).map(|(n, d)| Register::new(*n, d)).collect())
}

/// Classical PMF joined with conditional quantum states (or a single state for no-comm).
#[derive(Debug, Clone, PartialEq)]
pub struct CqNetworkState {
    topology: Topology,
    pmf: Vec<f64>,
    conditionals: Vec<DensityOperator>,
}

impl CqNetworkState {
    pub fn new(topology: Topology, pmf: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        if topology.has_classical() {
            qstate::check_pmf(&pmf, Tolerances::default().trace)?;
            if pmf.len() != conditionals.len() {
                return Err(Error::LengthMismatch { expected: pmf.len(), found: conditionals.len() });
            }
        } else {
            if !pmf.is_empty() {
                return Err(Error::InvalidStructure("no-comm states carry no classical part".into()));
            }
            if conditionals.len() != 1 {
                return Err(Error::InvalidStructure("no-comm states carry exactly one state".into()));
            }
        }
        let conditionals = conditionals
            .iter()
            .map(|s| canonical(s, topology))
            .collect::<Result<Vec<_>>>()?;
        let regs = conditionals[0].registers().to_vec();
        if let Some(bad) = conditionals.iter().find(|s| s.registers() != regs.as_slice()) {
            return Err(Error::DimMismatch { left: conditionals[0].dim(), right: bad.dim() });
        }
        Ok(Self { topology, pmf, conditionals })
    }

    pub fn two_node(pmf: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        Self::new(Topology::TwoNode, pmf, conditionals)
    }

    pub fn broadcast(pmf: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        Self::new(Topology::Broadcast, pmf, conditionals)
    }

    pub fn no_comm(state: DensityOperator) -> Result<Self> {
        Self::new(Topology::NoComm, Vec::new(), vec![state])
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// `p_X`; empty for no-comm.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn conditionals(&self) -> &[DensityOperator] {
        &self.conditionals
    }

    pub fn quantum_registers(&self) -> &[Register] {
        self.conditionals[0].registers()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.quantum_registers().iter().map(|r| r.dim).collect()
    }

    pub fn quantum_dim(&self) -> usize {
        self.conditionals[0].dim()
    }

    /// Number of classical blocks; 1 for no-comm.
    pub fn classical_size(&self) -> usize {
        self.conditionals.len()
    }

    /// `(p(x), ω^x)` for every classical symbol; no-comm yields `(1, ω_ABC)`.
    pub fn blocks(&self) -> impl Iterator<Item = (f64, &DensityOperator)> {
        let weights: Vec<f64> = if self.topology.has_classical() { self.pmf.clone() } else { vec![1.0] };
        weights.into_iter().zip(&self.conditionals)
    }

    /// True when every conditional is diagonal in the computational basis.
    pub fn is_classical(&self) -> bool {
        self.conditionals.iter().all(DensityOperator::is_diagonal)
    }

    /// The quantum part averaged over the classical symbol (`ω_B`, `ω_B₁B₂`, `ω_ABC`).
    pub fn quantum_marginal(&self) -> DensityOperator {
        let (w, s): (Vec<f64>, Vec<&DensityOperator>) = self.blocks().unzip();
        DensityOperator::mixture(&w, &s).expect("conditionals share registers")
    }
}

/// Full density operator `Σ_x p(x)|x⟩⟨x| ⊗ ω^x` (registers `X` then the quantum ones).
/// No-comm states are returned as is.
pub fn assemble(state: &CqNetworkState) -> Result<DensityOperator> {
    assemble_capped(state, &Caps::default())
}

pub fn assemble_capped(state: &CqNetworkState, caps: &Caps) -> Result<DensityOperator> {
    if !state.topology.has_classical() {
        return Ok(state.conditionals[0].clone());
    }
    let k = state.classical_size();
    let d = state.quantum_dim();
    caps.check_dim(k.saturating_mul(d))?;
    let mut m = CMatrix::zeros(k * d, k * d);
    for (x, (p, rho)) in state.blocks().enumerate() {
        m.view_mut((x * d, x * d), (d, d)).copy_from(&(rho.matrix() * c(p)));
    }
    let mut regs = vec![Register::new("X", k)];
    regs.extend_from_slice(state.quantum_registers());
    DensityOperator::from_parts(m, regs)
}

/// Auxiliary-variable decomposition `σ` of a target state.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    topology: Topology,
    /// `p(x, u)`, rows indexed by `x`; a single row `p(u)` for no-comm.
    joint: Vec<Vec<f64>>,
    /// Local factors for each `u`, one per quantum register.
    factors: Vec<Vec<DensityOperator>>,
}

/// Sufficient size of `U`: `|X|²·D² + 1` where `D` is the product of local dimensions
/// (`|X| = 1` for no-comm). Only the two-node value is backed by a Carathéodory
/// argument; the others are heuristic defaults.
pub fn cardinality_bound(x_count: usize, local_dims: &[usize]) -> usize {
    let d: usize = local_dims.iter().product();
    x_count * x_count * d * d + 1
}

impl Extension {
    pub fn new(topology: Topology, joint: Vec<Vec<f64>>, factors: Vec<Vec<DensityOperator>>) -> Result<Self> {
        let labels = topology.quantum_labels();
        if !topology.has_classical() && joint.len() != 1 {
            return Err(Error::InvalidStructure("no-comm extensions carry a single row p(u)".into()));
        }
        let u_count = factors.len();
        if u_count == 0 {
            return Err(Error::InvalidStructure("empty auxiliary alphabet".into()));
        }
        for row in &joint {
            if row.len() != u_count {
                return Err(Error::LengthMismatch { expected: u_count, found: row.len() });
            }
        }
        let flat: Vec<f64> = joint.iter().flatten().copied().collect();
        qstate::check_pmf(&flat, Tolerances::default().trace)?;

        let mut canonical_factors = Vec::with_capacity(u_count);
        let mut dims: Option<Vec<usize>> = None;
        for per_u in factors {
            if per_u.len() != labels.len() {
                return Err(Error::InvalidStructure(format!(
                    "{topology} extensions need {} factors per u, got {}",
                    labels.len(),
                    per_u.len()
                )));
            }
            let relabeled = per_u
                .iter()
                .zip(labels)
                .map(|(f, name)| f.relabel(vec![Register::new(*name, f.dim())]))
                .collect::<Result<Vec<_>>>()?;
            let these: Vec<usize> = relabeled.iter().map(DensityOperator::dim).collect();
            match &dims {
                None => dims = Some(these),
                Some(d) if *d != these => {
                    return Err(Error::DimMismatch { left: d.iter().product(), right: these.iter().product() })
                }
                _ => {}
            }
            canonical_factors.push(relabeled);
        }
        let ext = Self { topology, joint, factors: canonical_factors };
        let bound = cardinality_bound(ext.x_count(), &ext.local_dims());
        if u_count > bound {
            log::warn!("|U| = {u_count} exceeds the cardinality bound {bound}");
        }
        Ok(ext)
    }

    pub fn two_node(joint: Vec<Vec<f64>>, thetas: Vec<DensityOperator>) -> Result<Self> {
        Self::new(Topology::TwoNode, joint, thetas.into_iter().map(|t| vec![t]).collect())
    }

    pub fn broadcast(joint: Vec<Vec<f64>>, thetas: Vec<DensityOperator>, etas: Vec<DensityOperator>) -> Result<Self> {
        if thetas.len() != etas.len() {
            return Err(Error::LengthMismatch { expected: thetas.len(), found: etas.len() });
        }
        Self::new(Topology::Broadcast, joint, thetas.into_iter().zip(etas).map(|(t, e)| vec![t, e]).collect())
    }

    pub fn no_comm(p_u: Vec<f64>, factors: Vec<[DensityOperator; 3]>) -> Result<Self> {
        Self::new(Topology::NoComm, vec![p_u], factors.into_iter().map(Vec::from).collect())
    }

    /// The `U = X` extension: `p(x, u) = p(x)·[u = x]`, `θ^u = ω^u`.
    ///
    /// For broadcast targets each conditional must already be a product
    /// `ω^x_{B₁} ⊗ ω^x_{B₂}` (checked within `τ_num`). Not defined for no-comm.
    pub fn identity(target: &CqNetworkState) -> Result<Self> {
        let k = target.classical_size();
        match target.topology() {
            Topology::NoComm => Err(Error::InvalidStructure("no-comm targets have no classical symbol".into())),
            Topology::TwoNode => {
                let joint = (0..k).map(|x| (0..k).map(|u| if u == x { target.pmf()[x] } else { 0.0 }).collect()).collect();
                Self::two_node(joint, target.conditionals().to_vec())
            }
            Topology::Broadcast => {
                let mut factors = Vec::with_capacity(k);
                for rho in target.conditionals() {
                    let b1 = rho.reduce(&["B1"])?;
                    let b2 = rho.reduce(&["B2"])?;
                    let prod = b1.tensor(&b2)?;
                    let gap = qstate::trace_distance(rho, &prod)?;
                    if gap > Tolerances::default().num {
                        return Err(Error::InvalidStructure(format!(
                            "conditional is not a product state (distance {gap:.3e})"
                        )));
                    }
                    factors.push(vec![b1, b2]);
                }
                let joint = (0..k).map(|x| (0..k).map(|u| if u == x { target.pmf()[x] } else { 0.0 }).collect()).collect();
                Self::new(Topology::Broadcast, joint, factors)
            }
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn u_count(&self) -> usize {
        self.factors.len()
    }

    /// Number of classical symbols; 1 for no-comm.
    pub fn x_count(&self) -> usize {
        self.joint.len()
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn factors(&self, u: usize) -> &[DensityOperator] {
        &self.factors[u]
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.factors[0].iter().map(DensityOperator::dim).collect()
    }

    pub fn quantum_registers(&self) -> Vec<Register> {
        self.factors[0].iter().flat_map(|f| f.registers().iter().cloned()).collect()
    }

    pub fn p_u(&self) -> Vec<f64> {
        (0..self.u_count()).map(|u| self.joint.iter().map(|row| row[u]).sum()).collect()
    }

    pub fn p_x(&self) -> Vec<f64> {
        self.joint.iter().map(|row| row.iter().sum()).collect()
    }

    /// `p(x|u)` as `[u][x]`; symbols with `p(u) = 0` get a uniform row.
    pub fn p_x_given_u(&self) -> Vec<Vec<f64>> {
        let k = self.x_count();
        self.p_u()
            .iter()
            .enumerate()
            .map(|(u, &pu)| {
                if pu > 0.0 {
                    (0..k).map(|x| self.joint[x][u] / pu).collect()
                } else {
                    vec![1.0 / k as f64; k]
                }
            })
            .collect()
    }

    /// Tensor product of the local factors for `u`.
    pub fn output_state(&self, u: usize) -> DensityOperator {
        let mut it = self.factors[u].iter();
        let first = it.next().expect("at least one factor").clone();
        it.fold(first, |acc, f| {
            DensityOperator::from_parts(linalg::kron(acc.matrix(), f.matrix()), {
                let mut r = acc.registers().to_vec();
                r.extend_from_slice(f.registers());
                r
            })
            .expect("factor registers are distinct")
        })
    }

    /// Reorders the auxiliary alphabet: new symbol `k` is old symbol `perm[k]`.
    pub fn permute_u(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.u_count()];
        if perm.len() != self.u_count() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidStructure("not a permutation of the auxiliary alphabet".into()));
        }
        let joint = self.joint.iter().map(|row| perm.iter().map(|&p| row[p]).collect()).collect();
        let factors = perm.iter().map(|&p| self.factors[p].clone()).collect();
        Ok(Self { topology: self.topology, joint, factors })
    }
}

/// Full `σ` with registers `X, U, <quantum>` (or `U, A, B, C` for no-comm).
pub fn assemble_extension(ext: &Extension) -> Result<DensityOperator> {
    let k = ext.x_count();
    let nu = ext.u_count();
    let d: usize = ext.local_dims().iter().product();
    let blocks = k * nu;
    Caps::default().check_dim(blocks.saturating_mul(d))?;
    let mut m = CMatrix::zeros(blocks * d, blocks * d);
    for u in 0..nu {
        let out = ext.output_state(u);
        for x in 0..k {
            let w = ext.joint[x][u];
            if w == 0.0 {
                continue;
            }
            let b = x * nu + u;
            m.view_mut((b * d, b * d), (d, d)).copy_from(&(out.matrix() * c(w)));
        }
    }
    let mut regs = Vec::new();
    if ext.topology.has_classical() {
        regs.push(Register::new("X", k));
    }
    regs.push(Register::new("U", nu));
    regs.extend(ext.quantum_registers());
    DensityOperator::from_parts(m, regs)
}

/// Sums out `U`: `ω^x = Σ_u p(u|x) θ^u` (and `Σ_u p(u) θ^u` for no-comm).
pub fn marginalize_extension(ext: &Extension) -> CqNetworkState {
    let outputs: Vec<DensityOperator> = (0..ext.u_count()).map(|u| ext.output_state(u)).collect();
    let p_u = ext.p_u();
    let conditionals: Vec<DensityOperator> = ext
        .joint
        .iter()
        .map(|row| {
            let px: f64 = row.iter().sum();
            let weights: Vec<f64> = if px > 0.0 { row.iter().map(|w| w / px).collect() } else { p_u.clone() };
            let refs: Vec<&DensityOperator> = outputs.iter().collect();
            mix_unchecked(&weights, &refs)
        })
        .collect();
    let pmf = if ext.topology.has_classical() { ext.p_x() } else { Vec::new() };
    CqNetworkState { topology: ext.topology, pmf, conditionals }
}

fn mix_unchecked(weights: &[f64], states: &[&DensityOperator]) -> DensityOperator {
    let d = states[0].dim();
    let mut m = CMatrix::zeros(d, d);
    for (&w, s) in weights.iter().zip(states) {
        if w != 0.0 {
            m += s.matrix() * c(w);
        }
    }
    DensityOperator::from_parts(m, states[0].registers().to_vec()).expect("same registers")
}

/// `‖assemble(marginal(ext)) − assemble(target)‖₁`.
///
/// Both operators are block diagonal over the same classical basis, so the
/// trace norm is evaluated block by block.
pub fn feasibility_residual(ext: &Extension, target: &CqNetworkState) -> Result<f64> {
    if ext.topology != target.topology {
        return Err(mismatch(target.topology, ext.topology));
    }
    if ext.x_count() != target.classical_size() {
        return Err(Error::DimMismatch { left: target.classical_size(), right: ext.x_count() });
    }
    if ext.local_dims() != target.local_dims() {
        return Err(Error::DimMismatch {
            left: target.quantum_dim(),
            right: ext.local_dims().iter().product(),
        });
    }
    let outputs: Vec<DensityOperator> = (0..ext.u_count()).map(|u| ext.output_state(u)).collect();
    let mut total = 0.0;
    for (x, (p, rho)) in target.blocks().enumerate() {
        let mut diff = rho.matrix() * c(-p);
        for (u, out) in outputs.iter().enumerate() {
            let w = ext.joint[x][u];
            if w != 0.0 {
                diff += out.matrix() * c(w);
            }
        }
        total += linalg::hermitian_trace_norm(&diff);
    }
    Ok(total)
}

fn classical_mutual_information(joint: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let nu = joint.first().map_or(0, Vec::len);
    let pu: Vec<f64> = (0..nu).map(|u| joint.iter().map(|r| r[u]).sum()).collect();
    let hxu = linalg::entropy_bits(joint.iter().flatten().copied());
    (linalg::entropy_bits(px) + linalg::entropy_bits(pu) - hxu).max(0.0)
}

/// `I(X;U)` and `I(X Q;U)` (Q the quantum registers) from the block structure of `σ`:
/// `H(XUQ) = H(p_XU) + Σ_u p(u) Σ_l H(θ_l^u)`, `H(XQ) = H(p_X) + Σ_x p(x) H(ω'^x)`.
///
/// Agrees with the dense evaluation on the assembled state; used where the
/// assembled operator would be large.
pub fn info_blockwise(ext: &Extension) -> (f64, f64) {
    let p_u = ext.p_u();
    let i_xu = classical_mutual_information(&ext.joint);
    let local_entropy: Vec<f64> = (0..ext.u_count())
        .map(|u| ext.factors[u].iter().map(qstate::von_neumann_entropy).sum())
        .collect();
    let h_xuq = linalg::entropy_bits(ext.joint.iter().flatten().copied())
        + p_u.iter().zip(&local_entropy).map(|(p, h)| p * h).sum::<f64>();
    let marginal = marginalize_extension(ext);
    let h_xq = linalg::entropy_bits(ext.p_x())
        + marginal
            .blocks()
            .zip(ext.p_x())
            .map(|((_, rho), px)| if px > 0.0 { px * qstate::von_neumann_entropy(rho) } else { 0.0 })
            .sum::<f64>();
    let i_all = (h_xq + linalg::entropy_bits(p_u) - h_xuq).max(0.0);
    (i_xu, i_all)
}

fn require(ext: &Extension, topology: Topology) -> Result<()> {
    if ext.topology != topology {
        Err(mismatch(topology, ext.topology))
    } else {
        Ok(())
    }
}

/// `(I(X;U), I(XB;U))` of the assembled `σ_XUB`.
pub fn info_two_node(ext: &Extension) -> Result<(f64, f64)> {
    require(ext, Topology::TwoNode)?;
    classical_pair(ext, &["X", "B"])
}

/// `(I(X;U), I(XB₁B₂;U))` of the assembled `σ_XUB₁B₂`.
pub fn info_broadcast(ext: &Extension) -> Result<(f64, f64)> {
    require(ext, Topology::Broadcast)?;
    classical_pair(ext, &["X", "B1", "B2"])
}

/// `I(U;ABC)` of the assembled `σ_UABC`.
pub fn info_nc(ext: &Extension) -> Result<f64> {
    require(ext, Topology::NoComm)?;
    let sigma = assemble_extension(ext)?;
    qstate::mutual_information(&sigma, &RegisterCut::new(["U"], ["A", "B", "C"]))
}

fn classical_pair(ext: &Extension, rest: &[&str]) -> Result<(f64, f64)> {
    let sigma = assemble_extension(ext)?;
    let xu = sigma.reduce(&["X", "U"])?;
    let i_xu = qstate::mutual_information(&xu, &RegisterCut::new(["X"], ["U"]))?;
    let i_all = qstate::mutual_information(&sigma, &RegisterCut::new(rest.iter().copied(), ["U"]))?;
    Ok((i_xu, i_all))
}

/// Classical `I(X;U)` straight from `p_XU`.
pub fn classical_i_xu(ext: &Extension) -> f64 {
    classical_mutual_information(&ext.joint)
}
