//! Finite-dimensional density operators with named registers.
//!
//! Every operator carries an ordered list of registers whose dimensions
//! multiply to the matrix dimension. Bipartite quantities (partial trace,
//! conditional entropy, mutual information, partial transpose) select their
//! subsystems through a [`RegisterCut`] expressed against register names.
//!
//! Entropies are in bits. Trace distance is the unnormalized trace norm
//! `‖ρ − σ‖₁`, so it ranges over `[0, 2]`.

use std::collections::HashSet;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::limits::{self, Caps, Tolerances};
use crate::linalg::{self, c, CMatrix, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim }
    }
}

/// Shorthand for building a register list from `(name, dim)` pairs.
pub fn registers(spec: &[(&str, usize)]) -> Vec<Register> {
    spec.iter().map(|&(n, d)| Register::new(n, d)).collect()
}

fn total_dim(regs: &[Register]) -> usize {
    regs.iter().map(|r| r.dim).product()
}

/// A bipartition of register labels into a first and a second group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterCut {
    first: Vec<String>,
    second: Vec<String>,
}

impl RegisterCut {
    pub fn new<I, J, S, T>(first: I, second: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Self {
            first: first.into_iter().map(Into::into).collect(),
            second: second.into_iter().map(Into::into).collect(),
        }
    }

    /// Cut with `first` on one side and every other register of `regs` on the other.
    pub fn split(regs: &[Register], first: &[&str]) -> Result<Self> {
        for name in first {
            if !regs.iter().any(|r| r.name == *name) {
                return Err(Error::BadCut(format!("unknown register `{name}`")));
            }
        }
        let second = regs
            .iter()
            .filter(|r| !first.contains(&r.name.as_str()))
            .map(|r| r.name.clone());
        Ok(Self::new(first.iter().copied(), second))
    }

    pub fn first(&self) -> &[String] {
        &self.first
    }

    pub fn second(&self) -> &[String] {
        &self.second
    }

    /// Register positions of each side, checked to be disjoint and to cover `regs`.
    fn resolve(&self, regs: &[Register]) -> Result<(Vec<usize>, Vec<usize>)> {
        let lookup = |name: &String| {
            regs.iter()
                .position(|r| &r.name == name)
                .ok_or_else(|| Error::BadCut(format!("unknown register `{name}`")))
        };
        let first = self.first.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        let second = self.second.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        for &i in first.iter().chain(&second) {
            if !seen.insert(i) {
                return Err(Error::BadCut(format!("register `{}` appears twice", regs[i].name)));
            }
        }
        if seen.len() != regs.len() {
            let missing: Vec<_> = (0..regs.len())
                .filter(|i| !seen.contains(i))
                .map(|i| regs[i].name.as_str())
                .collect();
            return Err(Error::BadCut(format!("registers {missing:?} not covered")));
        }
        Ok((first, second))
    }
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    registers: Vec<Register>,
}

fn check_registers(matrix: &CMatrix, regs: &[Register]) -> Result<()> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if regs.iter().any(|r| r.dim == 0) {
        return Err(Error::InvalidStructure("register of dimension 0".into()));
    }
    let product = total_dim(regs);
    if product != rows {
        return Err(Error::LabelMismatch { matrix: rows, registers: product });
    }
    let mut names = HashSet::new();
    for r in regs {
        if !names.insert(r.name.as_str()) {
            return Err(Error::DuplicateLabel(r.name.clone()));
        }
    }
    Ok(())
}

impl DensityOperator {
    /// Validates with the default tolerances.
    pub fn new(matrix: CMatrix, registers: Vec<Register>) -> Result<Self> {
        Self::validate(matrix, registers, &Tolerances::default())
    }

    /// Checks the three density-operator invariants.
    ///
    /// Eigenvalues in `[-tol.psd, 0)` are clipped to zero and the result is
    /// renormalized; larger violations are errors.
    pub fn validate(matrix: CMatrix, registers: Vec<Register>, tol: &Tolerances) -> Result<Self> {
        check_registers(&matrix, &registers)?;
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > tol.herm {
            return Err(Error::NotHermitian { magnitude: defect, tolerance: tol.herm });
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::NotUnitTrace { trace: tr.re, tolerance: tol.trace });
        }
        let h = linalg::symmetrize(&matrix);
        let matrix = if linalg::is_diagonal(&h) {
            let min = h.diagonal().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            if min < -tol.psd {
                return Err(Error::NotPsd { min_eigenvalue: min, tolerance: tol.psd });
            }
            let clipped = h.diagonal().map(|z| c(z.re.max(0.0)));
            let total: f64 = clipped.iter().map(|z| z.re).sum();
            CMatrix::from_diagonal(&(clipped / c(total)))
        } else {
            let (values, vectors) = linalg::hermitian_eigen(&h);
            let min = values.min();
            if min < -tol.psd {
                return Err(Error::NotPsd { min_eigenvalue: min, tolerance: tol.psd });
            }
            if min < 0.0 {
                let kept: f64 = values.iter().map(|v| v.max(0.0)).sum();
                linalg::spectral_apply(&values, &vectors, |v| v.max(0.0) / kept)
            } else {
                h / c(tr.re)
            }
        };
        Ok(Self { matrix, registers })
    }

    /// Wraps a matrix that is valid by construction. Register bookkeeping is
    /// still checked; the spectral invariants are not.
    pub(crate) fn from_parts(matrix: CMatrix, registers: Vec<Register>) -> Result<Self> {
        check_registers(&matrix, &registers)?;
        Ok(Self { matrix, registers })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) amplitude vector.
    pub fn pure(amplitudes: &[Complex64], registers: Vec<Register>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidStructure("zero state vector".into()));
        }
        let v = DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| a / norm));
        Self::from_parts(&v * v.adjoint(), registers)
    }

    /// Computational basis state |index⟩⟨index|.
    pub fn basis(index: usize, registers: Vec<Register>) -> Result<Self> {
        let d = total_dim(&registers);
        if index >= d {
            return Err(Error::InvalidStructure(format!("basis index {index} out of range for dimension {d}")));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(index, index)] = linalg::ONE;
        Self::from_parts(m, registers)
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64], registers: Vec<Register>) -> Result<Self> {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(probs.len(), probs.iter().map(|&p| c(p))));
        Self::new(m, registers)
    }

    pub fn maximally_mixed(registers: Vec<Register>) -> Self {
        let d = total_dim(&registers);
        let m = CMatrix::identity(d, d) * c(1.0 / d as f64);
        Self { matrix: m, registers }
    }

    /// Haar-induced random mixed state of full rank (Ginibre construction).
    pub fn random<R: Rng + ?Sized>(registers: Vec<Register>, rng: &mut R) -> Self {
        let d = total_dim(&registers);
        Self::random_with_rank(registers, d, rng)
    }

    pub fn random_with_rank<R: Rng + ?Sized>(registers: Vec<Register>, rank: usize, rng: &mut R) -> Self {
        let d = total_dim(&registers);
        let g = CMatrix::from_fn(d, rank.max(1), |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m).re;
        Self { matrix: linalg::symmetrize(&(m / c(tr))), registers }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn is_diagonal(&self) -> bool {
        linalg::is_diagonal(&self.matrix)
    }

    /// Same matrix under new register labels with the same total dimension.
    pub fn relabel(&self, registers: Vec<Register>) -> Result<Self> {
        Self::from_parts(self.matrix.clone(), registers)
    }

    /// Kronecker product under the default dimension cap.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_capped(other, &Caps::default())
    }

    pub fn tensor_capped(&self, other: &Self, caps: &Caps) -> Result<Self> {
        caps.check_dim(self.dim().saturating_mul(other.dim()))?;
        let regs = self.registers.iter().chain(&other.registers).cloned().collect();
        Self::from_parts(linalg::kron(&self.matrix, &other.matrix), regs)
    }

    /// Convex combination `Σ w_k ρ_k`; all states must share registers.
    pub fn mixture(weights: &[f64], states: &[&Self]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidStructure("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::LengthMismatch { expected: states.len(), found: weights.len() });
        }
        check_pmf(weights, Tolerances::default().trace)?;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (&w, s) in weights.iter().zip(states) {
            if s.dim() != first.dim() {
                return Err(Error::DimMismatch { left: first.dim(), right: s.dim() });
            }
            if w != 0.0 {
                m += s.matrix() * c(w);
            }
        }
        Self::from_parts(m, first.registers.clone())
    }

    /// Reduced state on the first side of `keep`; the second side is traced out.
    /// Kept registers stay in their original order.
    pub fn partial_trace(&self, keep: &RegisterCut) -> Result<Self> {
        let (kept, _) = keep.resolve(&self.registers)?;
        let mut kept_sorted = kept;
        kept_sorted.sort_unstable();
        let dims: Vec<usize> = self.registers.iter().map(|r| r.dim).collect();
        let keep_dims: Vec<usize> = kept_sorted.iter().map(|&i| dims[i]).collect();
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept_sorted.contains(i)).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
        let dk: usize = keep_dims.iter().product();
        let dt: usize = traced_dims.iter().product();

        // full index of (kept digits r, traced digits t)
        let mut index = vec![0usize; dk * dt];
        let mut full = vec![0usize; dims.len()];
        let mut kd = vec![0usize; keep_dims.len()];
        let mut td = vec![0usize; traced_dims.len()];
        for r in 0..dk {
            linalg::digits(r, &keep_dims, &mut kd);
            for t in 0..dt {
                linalg::digits(t, &traced_dims, &mut td);
                for (slot, &pos) in kept_sorted.iter().enumerate() {
                    full[pos] = kd[slot];
                }
                for (slot, &pos) in traced.iter().enumerate() {
                    full[pos] = td[slot];
                }
                index[r * dt + t] = linalg::compose(&full, &dims);
            }
        }
        let m = &self.matrix;
        let out = CMatrix::from_fn(dk, dk, |r, s| {
            (0..dt).map(|t| m[(index[r * dt + t], index[s * dt + t])]).sum()
        });
        let regs = kept_sorted.iter().map(|&i| self.registers[i].clone()).collect();
        Self::from_parts(out, regs)
    }

    /// Convenience: keep the named registers, trace out the rest.
    pub fn reduce(&self, keep: &[&str]) -> Result<Self> {
        self.partial_trace(&RegisterCut::split(&self.registers, keep)?)
    }

    /// Partial transpose on the second side of `cut`.
    pub fn partial_transpose(&self, cut: &RegisterCut) -> Result<CMatrix> {
        let (_, transposed) = cut.resolve(&self.registers)?;
        let dims: Vec<usize> = self.registers.iter().map(|r| r.dim).collect();
        let d = self.dim();
        let mut out = CMatrix::from_element(d, d, ZERO);
        let mut rd = vec![0usize; dims.len()];
        let mut cd = vec![0usize; dims.len()];
        for i in 0..d {
            for j in 0..d {
                linalg::digits(i, &dims, &mut rd);
                linalg::digits(j, &dims, &mut cd);
                for &k in &transposed {
                    std::mem::swap(&mut rd[k], &mut cd[k]);
                }
                out[(linalg::compose(&rd, &dims), linalg::compose(&cd, &dims))] = self.matrix[(i, j)];
            }
        }
        Ok(out)
    }
}

pub(crate) fn check_pmf(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidPmf("empty distribution".into()));
    }
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidPmf(format!("entry {v} is not a nonnegative number")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::InvalidPmf(format!("entries sum to {s}")));
    }
    Ok(())
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; rand 0.8 keeps normal sampling in rand_distr.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Von Neumann entropy `−Σ λ log₂ λ`; slightly negative eigenvalues count as zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    linalg::entropy_bits(rho.eigenvalues())
}

/// `H(first | second) = H(ρ) − H(ρ_second)`.
pub fn conditional_entropy(rho: &DensityOperator, cut: &RegisterCut) -> Result<f64> {
    let flipped = RegisterCut::new(cut.second().iter().cloned(), cut.first().iter().cloned());
    let marginal = rho.partial_trace(&flipped)?;
    Ok(von_neumann_entropy(rho) - von_neumann_entropy(&marginal))
}

/// `I(first; second) = H(ρ_first) + H(ρ_second) − H(ρ)`.
///
/// Values in `[-τ_num, 0)` are clamped to zero.
pub fn mutual_information(rho: &DensityOperator, cut: &RegisterCut) -> Result<f64> {
    let a = rho.partial_trace(cut)?;
    let flipped = RegisterCut::new(cut.second().iter().cloned(), cut.first().iter().cloned());
    let b = rho.partial_trace(&flipped)?;
    let value = von_neumann_entropy(&a) + von_neumann_entropy(&b) - von_neumann_entropy(rho);
    let tol = Tolerances::default().num;
    Ok(if value < 0.0 && value >= -tol { 0.0 } else { value })
}

/// `‖ρ − σ‖₁`, in `[0, 2]`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: sigma.dim() });
    }
    Ok(linalg::hermitian_trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Outcome of the positive-partial-transpose test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ppt {
    Pass { min_eigenvalue: f64 },
    Fail { min_eigenvalue: f64 },
}

impl Ppt {
    pub fn passed(&self) -> bool {
        matches!(self, Ppt::Pass { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match *self {
            Ppt::Pass { min_eigenvalue } | Ppt::Fail { min_eigenvalue } => min_eigenvalue,
        }
    }
}

/// Partial transpose on the second side; fails when an eigenvalue drops below `-τ_psd`.
/// A failure certifies entanglement across the cut.
pub fn ppt_check(rho: &DensityOperator, cut: &RegisterCut) -> Result<Ppt> {
    let pt = rho.partial_transpose(cut)?;
    let min = linalg::hermitian_eigenvalues(&pt).first().copied().unwrap_or(0.0);
    Ok(if min < -Tolerances::default().psd {
        Ppt::Fail { min_eigenvalue: min }
    } else {
        Ppt::Pass { min_eigenvalue: min }
    })
}

/// Entropy continuity bound for trace distance `eps` (unnormalized, in `[0, 2]`)
/// on a system of dimension `dim_a`.
///
/// With `t = eps/2` this is `2t·log₂ d + (1+t)·h₂(t/(1+t))`, the
/// Alicki–Fannes–Winter form. It is used only as a one-sided check.
pub fn afw_continuity_bound(eps: f64, dim_a: usize) -> f64 {
    let t = eps.max(0.0) / 2.0;
    if t == 0.0 {
        return 0.0;
    }
    eps * (dim_a as f64).log2() + (1.0 + t) * linalg::binary_entropy(t / (1.0 + t))
}

/// `dim^n`, checked against `cap`.
pub(crate) fn power_dim(dim: usize, n: usize, cap: usize) -> Result<usize> {
    let d = limits::saturating_pow(dim, n);
    limits::check(d, cap)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit(name: &str) -> Vec<Register> {
        registers(&[(name, 2)])
    }

    fn bell() -> DensityOperator {
        let s = 0.5f64.sqrt();
        DensityOperator::pure(&[c(s), ZERO, ZERO, c(s)], registers(&[("A", 2), ("B", 2)])).unwrap()
    }

    fn plus() -> DensityOperator {
        DensityOperator::pure(&[c(1.0), c(1.0)], qubit("A")).unwrap()
    }

    fn ab() -> RegisterCut {
        RegisterCut::new(["A"], ["B"])
    }

    #[test]
    fn validate_accepts_maximally_mixed_unchanged() {
        let m = CMatrix::identity(2, 2) * c(0.5);
        let rho = DensityOperator::new(m.clone(), qubit("A")).unwrap();
        assert_eq!(rho.matrix(), &m);
    }

    #[test]
    fn validate_rejects_negative_eigenvalue() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.6), c(0.6), c(0.5)]);
        match DensityOperator::new(m, qubit("A")) {
            Err(Error::NotPsd { min_eigenvalue, .. }) => assert!((min_eigenvalue + 0.1).abs() < 1e-12),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_trace_two() {
        let m = CMatrix::identity(2, 2);
        match DensityOperator::new(m, qubit("A")) {
            Err(Error::NotUnitTrace { trace, .. }) => assert!((trace - 2.0).abs() < 1e-15),
            other => panic!("expected NotUnitTrace, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(matches!(DensityOperator::new(m, qubit("A")), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn validate_clips_tiny_negative_eigenvalue() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0 + 5e-10), c(0.0), c(0.0), c(-5e-10)]);
        let rho = DensityOperator::new(m, qubit("A")).unwrap();
        assert!(rho.eigenvalues().iter().all(|&v| v >= 0.0));
        assert!((linalg::trace(rho.matrix()).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_checks_labels() {
        let m = CMatrix::identity(4, 4) * c(0.25);
        assert!(matches!(
            DensityOperator::new(m.clone(), qubit("A")),
            Err(Error::LabelMismatch { matrix: 4, registers: 2 })
        ));
        assert!(matches!(
            DensityOperator::new(m, registers(&[("A", 2), ("A", 2)])),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = DensityOperator::basis(0, qubit("A")).unwrap();
        let one = DensityOperator::basis(1, qubit("B")).unwrap();
        let t = zero.tensor(&one).unwrap();
        let expected = DensityOperator::basis(1, registers(&[("A", 2), ("B", 2)])).unwrap();
        assert_eq!(t, expected);
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let t = DensityOperator::maximally_mixed(qubit("A"))
            .tensor(&DensityOperator::maximally_mixed(qubit("B")))
            .unwrap();
        assert_eq!(t.matrix(), &(CMatrix::identity(4, 4) * c(0.25)));
    }

    #[test]
    fn tensor_respects_cap() {
        let a = DensityOperator::maximally_mixed(qubit("A"));
        let b = DensityOperator::maximally_mixed(qubit("B"));
        let caps = Caps { max_dim: 3, ..Caps::default() };
        assert!(matches!(a.tensor_capped(&b, &caps), Err(Error::DimensionCap { requested: 4, cap: 3 })));
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let r = bell().reduce(&["A"]).unwrap();
        assert!(trace_distance(&r, &DensityOperator::maximally_mixed(qubit("A"))).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = DensityOperator::random(qubit("A"), &mut rng);
        let b = DensityOperator::random(registers(&[("B", 3)]), &mut rng);
        let t = a.tensor(&b).unwrap();
        assert!(trace_distance(&t.reduce(&["A"]).unwrap(), &a).unwrap() < 1e-12);
        assert!(trace_distance(&t.reduce(&["B"]).unwrap(), &b).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_cut() {
        let rho = bell();
        assert!(matches!(rho.partial_trace(&RegisterCut::new(["A"], ["C"])), Err(Error::BadCut(_))));
        assert!(matches!(rho.partial_trace(&RegisterCut::new(["A"], Vec::<String>::new())), Err(Error::BadCut(_))));
        assert!(matches!(rho.partial_trace(&RegisterCut::new(["A", "B"], ["B"])), Err(Error::BadCut(_))));
    }

    #[test]
    fn entropy_reference_values() {
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(qubit("A"))) - 1.0).abs() < 1e-12);
        assert!(von_neumann_entropy(&plus()).abs() < 1e-12);
        let d = DensityOperator::diagonal(&[0.25, 0.75], qubit("A")).unwrap();
        assert!((von_neumann_entropy(&d) - linalg::binary_entropy(0.25)).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_of_bell_is_minus_one() {
        assert!((conditional_entropy(&bell(), &ab()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_reference_values() {
        assert!((mutual_information(&bell(), &ab()).unwrap() - 2.0).abs() < 1e-12);
        let corr = DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5], registers(&[("A", 2), ("B", 2)])).unwrap();
        assert!((mutual_information(&corr, &ab()).unwrap() - 1.0).abs() < 1e-12);
        let prod = plus().tensor(&DensityOperator::maximally_mixed(qubit("B"))).unwrap();
        assert!(mutual_information(&prod, &ab()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trace_distance_reference_values() {
        let zero = DensityOperator::basis(0, qubit("A")).unwrap();
        let one = DensityOperator::basis(1, qubit("A")).unwrap();
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &plus()).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let big = DensityOperator::maximally_mixed(registers(&[("A", 4)]));
        assert!(matches!(trace_distance(&zero, &big), Err(Error::DimMismatch { left: 2, right: 4 })));
    }

    #[test]
    fn ppt_reference_cases() {
        match ppt_check(&bell(), &ab()).unwrap() {
            Ppt::Fail { min_eigenvalue } => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let corr = DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5], registers(&[("A", 2), ("B", 2)])).unwrap();
        assert!(ppt_check(&corr, &ab()).unwrap().passed());
        let prod = plus().tensor(&DensityOperator::basis(1, qubit("B")).unwrap()).unwrap();
        assert!(ppt_check(&prod, &ab()).unwrap().passed());
    }

    #[test]
    fn afw_bound_is_zero_at_zero_and_monotone() {
        assert_eq!(afw_continuity_bound(0.0, 4), 0.0);
        let mut last = 0.0;
        for k in 0..=100 {
            let b = afw_continuity_bound(k as f64 * 0.01, 4);
            assert!(b >= last);
            last = b;
        }
    }
}
