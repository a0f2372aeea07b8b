//! Random codebooks and quantum soft covering.
//!
//! A codebook holds `num_bins × bin_size` codewords of length `n`, each drawn
//! i.i.d. from a source PMF. Codeword `(j, i)` is sampled from its own
//! ChaCha8 stream seeded by `derive_seed(seed, [j, i])`, so any codeword can
//! be regenerated on its own and trials never share random state.
//!
//! The resolvability experiment mixes `ρ^{x^n(m)} = ⊗_k ρ^{x_k}` uniformly
//! over the codebook and measures the exact trace distance to `ρ_A^{⊗n}`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::limits::{self, Caps};
use crate::linalg;
use crate::qstate::{self, DensityOperator, Register};
use crate::tensorsum::{LocalOps, Operator};
use crate::{Error, Result, Tolerances};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for `parts` under `master`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(master), |h, &p| mix64(h ^ mix64(p)))
}

/// `⌈2^{n·rate}⌉`, at least 1.
pub fn codebook_size(n: usize, rate: f64) -> usize {
    let exact = (n as f64 * rate).exp2();
    // Absorb rounding so that 2^{n·R} with integer n·R is not bumped up.
    let rounded = exact.round();
    let size = if (exact - rounded).abs() <= 1e-9 * rounded.max(1.0) { rounded } else { exact.ceil() };
    (size as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    num_bins: usize,
    bin_size: usize,
    seed: u64,
    pmf: Vec<f64>,
    symbols: Vec<u16>,
}

/// Draws `num_bins × bin_size` i.i.d. codewords of length `n` from `pmf`.
pub fn draw_codebook(pmf: &[f64], n: usize, num_bins: usize, bin_size: usize, seed: u64, caps: &Caps) -> Result<Codebook> {
    qstate::check_pmf(pmf, Tolerances::default().trace)?;
    if pmf.len() > u16::MAX as usize {
        return Err(Error::InvalidPmf(format!("alphabet of {} symbols is too large", pmf.len())));
    }
    if n == 0 || num_bins == 0 || bin_size == 0 {
        return Err(Error::InvalidStructure("codebook dimensions must be positive".into()));
    }
    let total = num_bins.saturating_mul(bin_size).saturating_mul(n);
    if total > caps.max_codebook_symbols {
        return Err(Error::ShapeOverflow { requested: total, cap: caps.max_codebook_symbols });
    }
    let dist = WeightedIndex::new(pmf).map_err(|e| Error::InvalidPmf(e.to_string()))?;
    let mut symbols = Vec::with_capacity(total);
    for j in 0..num_bins {
        for i in 0..bin_size {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[j as u64, i as u64]));
            symbols.extend((0..n).map(|_| dist.sample(&mut rng) as u16));
        }
    }
    Ok(Codebook { n, num_bins, bin_size, seed, pmf: pmf.to_vec(), symbols })
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn bin_size(&self) -> usize {
        self.bin_size
    }

    pub fn len(&self) -> usize {
        self.num_bins * self.bin_size
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    /// Codeword `u^n(i, j)`: index `i` within bin `j`.
    pub fn codeword(&self, j: usize, i: usize) -> &[u16] {
        let start = (j * self.bin_size + i) * self.n;
        &self.symbols[start..start + self.n]
    }

    pub fn bin(&self, j: usize) -> impl Iterator<Item = &[u16]> {
        (0..self.bin_size).map(move |i| self.codeword(j, i))
    }

    /// Every codeword, bin by bin.
    pub fn codewords(&self) -> impl Iterator<Item = &[u16]> {
        self.symbols.chunks(self.n)
    }
}

/// An ensemble `{p_X, ρ^x}` of states on one register.
#[derive(Debug, Clone, PartialEq)]
pub struct CEnsemble {
    pmf: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl CEnsemble {
    pub fn new(pmf: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        qstate::check_pmf(&pmf, Tolerances::default().trace)?;
        if pmf.len() != states.len() {
            return Err(Error::LengthMismatch { expected: pmf.len(), found: states.len() });
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimMismatch { left: d, right: s.dim() });
        }
        let states = states
            .iter()
            .map(|s| s.relabel(vec![Register::new("A", d)]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pmf, states })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `ρ_A = Σ_x p(x) ρ^x`.
    pub fn average(&self) -> DensityOperator {
        let refs: Vec<&DensityOperator> = self.states.iter().collect();
        DensityOperator::mixture(&self.pmf, &refs).expect("validated ensemble")
    }

    /// Holevo quantity `I(X;A) = H(ρ_A) − Σ_x p(x) H(ρ^x)`.
    pub fn mutual_information(&self) -> f64 {
        let avg = qstate::von_neumann_entropy(&self.average());
        let cond: f64 = self.pmf.iter().zip(&self.states).map(|(p, s)| p * qstate::von_neumann_entropy(s)).sum();
        (avg - cond).max(0.0)
    }

    fn local_ops(&self) -> LocalOps {
        LocalOps::new(self.states.iter().map(|s| s.matrix().clone()).collect())
    }
}

fn check_alphabet(cb: &Codebook, ens: &CEnsemble) -> Result<()> {
    if cb.alphabet_size() != ens.pmf.len() {
        return Err(Error::LengthMismatch { expected: ens.pmf.len(), found: cb.alphabet_size() });
    }
    Ok(())
}

fn n_registers(d: usize, n: usize) -> Vec<Register> {
    (1..=n).map(|k| Register::new(format!("A{k}"), d)).collect()
}

fn mixture_operator(cb: &Codebook, ens: &CEnsemble, caps: &Caps) -> Result<(Operator, LocalOps)> {
    check_alphabet(cb, ens)?;
    qstate::power_dim(ens.dim(), cb.n(), caps.max_dim)?;
    let ops = ens.local_ops();
    let w = 1.0 / cb.len() as f64;
    let mut words: Vec<(f64, &[u16])> = cb.codewords().map(|cw| (w, cw)).collect();
    Ok((ops.weighted_sum(&mut words), ops))
}

/// Uniform mixture `2^{−nR} Σ_m ⊗_k ρ^{x_k(m)}` over every codeword.
pub fn mixture_state(cb: &Codebook, ens: &CEnsemble, caps: &Caps) -> Result<DensityOperator> {
    let (op, _) = mixture_operator(cb, ens, caps)?;
    DensityOperator::from_parts(op.into_dense(), n_registers(ens.dim(), cb.n()))
}

/// `‖ρ_A^{⊗n} − mixture_state(cb, ens)‖₁`.
pub fn resolvability_gap(cb: &Codebook, ens: &CEnsemble, caps: &Caps) -> Result<f64> {
    let (mix, _) = mixture_operator(cb, ens, caps)?;
    let avg = LocalOps::new(vec![ens.average().into_matrix()]);
    let avg = if matches!(mix, Operator::Dense(_)) { avg.densify() } else { avg };
    let target = avg.tensor_word(&vec![0u16; cb.n()]);
    Ok(mix.trace_distance(&target))
}

/// Sample mean and its standard error (sample standard deviation over √trials).
pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub rate: f64,
    pub trials: usize,
    pub mean_gap: f64,
    pub std_err: f64,
    /// `I(X;A)` of the ensemble, repeated on every row.
    pub mutual_info_ref: f64,
}

/// Codebook seed of trial `t` at blocklength `n`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    derive_seed(master, &[n as u64, trial as u64])
}

/// Monte Carlo estimate of `E‖ρ_A^{⊗n} − 2^{−nR} Σ_m ρ^{X^n(m)}‖₁` over random codebooks
/// of size `⌈2^{nR}⌉`, for each `n` in `n_list`.
pub fn resolvability_curve(
    ens: &CEnsemble,
    rate: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    caps: &Caps,
) -> Result<Vec<CurveRow>> {
    if trials < 2 {
        return Err(Error::InvalidStructure("at least two trials are needed for a standard error".into()));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::InvalidStructure(format!("rate {rate} must be a nonnegative number")));
    }
    for &n in n_list {
        qstate::power_dim(ens.dim(), n, caps.max_dim)?;
        limits::check(codebook_size(n, rate).saturating_mul(n), caps.max_codebook_symbols)?;
    }
    let mi = ens.mutual_information();
    n_list
        .iter()
        .map(|&n| {
            let size = codebook_size(n, rate);
            let gaps = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let cb = draw_codebook(ens.pmf(), n, 1, size, trial_seed(seed, n, t), caps)?;
                    resolvability_gap(&cb, ens, caps)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_gap, std_err) = mean_and_std_err(&gaps);
            Ok(CurveRow { n, rate, trials, mean_gap, std_err, mutual_info_ref: mi })
        })
        .collect()
}

/// Exact expected gap for a single-bin codebook of `size` codewords at blocklength `n`,
/// by enumerating every codebook. Exponential in `size·n`; meant for tiny cases.
pub fn exact_expected_gap(ens: &CEnsemble, n: usize, size: usize, caps: &Caps) -> Result<f64> {
    let k = ens.pmf.len();
    let words = limits::saturating_pow(k, n);
    let books = limits::saturating_pow(words, size);
    limits::check(books, 1 << 20)?;
    let mut total = 0.0;
    let mut word_buf = vec![0usize; n];
    for b in 0..books {
        let mut rest = b;
        let mut symbols = Vec::with_capacity(size * n);
        let mut prob = 1.0;
        for _ in 0..size {
            let w = rest % words;
            rest /= words;
            linalg::digits(w, &vec![k; n], &mut word_buf);
            for &s in &word_buf {
                prob *= ens.pmf[s];
                symbols.push(s as u16);
            }
        }
        if prob == 0.0 {
            continue;
        }
        let cb = Codebook { n, num_bins: 1, bin_size: size, seed: 0, pmf: ens.pmf.clone(), symbols };
        total += prob * resolvability_gap(&cb, ens, caps)?;
    }
    Ok(total)
}
