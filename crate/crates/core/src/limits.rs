//! Numerical tolerances and dimension caps shared by every module.

/// Tolerances for state validation and numerical comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise |M - M^dag| accepted as Hermitian.
    pub herm: f64,
    /// Max |Tr M - 1| accepted as unit trace.
    pub trace: f64,
    /// Eigenvalues in [-psd, 0) are clipped; below -psd is an error.
    pub psd: f64,
    /// Generic slack for entropy and mutual-information comparisons.
    pub num: f64,
    /// Max trace-norm residual for an extension to count as feasible.
    pub feas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            num: 1e-7,
            feas: 1e-6,
        }
    }
}

/// Upper limits on the sizes of dense objects the simulators will build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Dense operator dimension for tensor powers and resolvability mixtures.
    pub max_dim: usize,
    /// Number of classical blocks |X|^n in an induced c-q state.
    pub max_blocks: usize,
    /// Quantum dimension of one classical block (two-node, broadcast).
    pub max_block_dim: usize,
    /// Total dimension of a no-communication induced state.
    pub max_nc_dim: usize,
    /// Total number of symbols (codewords times blocklength) in a codebook.
    pub max_codebook_symbols: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_dim: 16384,
            max_blocks: 4096,
            max_block_dim: 256,
            max_nc_dim: 4096,
            max_codebook_symbols: 1 << 24,
        }
    }
}

impl Caps {
    pub fn check_dim(&self, requested: usize) -> crate::Result<()> {
        check(requested, self.max_dim)
    }
}

pub(crate) fn check(requested: usize, cap: usize) -> crate::Result<()> {
    if requested > cap {
        Err(crate::Error::DimensionCap { requested, cap })
    } else {
        Ok(())
    }
}

/// `base^exp`, saturating at `usize::MAX` so cap checks never overflow.
pub(crate) fn saturating_pow(base: usize, exp: usize) -> usize {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
