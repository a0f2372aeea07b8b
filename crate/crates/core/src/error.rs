use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("register dimensions multiply to {registers}, matrix dimension is {matrix}")]
    LabelMismatch { matrix: usize, registers: usize },

    #[error("duplicate register label `{0}`")]
    DuplicateLabel(String),

    #[error("matrix is not Hermitian: max |M - M^dag| = {magnitude:.3e} exceeds tolerance {tolerance:.1e}")]
    NotHermitian { magnitude: f64, tolerance: f64 },

    #[error("trace is {trace:.12}, deviation from 1 exceeds tolerance {tolerance:.1e}")]
    NotUnitTrace { trace: f64, tolerance: f64 },

    #[error("minimum eigenvalue {min_eigenvalue:.3e} is below -{tolerance:.1e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("dimension {requested} exceeds the configured cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("invalid register cut: {0}")]
    BadCut(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("topology mismatch: expected {expected}, found {found}")]
    TopologyMismatch { expected: String, found: String },

    #[error("invalid probability distribution: {0}")]
    InvalidPmf(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("sequence length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("codebook of {requested} symbols exceeds the configured cap {cap}")]
    ShapeOverflow { requested: usize, cap: usize },

    #[error("extension is infeasible for the target: residual {residual:.3e} > {tolerance:.1e}")]
    InfeasibleExtension { residual: f64, tolerance: f64 },

    #[error("search budget of {budget} nodes exhausted; best value so far {best:?}")]
    BudgetExceeded { budget: u64, best: Option<f64> },
}
