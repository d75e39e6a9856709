use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("{op} supports at most {max} qubits, got {got}")]
    DenseGuard {
        op: &'static str,
        max: usize,
        got: usize,
    },

    #[error("qubit count mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("duplicate Pauli string {0} in decomposition")]
    DuplicateTerm(String),

    #[error("zero coefficient for Pauli string {0}")]
    ZeroCoefficient(String),

    #[error("decomposition has no terms")]
    EmptyDecomposition,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Fourier series needs J*K = {required} terms, above the limit {limit}")]
    SeriesTooLarge { required: u128, limit: u128 },

    #[error("distribution has no positive mass")]
    DegenerateDistribution,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("overlap magnitude {value} exceeds 1; the kernel unitary is not unitary")]
    OverlapOutOfRange { value: f64 },

    #[error("no even n_max <= {cap} meets the bias target (log prefactor {log_prefactor:.3})")]
    NmaxInfeasible { cap: usize, log_prefactor: f64 },

    #[error("Trotter number would exceed the cap {cap}")]
    TrotterCapExceeded { cap: u64 },

    #[error("r = {r} is below t_max = {t_max}; the RTE bias bound does not apply")]
    RteRadiusTooSmall { r: u64, t_max: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
