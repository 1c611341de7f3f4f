use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // numerical kernel
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    // algebras and inclusions
    #[error("invalid block dimensions: {0}")]
    InvalidDims(String),
    #[error("elements belong to different algebras: {left:?} vs {right:?}")]
    AlgebraMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("trace weights must be finite and strictly positive: {0}")]
    NonPositiveWeight(String),
    #[error("inclusion is not unital: ambient block {block} has dimension {expected} but the inclusion matrix yields {found}")]
    NotUnital {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error("inclusion matrix has a dead {kind} at index {index}")]
    DeadBlock { kind: &'static str, index: usize },
    #[error("element is not in the embedded subalgebra (distance {distance:.3e})")]
    NotInSub { distance: f64 },
    #[error("element is not a minimal central projection")]
    NotCentralProjection,

    // conditional expectations
    #[error("trace weights do not define a faithful trace on the subalgebra")]
    SingularTrace,
    #[error("perturbation does not commute with the subalgebra (defect {defect:.3e})")]
    NotInCommutant { defect: f64 },
    #[error("E(a*a) is singular; the perturbation cannot be normalized")]
    NotNormalizable,
    #[error("conditional expectation is not faithful")]
    NotFaithful,
    #[error("multi-start spread {spread:.3e} on ambient block {block} exceeds tolerance")]
    OptimizerStall { block: usize, spread: f64 },
    #[error("closed form K = {closed} and optimizer K = {numeric} disagree")]
    MethodDisagreement { closed: f64, numeric: f64 },
    #[error("reconstruction identity fails (error {error:.3e})")]
    ReconstructionFailure { error: f64 },
    #[error("index element is not central (defect {defect:.3e})")]
    NotCentral { defect: f64 },

    // generator synthesis
    #[error("E(q) is not a scalar multiple of its minimal projection (defect {defect:.3e})")]
    RefinementNotScalar { defect: f64 },
    #[error("{count} generators exceed the bound floor(K)^2 = {bound}")]
    BoundViolation { count: usize, bound: usize },
    #[error("family does not generate the module (rank {rank} of {dim})")]
    NotGenerating { rank: usize, dim: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),

    // scenarios
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation failed ({constraint}): {message}")]
    Validation { constraint: String, message: String },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::Io(_)
            | Error::InvalidDims(_)
            | Error::NonPositiveWeight(_)
            | Error::NotUnital { .. }
            | Error::DeadBlock { .. }
            | Error::NotInCommutant { .. }
            | Error::NotNormalizable
            | Error::NotFaithful
            | Error::IndexOutOfRange { .. } => 1,
            Error::BoundViolation { .. } => 3,
            _ => 2,
        }
    }
}
