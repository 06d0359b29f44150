use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown kernel family `{0}`")]
    UnknownFamily(String),

    #[error("tabulated kernel has no entry for site pair ({0}, {1})")]
    TableMiss(f64, f64),

    #[error("kernel constraint violated: {0}")]
    Constraint(String),

    #[error("tensor of {needed} entries exceeds the budget of {budget}")]
    MemoryCap { needed: usize, budget: usize },

    #[error("word needs Fock level {needed} but the model truncates at {max}; raise the truncation level")]
    TruncationOverflow { needed: usize, max: usize },

    #[error("matrix is singular at site pair ({0}, {1})")]
    Singular(f64, f64),

    #[error("no inverse-trace constant exists for this kernel")]
    NoInverseTraceConstant,

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("eigenvalue {value:.6} outside the admissible range [{lo:.6}, {hi:.6}]")]
    EigenvalueOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("degenerate coefficient operator: {0}")]
    DegenerateK(String),

    #[error("rewrite step budget of {0} exceeded; rewriting did not terminate")]
    StepBudget(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
