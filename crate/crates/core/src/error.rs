use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Variants split into two broad classes that callers (notably the CLI)
/// treat differently: input/validation problems and numerical failures.
/// `is_numerical()` distinguishes them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row at line {line}: {detail}")]
    MalformedRow { line: u64, detail: String },

    #[error("claims row at line {line} references unknown policyholder `{policyholder_id}`")]
    DanglingPolicyholder { line: u64, policyholder_id: String },

    #[error("negative amount {amount} at line {line}")]
    NegativeAmount { line: u64, amount: f64 },

    #[error("unknown loss-type code `{code}` at line {line} (expected TPI, OD or TPP)")]
    UnknownLossType { line: u64, code: String },

    #[error("duplicate policyholder id `{id}`")]
    DuplicatePolicyholderId { id: String },

    #[error("invalid policyholder `{id}`: {detail}")]
    InvalidPolicyholder { id: String, detail: String },

    #[error("invalid claim event `{event_id}`: {detail}")]
    InvalidEvent { event_id: String, detail: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample")]
    EmptySample,

    #[error("empty portfolio: no claim events")]
    EmptyPortfolio,

    #[error("sample too small: need at least {required} values, got {actual}")]
    SampleTooSmall { required: usize, actual: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("underdispersed sample (variance {variance} <= mean {mean}): no finite dispersion estimate; fall back to the Poisson limit")]
    Underdispersed { mean: f64, variance: f64 },

    #[error("insufficient NCD diversity: events present in {levels} level(s), need at least 2")]
    InsufficientNcdDiversity { levels: usize },

    #[error("zero bandwidth: sample has no spread")]
    ZeroBandwidth,

    #[error("no convergence after {iterations} iterations (last iterate: {last_iterate})")]
    NonConvergence {
        iterations: usize,
        last_iterate: String,
    },

    #[error("risk report is missing required row `{0}`")]
    MissingRow(String),

    #[error("percentile {0} not present in report")]
    MissingPercentile(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (non-convergence), as opposed to
    /// bad inputs. The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
