use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of two arguments do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A cell or row of an input file could not be parsed. Row indices are 1-based.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    /// Input values violate a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// An output column cannot support the requested operation (constant,
    /// single-class, ...). `output` is the 0-based column index.
    #[error("degenerate output {output}: {msg}")]
    DegenerateOutput { output: usize, msg: String },

    /// A requested partition cannot be realized with the available rows.
    #[error("sizing error: {0}")]
    Sizing(String),

    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A boosting configuration is internally inconsistent or incompatible
    /// with the dataset.
    #[error("config error: {0}")]
    Config(String),

    /// Scalar minimization did not converge within the iteration cap.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A per-output line search failed. `output` is the 0-based column index.
    #[error("line search error for output {output}: {msg}")]
    LineSearch { output: usize, msg: String },

    /// Leaf relabelling could not assign a value to every leaf.
    #[error("relabel error: {0}")]
    Relabel(String),

    /// An operation was called on a model of the wrong kind
    /// (e.g. probabilities from a regression model).
    #[error("mode error: {0}")]
    Mode(String),

    /// A model file could not be decoded or has an unsupported version.
    #[error("model format error: {0}")]
    ModelFormat(String),

    /// A metric is undefined on the given inputs.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that indicate a caller mistake detectable before any
    /// work starts. The CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parameter(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
