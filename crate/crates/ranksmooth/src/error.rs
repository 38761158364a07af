use thiserror::Error;

/// Error type shared by all ranksmooth modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scoring vector needs at least 2 bins, got {0}")]
    TooFewBins(usize),

    #[error("scoring vector entry {index} is {value}; entries must be finite and >= 0")]
    BadEntry { index: usize, value: f64 },

    #[error("scoring vector sums to {0}, outside the 1e-9 tolerance around 1")]
    SumOutOfTolerance(f64),

    #[error("counts vector has zero total; cannot normalize")]
    ZeroTotal,

    #[error("dimension mismatch: {0} bins vs {1} bins")]
    DimensionMismatch(usize, usize),

    #[error("weights ({0}, {1}) are not a convex pair: need both >= 0 summing to 1")]
    BadWeights(f64, f64),

    #[error(
        "no nonnegative weights can balance bins {t} and {u}: score differences have the same sign"
    )]
    NoSolution { t: usize, u: usize },

    #[error(
        "balancing weights for bins {t} and {u} are not unique: both score differences are zero"
    )]
    NotUnique { t: usize, u: usize },

    #[error("top bins agree; nothing to balance")]
    NotDisagreed,

    #[error("entropy target {0} is outside (0, 1]")]
    OutOfRange(f64),

    #[error("term population is empty")]
    EmptyPopulation,

    #[error("curve fit did not converge: lack of fit {0} exceeds 1e-2")]
    NoConvergence(f64),

    #[error("invalid constraint set: {0}")]
    BadConstraints(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("both counts and pseudo-counts are zero; posterior undefined")]
    AllZero,

    #[error("pseudo-count {value} at bin {index} is invalid; must be finite and >= 0")]
    BadAlpha { index: usize, value: f64 },

    #[error("unknown term '{0}'")]
    UnknownTerm(String),

    #[error("option index {index} out of range for term '{term}' with {k} options")]
    BadIndex {
        term: String,
        index: usize,
        k: usize,
    },

    #[error("explicit feedback requires at least one selected option")]
    EmptySelection,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("explicit and implicit rates cover different term sets")]
    TermSetMismatch,

    #[error("no ranked results to aggregate")]
    EmptyResults,

    #[error("need at least {need} terms for an entropy histogram, got {got}")]
    TooFewTerms { got: usize, need: usize },

    #[error("query '{0}' has no terms")]
    EmptyQuery(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
