use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation level {0} (must be > 0)")]
    InvalidTruncation(f64),

    #[error("moment is not integrable: {0}")]
    NonintegrableMoment(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate variance: B̄n = 0, bound components are undefined")]
    DegenerateVariance,

    #[error("centering violated for {which}: max |row/col mean| = {violation:e} exceeds tolerance {tolerance:e}")]
    CenteringViolated {
        which: &'static str,
        violation: f64,
        tolerance: f64,
    },

    #[error("truncation levels must all equal b_n = {b_n} (cell ({row}, {col}) has {found})")]
    TruncationMismatch {
        b_n: f64,
        row: usize,
        col: usize,
        found: String,
    },

    #[error("missing moment data: {0}")]
    MissingMoments(String),

    #[error("scale parameter must be positive, got {0}")]
    NonpositiveScale(f64),

    #[error("invalid g function: {0}")]
    InvalidG(String),

    #[error("n = {n} is too large for exact enumeration (max {max})")]
    TooLarge { n: usize, max: usize },

    #[error("{0} replicates is too few for a distance estimate (need at least {min})", min = crate::mc::MIN_REPLICATES)]
    TooFewReplicates(usize),

    #[error("no sign change of b² − B̄n(b) found in [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cell ({row}, {col}): {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_cell(self, row: usize, col: usize) -> Error {
        match self {
            e @ Error::Cell { .. } => e,
            other => Error::Cell {
                row,
                col,
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, looking through cell annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Cell { source, .. } => source.root(),
            other => other,
        }
    }
}
