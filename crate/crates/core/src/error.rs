use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants are split into *input* problems (bad data handed to an
/// operation) and *internal* problems (a computed object failed its own
/// invariant check). [`Error::is_internal`] tells the two apart.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("no admissible value found below search bound {bound}")]
    SearchExhausted { bound: i64 },

    #[error("coefficient at exponent {exponent} requested beyond truncation {trunc}")]
    BeyondTruncation { exponent: String, trunc: String },

    #[error("scale guard exceeded: {0}")]
    ScaleGuard(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("numerical tolerance breached: {0}")]
    Tolerance(String),
}

impl Error {
    /// True for failures of the toolkit's own invariants rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Consistency(_) | Error::Tolerance(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
