use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("element budget exceeded: enumeration would produce ~{estimate} elements (budget {budget})")]
    BudgetExceeded { estimate: u64, budget: u64 },

    #[error("slice mismatch: operands were built over different spectrum slices")]
    SliceMismatch,

    #[error("truncation cutoff {cutoff} exceeds the slice cutoff {slice_cutoff}")]
    CutoffExceedsSlice { cutoff: f64, slice_cutoff: f64 },

    #[error("total-mass mismatch: constant coefficients differ by {delta}")]
    MassMismatch { delta: f64 },

    #[error("operation not supported for this group action: {0}")]
    UnsupportedAction(String),

    #[error("parameter regime error: {0}")]
    Regime(String),

    #[error("series does not converge to the requested tolerance: {0}")]
    Divergent(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("evaluation grid too coarse: need at least {needed} points per axis, got {got}")]
    GridTooCoarse { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
