//! Error type shared by all simulation modules.

use thiserror::Error;

/// Error variants surfaced by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum SimError {
    /// Requested basis exceeds the configured memory cap.
    #[error("basis capacity exceeded: {0}")]
    Capacity(String),

    /// Objects built over different bases or grids were combined.
    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    /// Time propagation failed to reach the requested tolerance.
    #[error("propagation failed to converge: residual {residual:.3e} after {substeps} substeps")]
    Convergence { residual: f64, substeps: usize },

    /// An operation on a zero-norm or otherwise degenerate state.
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// A model parameter outside its admissible range.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Two atoms coincide, making the pair interaction singular.
    #[error("singular interaction: atoms {0} and {1} coincide")]
    SingularInteraction(usize, usize),

    /// A least-squares or curve fit could not be carried out.
    #[error("fit failed: {0}")]
    FitFailure(String),

    /// An iterative optimizer stopped making progress.
    #[error("optimizer stalled: {0}")]
    Stalled(String),

    /// No atom pair realizes the requested displacement.
    #[error("no atom pairs with displacement ({0}, {1})")]
    UndefinedDisplacement(f64, f64),

    /// Populations required by a bound are missing.
    #[error("missing populations for configurations: {0:?}")]
    PartialBound(Vec<String>),

    /// A measurement matrix too ill-conditioned to invert.
    #[error("ill-conditioned measurement matrix: {0}")]
    Conditioning(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
