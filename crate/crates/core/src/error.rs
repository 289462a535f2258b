use thiserror::Error;

/// Errors raised by the analysis modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient nodes: budget {got} is below the minimum {min}")]
    InsufficientNodes { got: usize, min: usize },

    #[error("pole in stencil at {at}")]
    PoleInStencil { at: String },

    #[error("pole in region at {at}")]
    PoleInRegion { at: String },

    #[error("cylinder outside domain")]
    CylinderOutsideDomain,

    #[error("weight overflow at {at}")]
    WeightOverflow { at: String },

    #[error("metric not positive (smallest eigenvalue {min_eigenvalue:e})")]
    MetricNotPositive { min_eigenvalue: f64 },

    #[error("{operation} requires {required} regularity, field is tagged {found}")]
    Regularity {
        operation: &'static str,
        required: &'static str,
        found: &'static str,
    },

    #[error("Gram matrix numerically singular: increase regularization or lower degree")]
    SingularGram,

    #[error("degenerate weight: phi is -inf on {fraction:.3} of the quadrature nodes")]
    DegenerateWeight { fraction: f64 },

    #[error("candidate vanishes at {count} quadrature nodes")]
    VanishingCandidate { count: usize },

    #[error("support not strictly inside the grid: {0}")]
    SupportOutsideGrid(String),

    #[error("non-finite integral ({0}); rescale phi or lower m")]
    Overflow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
