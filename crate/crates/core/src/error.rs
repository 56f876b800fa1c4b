use thiserror::Error;

use crate::koszul::CohomologyReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("subspace is not contained in the ambient span")]
    Containment,

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("form of degree {degree} has no successor on a space of dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("degree {0} is out of range")]
    InvalidDegree(usize),

    #[error("window {0} is too small")]
    InvalidWindow(u32),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("form is not closed")]
    NotClosed,

    #[error("polynomial {0} is not squarefree")]
    NotSquarefree(String),

    #[error("exponent {exponent} is negative on polynomial variable x{var}")]
    NegativeExponent { var: usize, exponent: i64 },

    #[error("no commutator rule applies to {0}")]
    ReductionFailure(String),

    #[error("windowed computation did not stabilize: {0:?}")]
    NotStabilized(Box<CohomologyReport>),

    #[error("evaluation leaves the tabulation bound")]
    BoundExceeded,

    #[error("class label `{0}` is undefined")]
    UndefinedClass(String),

    #[error("operands carry different twisting forms")]
    TwistMismatch,

    #[error("singular extension axiom violated: {0}")]
    ExtensionAxiomFailure(&'static str),

    #[error("generator images do not define a derivation: {0}")]
    NotADerivation(String),

    #[error("center is larger than the constants: dimension {0}")]
    CenterMismatch(usize),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
