use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    /// Cancellation in the series exceeds what double-double accumulation can absorb.
    #[error("precision loss: peak term {peak:e} against result {result:e}")]
    PrecisionLoss { peak: f64, result: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("alpha = {alpha} outside the admissible range ({range})")]
    AlphaOutOfRange { alpha: f64, range: &'static str },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("singular Gramian: min eigenvalue {min_eigenvalue:e}, max eigenvalue {max_eigenvalue:e}")]
    SingularGramian {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("contour failure: {0}")]
    ContourFailure(String),

    #[error("inverse Laplace accuracy not reached: relative disagreement {disagreement:e}")]
    AccuracyNotReached { disagreement: f64 },

    #[error("singular resolvent at s = {re} + {im}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("system spec: {0}")]
    SpecFormat(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DimensionMismatch(_)
                | Error::GridTooCoarse(_)
                | Error::AlphaOutOfRange { .. }
                | Error::SpecFormat(_)
        )
    }
}
