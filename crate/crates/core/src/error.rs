use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular design: regressor has no variation")]
    SingularDesign,

    #[error("rank-deficient Jacobian at iteration {iteration}")]
    RankDeficient { iteration: usize },

    /// V² = 0: no pair of observations overlaps under the kernel.
    #[error("degenerate statistic: V^2 = 0 (no kernel overlap between residual pairs)")]
    DegenerateStatistic,

    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),

    #[error("moment of order {0} diverges for this kernel")]
    DivergentMoment(u32),

    #[error("row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::SingularDesign
                | Error::RankDeficient { .. }
                | Error::LengthMismatch { .. }
                | Error::Parse { .. }
                | Error::Data(_)
                | Error::Csv(_)
        )
    }
}
