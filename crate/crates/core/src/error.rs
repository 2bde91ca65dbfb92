use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("design matrix is rank deficient (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("response value {value} at index {index} is not valid for a {kind} response")]
    InvalidResponse {
        index: usize,
        value: f64,
        kind: &'static str,
    },

    #[error("matrix is not positive definite")]
    Singular,

    #[error("non-positive variance weight {value} at index {index}")]
    DegenerateVariance { index: usize, value: f64 },

    #[error("IRLS diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("observation {index} has leverage {leverage} (too close to one)")]
    Leverage { index: usize, leverage: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("oracle quantile is zero; error rate undefined")]
    ZeroOracle,

    #[error("fit failed for dataset seed {seed}: {source}")]
    DatasetFit {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed cell at row {row}, column {column}: {message}")]
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
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that originate in the numerics rather than in the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::Singular
                | Error::DegenerateVariance { .. }
                | Error::Diverged { .. }
                | Error::Leverage { .. }
                | Error::ZeroOracle
                | Error::DatasetFit { .. }
        )
    }
}
