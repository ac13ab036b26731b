use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator matrix is rank deficient: rank {rank} < {rows}")]
    RankDeficient { rank: usize, rows: usize },

    #[error("unsupported code parameters ({n},{k}) for {family}")]
    UnsupportedCode { family: String, n: usize, k: usize },

    #[error("generator polynomial {poly:#x} has degree incompatible with n-k = {parity}")]
    PolynomialDegree { poly: u64, parity: usize },

    #[error("parity-check matrix has {rows} rows; syndrome masks support at most 128")]
    TooManyParityChecks { rows: usize },

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("invalid channel configuration: {0}")]
    InvalidChannel(String),

    #[error("invalid simulation job: {0}")]
    InvalidJob(String),

    #[error("{0}")]
    Calibration(String),

    #[error("no calibration line for code {code}, combiner {combiner}, L={branches}")]
    MissingCalibration {
        code: String,
        combiner: String,
        branches: usize,
    },

    #[error("Berlekamp-Massey decoding requires a BCH codebook, got {0}")]
    NotBch(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
