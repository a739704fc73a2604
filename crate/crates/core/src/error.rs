use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {width}-qubit register")]
    QubitOutOfRange { qubit: usize, width: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("level {level} is below the minimum of {min}")]
    LevelTooLow { level: u32, min: u32 },

    #[error("rate {name}={value} outside [0, 1/2)")]
    RateOutOfRange { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("acceptance probability {0} is not positive")]
    ZeroAcceptance(f64),

    #[error("bound denominator {0} is not positive")]
    BoundUndefined(f64),

    #[error("no entry reaches error {target:e} at level {level}")]
    Unreachable { level: u32, target: f64 },

    #[error("missing cost entry: {0}")]
    MissingEntry(String),

    #[error("synthesis table: {0}")]
    Table(String),

    #[error("precision {value:e} outside the small-angle validity window")]
    OutsideValidity { value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
