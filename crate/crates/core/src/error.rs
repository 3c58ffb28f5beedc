use thiserror::Error;

/// The first broken invariant found by [`crate::game::validate_game`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative mass at question pair ({x}, {y})")]
    NegativeMass { x: usize, y: usize },
    #[error("mass ≠ 1 (total is {total})")]
    MassNotOne { total: String },
    #[error("acceptance weight outside [0, 1] at (a={a}, b={b}, x={x}, y={y})")]
    WeightOutOfRange { a: usize, b: usize, x: usize, y: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(#[from] Violation),
    #[error("instance too large: {what} needs {needed} steps, cap is {cap}")]
    TooLarge {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("graph error: {0}")]
    Graph(String),
    #[error("target unreachable: best λ = {best:.6} > target {target:.6} after {attempts} attempts; raise the degree or the target")]
    TargetUnreachable {
        best: f64,
        target: f64,
        attempts: u64,
    },
    #[error("game is not graphical: {0}")]
    NotGraphical(String),
    #[error("missing spectral certificate: {0}")]
    Uncertified(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for refusals caused by enumeration or size caps.
    pub fn is_size_error(&self) -> bool {
        match self {
            Error::TooLarge { .. } => true,
            Error::Stage { source, .. } => source.is_size_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
