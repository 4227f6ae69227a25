use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator root with modulus {modulus:.3e} lies in the closed unit disk")]
    PoleInDisk { modulus: f64 },
    #[error("rational symbol needs a nonzero numerator")]
    EmptyNumerator,
    #[error("rational symbol needs a nonzero denominator")]
    EmptyDenominator,
    #[error("explicit symbol needs at least one nonzero coefficient")]
    EmptyCoefficients,
    #[error("moving-average example requires alpha != 0")]
    ZeroAlpha,
    #[error("process model needs at least one channel")]
    EmptyChannels,
    #[error("process model needs at least one nonzero channel")]
    AllChannelsZero,
    #[error("unknown catalog model `{0}`")]
    UnknownModel(String),
    #[error("spectral density is negative ({value:.3e}) at grid point {index}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGrid(usize),
    #[error("truncation {truncation} too short, need more than {required}")]
    TruncationTooShort { truncation: usize, required: usize },
    #[error("lag {requested} unavailable, sequence stops at {available}")]
    LagUnavailable { requested: usize, available: usize },
    #[error("window {window} exceeds available lags {lags}")]
    WindowExceedsLags { window: usize, lags: usize },
    #[error("lag-zero covariance is identically zero")]
    DegenerateGamma0,
    #[error("at least one cyclicity label is required")]
    EmptyLabels,
    #[error("max lag {lag} too large for path length {len} (need lag < len/10)")]
    LagTooLarge { lag: usize, len: usize },
    #[error("window {window} too long for path length {len} (need len > 10 * window)")]
    WindowExceedsPath { window: usize, len: usize },
    #[error("channel count mismatch: expected {expected}, found {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("{0} requires real coefficients")]
    ComplexUnsupported(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics themselves rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NegativeDensity { .. }
                | Error::TruncationTooShort { .. }
                | Error::DegenerateGamma0
                | Error::Invariant(_)
        )
    }
}
