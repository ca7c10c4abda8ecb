use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qudit dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("state would need {amplitudes} amplitudes, above the limit of {limit}")]
    SizeGuard { amplitudes: u128, limit: usize },

    #[error("value {value} is out of range for dimension {dim}")]
    DigitOutOfRange { value: usize, dim: usize },

    #[error("site {site} does not exist in a {sites}-site state")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("amplitude vector contains a non-finite value")]
    NonFinite,

    #[error("operator is not unitary")]
    NotUnitary,

    #[error("attempted to renormalize a zero-probability branch")]
    ZeroProbability,

    #[error("invalid configuration:{}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("strategy {strategy} is not applicable to the {protocol} protocol")]
    UnsupportedStrategy {
        strategy: &'static str,
        protocol: &'static str,
    },

    #[error("sample position {position} out of range for {states} shared states")]
    SampleOutOfRange { position: usize, states: usize },

    #[error("probability {0} is not a rational with the expected denominator")]
    NotRational(f64),

    #[error("unknown scenario: {0}")]
    UnknownScenario(String),
}

/// One failed configuration bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!(" [{x}]")).collect()
}
