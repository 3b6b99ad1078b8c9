use thiserror::Error;

pub type Result<T, E = QoctError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QoctError {
    #[error("invalid interface: amplitude reflectivity {r} must satisfy |r| < 1")]
    InvalidInterface { r: f64 },

    #[error("gain is not supported: loss exponent {kappa} must be >= 0")]
    GainNotSupported { kappa: f64 },

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("singular stack: |D| = {magnitude:e} at omega = {omega:e} rad/s")]
    SingularStack { omega: f64, magnitude: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spectral model: {0}")]
    InvalidSpectralModel(String),

    #[error("invalid delay grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature cannot resolve the trace: {0}")]
    QuadratureResolution(String),

    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),

    #[error("feature list is empty")]
    EmptyFeatures,

    #[error("degenerate feature pair ({0}, {1}): zero delay separation")]
    DegeneratePair(usize, usize),

    #[error("invalid noise level: mean counts {0} must be > 0")]
    InvalidNoise(f64),

    #[error("parameter {name} = {value} outside bounds [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid search space: {0}")]
    InvalidSearchSpace(String),

    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
}

impl QoctError {
    /// True for failures of the numerics (as opposed to invalid inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QoctError::SingularStack { .. } | QoctError::QuadratureResolution(_)
        )
    }
}
