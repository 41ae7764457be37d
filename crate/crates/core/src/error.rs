use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured cap {cap}")]
    DimensionOverflow { requested: usize, cap: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid rates: {0}")]
    InvalidRates(String),

    #[error("equilibrium rates (alpha*beta - gamma*delta = 0): the bidiagonal representation is singular")]
    EquilibriumRates,

    #[error("r_n vanishes at n = {n}: F has a pole inside the auxiliary window")]
    ZeroRn { n: i64 },

    #[error("singular 2x2 factor (determinant zero)")]
    SingularFactor,

    #[error("rate-sum constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("negative weight {value} at configuration {index} (normalization {normalization})")]
    NegativeWeight { index: usize, value: f64, normalization: f64 },

    #[error("mapped vector has vanishing norm")]
    ZeroImage,

    #[error("steady state is not unique: null space has dimension {0}")]
    NonUniqueSteadyState(usize),

    #[error("invalid auxiliary window: {0}")]
    InvalidWindow(String),

    #[error("invalid correlator spec: {0}")]
    InvalidSpec(String),

    #[error("config error: {0}")]
    Config(String),
}
