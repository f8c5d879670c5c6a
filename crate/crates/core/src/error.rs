use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped so a front end can map them onto exit codes:
/// input errors, domain errors (parameter outside the half-plane of
/// convergence) and unsupported configurations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed digit spec {spec:?}: {reason}")]
    MalformedDigitSpec { spec: String, reason: String },

    #[error("digit {digit} is not below the base {base}")]
    DigitOutOfRange { digit: u64, base: u32 },

    #[error("base must be at least 2, got {0}")]
    InvalidBase(u32),

    #[error("the admissible digit set must be nonempty and not reduced to {{0}}")]
    DegenerateDigitSet,

    #[error("malformed complex literal {0:?}")]
    MalformedComplex(String),

    #[error(
        "Re(s) = {sigma} lies below the abscissa of convergence log_b(N) = {abscissa}; \
         the series diverges there"
    )]
    BelowAbscissa { sigma: f64, abscissa: f64 },

    #[error(
        "Re(s) = {sigma} lies exactly on the abscissa of convergence log_b(N) = {abscissa} \
         (the pole line for the full digit set); not evaluated"
    )]
    OnAbscissa { sigma: f64, abscissa: f64 },

    #[error(
        "level 1 with both 1 and b-1 admissible gives a series that is only \
         semi-convergent; use level >= 2"
    )]
    SemiConvergent,

    #[error("level must be at least 1")]
    InvalidLevel,

    #[error("level {level} is too deep for base {base} (b^level overflows 64 bits)")]
    LevelTooDeep { base: u32, level: u32 },

    #[error("tolerance must be positive and finite")]
    InvalidTolerance,

    #[error("working precision has {available} guard digits but {required} are needed; raise the precision")]
    InsufficientPrecision { required: u32, available: u32 },

    #[error("precision unattainable: {planned} terms needed but the cap is {cap}")]
    TermCapExceeded { planned: usize, cap: usize },

    #[error("operation requires the full digit set (N = b)")]
    NotFullDigitSet,

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
