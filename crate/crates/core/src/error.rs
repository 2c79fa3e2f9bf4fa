use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by the denoising and evaluation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    InvalidInput(String),
    /// Requested decomposition depth exceeds what the signal length allows.
    LevelTooDeep { requested: usize, max_feasible: usize, length: usize },
    /// Periodic decomposition needs the length to be a multiple of `2^levels`.
    LengthNotDivisible { length: usize, levels: usize },
    /// A filter bank failed its orthogonality checks.
    InvalidFilterBank(String),
    /// Coefficient bookkeeping does not match the decomposition metadata.
    Structure(String),
    /// The signal carries no energy where some is required.
    ZeroSignal,
    /// Envelope model has no finite positive transition time.
    NoTransition,
    /// The decay curve never reaches the lower edge of the fit range.
    InsufficientDecay { lower_db: f64, reached_db: f64 },
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::LevelTooDeep { requested, max_feasible, length } => write!(
                f,
                "decomposition level {requested} is too deep for a signal of length {length}; \
                 maximum feasible level is {max_feasible}"
            ),
            Error::LengthNotDivisible { length, levels } => write!(
                f,
                "signal length {length} is not divisible by 2^{levels}; zero-pad the tail to a \
                 multiple of {} before a periodic decomposition",
                1usize << levels
            ),
            Error::InvalidFilterBank(msg) => write!(f, "invalid filter bank: {msg}"),
            Error::Structure(msg) => write!(f, "inconsistent decomposition: {msg}"),
            Error::ZeroSignal => f.write_str("signal has zero energy"),
            Error::NoTransition => {
                f.write_str("envelope model has no finite transition time (floor >= initial level, or zero floor)")
            }
            Error::InsufficientDecay { lower_db, reached_db } => write!(
                f,
                "insufficient decay: curve reaches only {reached_db:.2} dB, fit needs {lower_db:.2} dB"
            ),
            Error::NonFinite => f.write_str("non-finite value encountered"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
