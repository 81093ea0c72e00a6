use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model parameter is out of range or not finite.
    InvalidParameter { name: &'static str, value: f64 },
    /// The Bargmann-space coefficients divide by `2g`.
    GZero,
    /// Root search with the Schweber fraction is refused at `Δ = 0`, where every
    /// eigenvalue collides with a pole `x(E) = nω`.
    SingularDelta,
    /// `f_n(E)` was evaluated inside the pole guard.
    PoleAt(usize),
    /// A convergent denominator (or an intermediate ratio) vanished.
    DegenerateDenominator { index: usize },
    /// The upward resolvent recurrence hit a zero at `index`.
    DivergedTail { index: usize },
    /// The planted energy sits too close to a genuine eigenvalue.
    PoleTooClose { energy: f64, separation: f64 },
    TooShort { len: usize, min: usize },
    TooFewLevels { have: usize, need: usize },
    WindowEmpty,
    InvalidWindow { lo: f64, hi: f64 },
    /// A sample inside a bracket failed to evaluate.
    LostBracket { at: f64 },
    /// The bracket ends do not have opposite signs.
    NoSignChange { lo: f64, hi: f64 },
    /// Parity chains are identical everywhere in the scan.
    DegenerateScan,
    InvalidScan(&'static str),
    InvalidOrder { order: usize, min: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::GZero => write!(f, "coupling g = 0: the Bargmann-space recurrence is undefined, use method b or diag"),
            Error::SingularDelta => write!(
                f,
                "delta = 0: eigenvalues coincide with the poles x(E) = n*omega; use method b or diag"
            ),
            Error::PoleAt(n) => write!(f, "f_{n}(E) evaluated at its pole x(E) = {n}*omega"),
            Error::DegenerateDenominator { index } => {
                write!(f, "vanishing denominator at level {index}")
            }
            Error::DivergedTail { index } => {
                write!(f, "upward resolvent recurrence diverged at G_{index}")
            }
            Error::PoleTooClose { energy, separation } => write!(
                f,
                "E0 = {energy} lies within {separation:.3e} of an eigenvalue of the unmodified chain"
            ),
            Error::TooShort { len, min } => {
                write!(f, "sequence of length {len} is shorter than {min}")
            }
            Error::TooFewLevels { have, need } => {
                write!(f, "{have} levels available, {need} required")
            }
            Error::WindowEmpty => write!(f, "no level found in the search window"),
            Error::InvalidWindow { lo, hi } => write!(f, "invalid window [{lo}, {hi}]"),
            Error::LostBracket { at } => write!(f, "evaluation failed inside bracket at E = {at}"),
            Error::NoSignChange { lo, hi } => write!(f, "no sign change on [{lo}, {hi}]"),
            Error::DegenerateScan => write!(
                f,
                "delta = 0: both parity chains coincide, every level pair is degenerate"
            ),
            Error::InvalidScan(why) => write!(f, "invalid scan: {why}"),
            Error::InvalidOrder { order, min } => {
                write!(f, "truncation order {order} is below the minimum {min}")
            }
        }
    }
}
