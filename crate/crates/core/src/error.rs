use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside its admissible range.
    Domain { name: &'static str, value: f64 },
    /// A structural constraint on the input was violated.
    Invalid(&'static str),
    /// The operation is undefined in the instance's benefit regime.
    WrongRegime(&'static str),
    /// Bisection was asked to refine a bracket without a sign change.
    NoSignChange { lo: f64, hi: f64 },
    /// An iterative evaluation hit its iteration cap.
    NoConvergence(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { name, value } => write!(f, "{name} = {value} is out of range"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::WrongRegime(msg) => write!(f, "not applicable in this regime: {msg}"),
            Error::NoSignChange { lo, hi } => {
                write!(f, "residual does not change sign on [{lo}, {hi}]")
            }
            Error::NoConvergence(what) => write!(f, "{what} did not converge"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_range(name: &'static str, value: f64, ok: bool) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    check_range("alpha", alpha, alpha > 0.0 && alpha <= 1.0)
}
