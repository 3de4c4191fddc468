use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the lattice-lab core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    /// The inequality system has a non-trivial lineality space.
    NotPointed,
    /// The dual wedge of the cone is not a cone (the cone has empty interior).
    DegenerateCone,
    InvalidParameter(String),
    Precondition(String),
    /// An iterative method hit its iteration cap; `best` is the best feasible value seen.
    NonConvergence { best: f64, iterations: usize },
    /// The approximation sequence did not settle within the index range.
    SchemeNotConverged { increments: Vec<f64> },
    Singular,
    LpIterationLimit,
    /// A sampled point of a chart image left the domain.
    ChartContainment { point: Vec<f64> },
    /// A point of the closed domain is not covered by any chart.
    CoverFailure { point: Vec<f64> },
    GridTooCoarse { delta: f64, h: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotPointed => write!(f, "cone is not pointed"),
            Error::DegenerateCone => write!(f, "degenerate cone: dual wedge is not a cone"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::NonConvergence { best, iterations } => write!(
                f,
                "no convergence after {iterations} iterations (best value {best:e})"
            ),
            Error::SchemeNotConverged { increments } => write!(
                f,
                "approximation scheme did not converge ({} increments, last {:e})",
                increments.len(),
                increments.last().copied().unwrap_or(f64::NAN)
            ),
            Error::Singular => write!(f, "singular linear system"),
            Error::LpIterationLimit => write!(f, "simplex iteration limit reached"),
            Error::ChartContainment { point } => {
                write!(f, "chart image leaves the domain at {point:?}")
            }
            Error::CoverFailure { point } => write!(f, "point {point:?} is not covered by any chart"),
            Error::GridTooCoarse { delta, h } => {
                write!(f, "grid too coarse: scale {delta:e} is below 2h = {:e}", 2.0 * h)
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
