use thiserror::Error;

/// Errors raised by the dynamics, bounds, and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("error pair is not inside the triangle alpha + beta < 1")]
    NotInTriangle,

    #[error("band index exceeds the cap of {cap}")]
    IndexOverflow { cap: u32 },

    #[error("trajectory did not enter the target region within {cap} levels")]
    NoEntry { cap: u32 },

    #[error("total error did not reach the target within {cap} levels")]
    NoConvergence { cap: u32 },

    #[error("leaf count {0} is not a power of two")]
    NotPowerOfTwo(u64),

    #[error("tree height {height} must be {expected}")]
    HeightParity { height: u32, expected: Parity },

    #[error("band index must be at least 2, got {0}")]
    InvalidBand(u32),

    #[error("initial pair is not in the invariant region R")]
    NotInR,

    #[error("region classification is inconsistent: B1 point outside R")]
    RegionInconsistent,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by an unmet mathematical precondition rather
    /// than malformed input. The CLI maps these to exit code 3.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::NotInTriangle
                | Error::IndexOverflow { .. }
                | Error::NoEntry { .. }
                | Error::NoConvergence { .. }
                | Error::NotInR
                | Error::RegionInconsistent
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
