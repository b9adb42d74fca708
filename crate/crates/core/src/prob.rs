//! Probabilities carried as `(log2 p, log2(1 - p))`.

use crate::error::{Error, Result};
use crate::logmath::{log2, log2_one_minus, log2_one_minus_exp2, log2_one_plus_exp2};

/// A probability stored through both of its channels, `log2 p` and
/// `log2(1 - p)`.
///
/// Repeated squaring drives error probabilities below `f64::MIN_POSITIVE`
/// within a few dozen fusion levels, and the complement branch of the fusion
/// map needs `1 - p` for values of `p` that are indistinguishable from 1 in
/// plain arithmetic. Keeping both logs lets every operation read whichever
/// channel still holds full relative precision.
///
/// Invariants: both channels are `<= 0`, they are never both `-inf`, and
/// `2^log2_p + 2^log2_q = 1` up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedProb {
    log2_p: f64,
    log2_q: f64,
}

impl ExtendedProb {
    pub const ZERO: ExtendedProb = ExtendedProb {
        log2_p: f64::NEG_INFINITY,
        log2_q: 0.0,
    };

    pub const ONE: ExtendedProb = ExtendedProb {
        log2_p: 0.0,
        log2_q: f64::NEG_INFINITY,
    };

    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(ExtendedProb {
            log2_p: log2(p),
            log2_q: log2_one_minus(p),
        })
    }

    /// Builds the probability `2^log2_p`.
    pub fn from_log2(log2_p: f64) -> Result<Self> {
        if log2_p.is_nan() || log2_p > 0.0 {
            return Err(Error::InvalidProbability(log2_p.exp2()));
        }
        Ok(ExtendedProb {
            log2_p,
            log2_q: log2_one_minus_exp2(log2_p),
        })
    }

    /// Builds the probability `1 - 2^log2_q`.
    pub fn from_log2_complement(log2_q: f64) -> Result<Self> {
        Ok(Self::from_log2(log2_q)?.complement())
    }

    #[inline]
    pub fn log2_p(&self) -> f64 {
        self.log2_p
    }

    #[inline]
    pub fn log2_q(&self) -> f64 {
        self.log2_q
    }

    /// `p` as a plain double (underflows to 0 for very small values).
    #[inline]
    pub fn value(&self) -> f64 {
        self.log2_p.exp2()
    }

    /// `1 - p` as a plain double.
    #[inline]
    pub fn complement_value(&self) -> f64 {
        self.log2_q.exp2()
    }

    /// `1 - p`. Exact: the channels swap.
    #[inline]
    pub fn complement(self) -> Self {
        ExtendedProb {
            log2_p: self.log2_q,
            log2_q: self.log2_p,
        }
    }

    /// `p^2`.
    ///
    /// `log2 p` doubles exactly. The complement `1 - p^2` is rebuilt from the
    /// smaller channel: `(1 - p)(1 + p)` when `p > 1/2`, otherwise
    /// `1 - 2^(2 log2 p)`.
    #[inline]
    pub fn square(self) -> Self {
        let log2_p = 2.0 * self.log2_p;
        let log2_q = if self.log2_q < self.log2_p {
            self.log2_q + log2_one_plus_exp2(self.log2_p)
        } else {
            log2_one_minus_exp2(log2_p)
        };
        ExtendedProb { log2_p, log2_q }
    }

    /// `1 - (1 - p)^2`, the probability that at least one of two independent
    /// events of probability `p` occurs.
    #[inline]
    pub fn complement_square(self) -> Self {
        self.complement().square().complement()
    }

    /// `|2^log2_p + 2^log2_q - 1|`, the drift from exact consistency.
    pub fn consistency_error(&self) -> f64 {
        (self.value() + self.complement_value() - 1.0).abs()
    }

    /// Compares the underlying probabilities using the channel with better
    /// resolution: `log2 p` when either value is at most 1/2, `log2(1-p)`
    /// (reversed) when both are close to 1.
    pub fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        if self.log2_p <= -1.0 || other.log2_p <= -1.0 {
            self.log2_p.total_cmp(&other.log2_p)
        } else {
            other.log2_q.total_cmp(&self.log2_q)
        }
    }
}

impl TryFrom<f64> for ExtendedProb {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        ExtendedProb::new(p)
    }
}
