//! Base-2 log-domain primitives.
//!
//! Every quantity here is a `log2` of a nonnegative number; `-inf` stands for
//! zero. The functions stay accurate when the arguments are far below the
//! smallest positive double.

use std::f64::consts::LN_2;

/// `log2(2^a + 2^b)`.
#[inline]
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + log2_one_plus_exp2(lo - hi)
}

/// `log2(1 + 2^x)`.
#[inline]
pub fn log2_one_plus_exp2(x: f64) -> f64 {
    if x > 0.0 {
        return x + (-x).exp2().ln_1p() / LN_2;
    }
    x.exp2().ln_1p() / LN_2
}

/// `log2(1 - 2^x)` for `x <= 0`; returns `-inf` at `x == 0`.
#[inline]
pub fn log2_one_minus_exp2(x: f64) -> f64 {
    debug_assert!(!(x > 0.0), "log2_one_minus_exp2 needs x <= 0, got {x}");
    if x >= 0.0 {
        return f64::NEG_INFINITY;
    }
    // Split at 1 - 2^x = 1/2: expm1 is accurate above, ln_1p below.
    let ln = if x > -1.0 {
        (-(x * LN_2).exp_m1()).ln()
    } else {
        (-x.exp2()).ln_1p()
    };
    ln / LN_2
}

/// `log2(p)` with `log2(0) = -inf`.
#[inline]
pub fn log2(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        p.log2()
    }
}

/// `log2(1 - p)` computed without cancellation for small `p`.
#[inline]
pub fn log2_one_minus(p: f64) -> f64 {
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if p <= 0.5 {
        (-p).ln_1p() / LN_2
    } else {
        (1.0 - p).log2()
    }
}
