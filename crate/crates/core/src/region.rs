//! Region geometry of the `(alpha, beta)` plane.
//!
//! All predicates are evaluated on the pair reflected into the upper half
//! (`a = min(alpha, beta)`, `b = max(alpha, beta)`) and compared in the log
//! domain with a symmetric tolerance of [`REGION_TOLERANCE`]. Points within
//! tolerance of a boundary count as inside the closed region.
//!
//! * `B_m`: `(1-a)^(2^(m-1)) + b^(2^(m-1)) >= 1` and `(1-a)^(2^m) + b^(2^m) <= 1`.
//!   A pair in `B_m` needs `m - 1` fusions to reach `B_1`, after which the
//!   next fusion crosses the diagonal.
//! * `R`: `sqrt(1-b) + sqrt(a) >= 1`, invariant under fusion.
//! * `S`: `b <= sqrt(a)` and `b >= 1-(1-a)^2`, an invariant subset of `B_1`.

use crate::dynamics::{fuse, ErrorPair};
use crate::error::{Error, Result};
use crate::logmath::log2_add;

/// Absolute tolerance, in log2 units, for every region comparison.
pub const REGION_TOLERANCE: f64 = 1.0 / (1u64 << 44) as f64;

/// Default cap on the band index `m`.
pub const DEFAULT_BAND_CAP: u32 = 1074;

/// Default cap on the number of fusion levels searched by [`entry_level`].
pub const DEFAULT_LEVEL_CAP: u32 = 10_000;

#[inline]
fn le_tol(x: f64, y: f64) -> bool {
    x <= y + REGION_TOLERANCE
}

/// Position of a pair relative to the line `alpha + beta = 1` and the
/// diagonal `beta = alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Side {
    /// `alpha + beta < 1`, `beta >= alpha`.
    UpperTriangle,
    /// `alpha + beta < 1`, `beta < alpha`.
    LowerTriangle,
    /// `alpha + beta = 1` (within tolerance); invariant under fusion.
    DiagonalSum1,
    /// `alpha + beta > 1`.
    BeyondSum1,
}

impl Side {
    pub fn in_triangle(self) -> bool {
        matches!(self, Side::UpperTriangle | Side::LowerTriangle)
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::UpperTriangle => "UpperTriangle",
            Side::LowerTriangle => "LowerTriangle",
            Side::DiagonalSum1 => "DiagonalSum1",
            Side::BeyondSum1 => "BeyondSum1",
        }
    }
}

/// Full region classification of an error pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RegionTag {
    pub side: Side,
    /// Band index `m` of the (reflected) pair; `None` off the open triangle,
    /// or if `m` would exceed [`DEFAULT_BAND_CAP`].
    pub b_index: Option<u32>,
    pub in_r: bool,
    pub in_s: bool,
    pub above_diagonal: bool,
}

pub fn side(pair: &ErrorPair) -> Side {
    let log2_l = pair.total_error_log2();
    if log2_l.abs() <= REGION_TOLERANCE {
        Side::DiagonalSum1
    } else if log2_l > 0.0 {
        Side::BeyondSum1
    } else if pair.alpha_le_beta() {
        Side::UpperTriangle
    } else {
        Side::LowerTriangle
    }
}

pub fn classify(pair: &ErrorPair) -> RegionTag {
    let side = side(pair);
    let above_diagonal = pair.alpha_le_beta();
    if !side.in_triangle() {
        return RegionTag {
            side,
            b_index: None,
            in_r: false,
            in_s: false,
            above_diagonal,
        };
    }
    let upper = pair.upper();
    RegionTag {
        side,
        b_index: band_index_upper(&upper, DEFAULT_BAND_CAP),
        in_r: in_r_upper(&upper),
        in_s: in_s_upper(&upper),
        above_diagonal,
    }
}

/// Smallest `m >= 1` with the pair in `B_m`.
pub fn b_index(pair: &ErrorPair) -> Result<u32> {
    b_index_capped(pair, DEFAULT_BAND_CAP)
}

pub fn b_index_capped(pair: &ErrorPair, cap: u32) -> Result<u32> {
    if !side(pair).in_triangle() {
        return Err(Error::NotInTriangle);
    }
    band_index_upper(&pair.upper(), cap).ok_or(Error::IndexOverflow { cap })
}

/// Doubles `log2(1-a)` and `log2 b` until `(1-a)^(2^m) + b^(2^m) <= 1`.
/// Multiplying by two is exact in floating point, so the value tested at
/// step `m` is bit-identical to the one tested at step `m - 1` for the image
/// of the pair under fusion.
fn band_index_upper(upper: &ErrorPair, cap: u32) -> Option<u32> {
    let mut x = upper.alpha.log2_q();
    let mut y = upper.beta.log2_p();
    for m in 1..=cap {
        x *= 2.0;
        y *= 2.0;
        if le_tol(log2_add(x, y), 0.0) {
            return Some(m);
        }
    }
    None
}

fn in_r_upper(upper: &ErrorPair) -> bool {
    let lhs = log2_add(0.5 * upper.beta.log2_q(), 0.5 * upper.alpha.log2_p());
    le_tol(0.0, lhs)
}

fn in_s_upper(upper: &ErrorPair) -> bool {
    let log2_a = upper.alpha.log2_p();
    let log2_b = upper.beta.log2_p();
    let log2_or = upper.alpha.complement_square().log2_p();
    le_tol(log2_b, 0.5 * log2_a) && le_tol(log2_or, log2_b)
}

/// Membership in `B_1`, the set whose image crosses the diagonal.
pub fn in_b1(pair: &ErrorPair) -> bool {
    classify(pair).b_index == Some(1)
}

/// Membership in `B_2` intersected with the upper half of `R` (after
/// reflection into the upper triangle).
pub fn in_b2_ru(pair: &ErrorPair) -> bool {
    let tag = classify(pair);
    tag.b_index == Some(2) && tag.in_r
}

/// `beta <= alpha` up to the region tolerance, i.e. on or below the diagonal.
pub fn on_or_below_diagonal(pair: &ErrorPair) -> bool {
    le_tol(pair.beta.log2_p(), pair.alpha.log2_p())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    B1,
    R,
    S,
}

impl Target {
    pub fn contains(self, tag: &RegionTag) -> bool {
        match self {
            Target::B1 => tag.b_index == Some(1),
            Target::R => tag.in_r,
            Target::S => tag.in_s,
        }
    }
}

/// First level at which the trajectory from `pair0` is in `target`.
pub fn entry_level(pair0: ErrorPair, target: Target) -> Result<u32> {
    entry_level_capped(pair0, target, DEFAULT_LEVEL_CAP)
}

pub fn entry_level_capped(pair0: ErrorPair, target: Target, cap: u32) -> Result<u32> {
    if !side(&pair0).in_triangle() {
        return Err(Error::NotInTriangle);
    }
    let mut pair = pair0;
    for level in 0..=cap {
        if target.contains(&classify(&pair)) {
            return Ok(level);
        }
        pair = fuse(pair);
    }
    Err(Error::NoEntry { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fuse_n;

    fn pair(a: f64, b: f64) -> ErrorPair {
        ErrorPair::new(a, b).unwrap()
    }

    #[test]
    fn tolerance_is_two_to_minus_44() {
        assert_eq!(REGION_TOLERANCE, 2f64.powi(-44));
    }

    #[test]
    fn classify_examples() {
        let t = classify(&pair(0.1, 0.2));
        assert_eq!(t.side, Side::UpperTriangle);
        assert_eq!(t.b_index, Some(1));
        assert!(t.in_r && t.in_s && t.above_diagonal);

        let t = classify(&pair(0.05, 0.9));
        assert_eq!(t.side, Side::UpperTriangle);
        assert_eq!(t.b_index, Some(4));
        assert!(!t.in_r && !t.in_s);

        let t = classify(&pair(0.5, 0.5));
        assert_eq!(t.side, Side::DiagonalSum1);
        assert_eq!(t.b_index, None);
        assert!(!t.in_r && !t.in_s);
    }

    #[test]
    fn classify_lower_triangle_reflects() {
        let t = classify(&pair(0.9, 0.05));
        assert_eq!(t.side, Side::LowerTriangle);
        assert_eq!(t.b_index, Some(4));
        assert!(!t.above_diagonal);
    }

    #[test]
    fn classify_beyond_sum_one() {
        let t = classify(&pair(0.6, 0.5));
        assert_eq!(t.side, Side::BeyondSum1);
        assert_eq!(t.b_index, None);
        assert!(!t.in_r && !t.in_s);
    }

    #[test]
    fn origin_satisfies_every_closed_inequality() {
        let t = classify(&pair(0.0, 0.0));
        assert_eq!(t.b_index, Some(1));
        assert!(t.in_r && t.in_s);
    }

    #[test]
    fn b_index_examples() {
        assert_eq!(b_index(&pair(0.1, 0.2)), Ok(1));
        assert_eq!(b_index(&pair(0.05, 0.9)), Ok(4));
        // f^2(0.05, 0.9)
        let f2 = fuse_n(pair(0.05, 0.9), 2);
        let (a, b) = f2.values();
        assert!((a - 0.18549375).abs() < 1e-12 && (b - 0.6561).abs() < 1e-12);
        assert_eq!(b_index(&f2), Ok(2));
        assert_eq!(b_index(&pair(0.1855, 0.6561)), Ok(2));
    }

    #[test]
    fn b_index_errors() {
        assert_eq!(b_index(&pair(0.5, 0.5)), Err(Error::NotInTriangle));
        assert_eq!(b_index(&pair(0.9, 0.3)), Err(Error::NotInTriangle));
        assert_eq!(b_index_capped(&pair(0.05, 0.9), 3), Err(Error::IndexOverflow { cap: 3 }));
    }

    #[test]
    fn boundary_points_take_the_smallest_band() {
        // (0.2, 0.6): 0.8^2 + 0.6^2 = 1 exactly, the B_1 / B_2 boundary
        assert_eq!(b_index(&pair(0.2, 0.6)), Ok(1));
        // its image lands on the diagonal
        assert!(on_or_below_diagonal(&fuse_n(pair(0.2, 0.6), 1)));
    }

    #[test]
    fn entry_level_examples() {
        assert_eq!(entry_level(pair(0.05, 0.9), Target::B1), Ok(3));
        assert_eq!(entry_level(pair(0.1, 0.2), Target::R), Ok(0));
        assert_eq!(entry_level(pair(0.0, 0.0), Target::B1), Ok(0));
        assert_eq!(entry_level(pair(0.5, 0.5), Target::B1), Err(Error::NotInTriangle));
        assert_eq!(
            entry_level_capped(pair(0.05, 0.9), Target::B1, 2),
            Err(Error::NoEntry { cap: 2 })
        );
    }

    #[test]
    fn entry_into_b1_is_band_index_minus_one() {
        for &(a, b) in &[(0.05, 0.9), (0.01, 0.95), (0.2, 0.7), (0.001, 0.99), (0.3, 0.35)] {
            let p = pair(a, b);
            let m = b_index(&p).unwrap();
            assert_eq!(entry_level(p, Target::B1), Ok(m - 1), "({a}, {b})");
        }
    }

    #[test]
    fn tag_invariants_on_grid() {
        let n = 120;
        for i in 0..=n {
            for j in 0..=n {
                let t = classify(&pair(i as f64 / n as f64, j as f64 / n as f64));
                assert_eq!(t.b_index.is_some(), t.side.in_triangle());
                if t.in_s {
                    assert!(t.in_r);
                }
                if t.in_r {
                    assert!(matches!(t.b_index, Some(1) | Some(2)));
                }
            }
        }
    }
}
