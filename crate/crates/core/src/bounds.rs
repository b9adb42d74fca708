//! Closed-form bounds on `log2 P_N^-1` and the dispatcher that picks one.
//!
//! `P_N` is `L` at the root, i.e. TWICE the total error probability under
//! equal priors. Every formula takes `x = log2 L_0^-1` and the tree height
//! `h = log2 N`, and has the shape
//!
//! ```text
//! lower = s * (x - log2(s) / s) = s * x - log2(s)
//! upper = s' * x (+ constant)
//! ```
//!
//! for a scale `s` that is a power of `sqrt(2)`. Scales are handled through
//! their base-2 exponents so heights well past 64 stay exact.

use serde::Serialize;

use crate::dynamics::{evolve, ErrorPair, Trajectory};
use crate::error::{Error, Parity, Result};
use crate::region::{classify, in_b2_ru};

/// Size of a balanced binary tree, stored as its height `h` (`N = 2^h`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TreeSize {
    height: u32,
}

impl TreeSize {
    pub const fn from_height(height: u32) -> Self {
        TreeSize { height }
    }

    pub fn from_leaves(leaves: u64) -> Result<Self> {
        if !leaves.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(leaves));
        }
        Ok(TreeSize {
            height: leaves.trailing_zeros(),
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// `N`, exact as a double for every height below 1024.
    pub fn leaves(&self) -> f64 {
        2f64.powi(self.height as i32)
    }

    /// `N` when it fits in a `u64`.
    pub fn leaves_u64(&self) -> Option<u64> {
        1u64.checked_shl(self.height)
    }

    fn require_parity(&self, expected: Parity) -> Result<()> {
        if Parity::of(self.height) == expected {
            Ok(())
        } else {
            Err(Error::HeightParity {
                height: self.height,
                expected,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Theorem {
    Corollary1,
    Theorem1,
    Theorem2,
    Theorem3EvenVisit,
    Theorem3OddVisit,
    Theorem4OddGap,
    Theorem4EvenGap,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Corollary1 => "Corollary1",
            Theorem::Theorem1 => "Theorem1",
            Theorem::Theorem2 => "Theorem2",
            Theorem::Theorem3EvenVisit => "Theorem3EvenVisit",
            Theorem::Theorem3OddVisit => "Theorem3OddVisit",
            Theorem::Theorem4OddGap => "Theorem4OddGap",
            Theorem::Theorem4EvenGap => "Theorem4EvenGap",
        }
    }
}

/// Lower and upper bounds on `log2 P_N^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    /// The formula's lower bound, possibly negative (vacuous).
    pub lower: f64,
    /// `max(lower, 0)`; `log2 P_N^-1 >= 0` always holds since `P_N <= 1`.
    pub lower_clamped: f64,
    pub upper: f64,
    pub theorem: Theorem,
    /// `log2 L_0` (note the sign: this is `-x`).
    pub log2_l0: f64,
    pub tree: TreeSize,
    pub m: Option<u32>,
}

impl BoundResult {
    fn new(
        theorem: Theorem,
        x: f64,
        tree: TreeSize,
        m: Option<u32>,
        lower: f64,
        upper: f64,
    ) -> Self {
        BoundResult {
            lower,
            lower_clamped: lower.max(0.0),
            upper,
            theorem,
            log2_l0: -x,
            tree,
            m,
        }
    }

    /// Whether `value` lies in `[lower_clamped, upper]`, allowing
    /// [`SANDWICH_SLACK`] relative rounding slack.
    pub fn contains(&self, value: f64) -> bool {
        let slack = SANDWICH_SLACK * value.abs().max(1.0);
        self.lower_clamped - slack <= value && value <= self.upper + slack
    }
}

/// Relative slack for sandwich comparisons. Trajectories that hit a bound
/// with equality (all step ratios exactly 1) land on it up to rounding.
pub const SANDWICH_SLACK: f64 = 1e-12;

/// `s * x - log2 s` for `s = 2^(half_exp / 2)`.
fn scaled_lower(x: f64, half_exp: u32) -> f64 {
    scale(half_exp) * x - half_exp as f64 / 2.0
}

/// `2^(half_exp / 2)`.
fn scale(half_exp: u32) -> f64 {
    if half_exp.is_multiple_of(2) {
        2f64.powi((half_exp / 2) as i32)
    } else {
        2f64.powi((half_exp / 2) as i32) * std::f64::consts::SQRT_2
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "log2 L0^-1 must be nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// Single-step regime (`log2 N < m`): `N x - log2 N <= log2 P_N^-1 <= N x`.
pub fn bound_corollary1(x: f64, tree: TreeSize) -> Result<BoundResult> {
    check_x(x)?;
    let h = tree.height;
    Ok(BoundResult::new(
        Theorem::Corollary1,
        x,
        tree,
        None,
        scaled_lower(x, 2 * h),
        scale(2 * h) * x,
    ))
}

/// Invariant region, even height: scale `sqrt(N)` on both sides.
pub fn bound_theorem1(x: f64, tree: TreeSize) -> Result<BoundResult> {
    check_x(x)?;
    tree.require_parity(Parity::Even)?;
    let h = tree.height;
    Ok(BoundResult::new(
        Theorem::Theorem1,
        x,
        tree,
        None,
        scaled_lower(x, h),
        scale(h) * x,
    ))
}

/// Invariant region, odd height: `sqrt(N/2)` below, `sqrt(2N)` above.
pub fn bound_theorem2(x: f64, tree: TreeSize) -> Result<BoundResult> {
    check_x(x)?;
    tree.require_parity(Parity::Odd)?;
    let h = tree.height;
    Ok(BoundResult::new(
        Theorem::Theorem2,
        x,
        tree,
        None,
        scaled_lower(x, h - 1),
        scale(h + 1) * x,
    ))
}

/// Invariant region, odd height, with a visit to `B_2 ∩ R_U` at a level of
/// the given parity.
pub fn bound_theorem3(x: f64, tree: TreeSize, visit: Parity) -> Result<BoundResult> {
    check_x(x)?;
    tree.require_parity(Parity::Odd)?;
    let h = tree.height;
    Ok(match visit {
        Parity::Even => BoundResult::new(
            Theorem::Theorem3EvenVisit,
            x,
            tree,
            None,
            scaled_lower(x, h + 1),
            scale(h + 1) * x,
        ),
        Parity::Odd => BoundResult::new(
            Theorem::Theorem3OddVisit,
            x,
            tree,
            None,
            scaled_lower(x, h - 1),
            scale(h - 1) * x + 1.0,
        ),
    })
}

/// Start in band `B_m`, `m >= 2`. Falls back to the single-step formula
/// when the tree is too short to leave the bands (`log2 N <= m - 1`).
pub fn bound_theorem4(x: f64, tree: TreeSize, m: u32) -> Result<BoundResult> {
    check_x(x)?;
    if m < 2 {
        return Err(Error::InvalidBand(m));
    }
    let h = tree.height;
    if h < m {
        let mut r = bound_corollary1(x, tree)?;
        r.m = Some(m);
        return Ok(r);
    }
    Ok(match Parity::of(h - m) {
        Parity::Odd => BoundResult::new(
            Theorem::Theorem4OddGap,
            x,
            tree,
            Some(m),
            scaled_lower(x, m - 1 + h),
            scale(m - 1 + h) * x,
        ),
        Parity::Even => BoundResult::new(
            Theorem::Theorem4EvenGap,
            x,
            tree,
            Some(m),
            scaled_lower(x, m - 2 + h),
            scale(m + h) * x,
        ),
    })
}

/// Individual Type I (or, symmetrically, Type II) bounds inside `S` after an
/// even number `k` of levels: `2^(k/2) y - k <= log2 alpha_k^-1 <= 2^(k/2) y`
/// with `y = log2 alpha_0^-1`.
pub fn bound_corollary2(log2_inv0: f64, k: u32) -> Result<(f64, f64)> {
    check_x(log2_inv0)?;
    if !k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("k must be even, got {k}")));
    }
    let s = scale(k);
    Ok((s * log2_inv0 - k as f64, s * log2_inv0))
}

pub fn bound_corollary2_alpha(log2_alpha0_inv: f64, k: u32) -> Result<(f64, f64)> {
    bound_corollary2(log2_alpha0_inv, k)
}

pub fn bound_corollary2_beta(log2_beta0_inv: f64, k: u32) -> Result<(f64, f64)> {
    bound_corollary2(log2_beta0_inv, k)
}

/// First level `k < last level` whose (reflected) state is in `B_2 ∩ R_U`.
pub fn detect_b2ru_visit(trajectory: &Trajectory) -> Option<u32> {
    let last = trajectory.last().level;
    trajectory
        .states
        .iter()
        .take_while(|s| s.level < last)
        .find(|s| s.tag.b_index == Some(2) && s.tag.in_r)
        .map(|s| s.level)
}

/// Picks the bound that applies to `pair0` and a tree of the given size.
///
/// * `pair0 ∈ R`, even height: Theorem 1.
/// * `pair0 ∈ R`, odd height: Theorem 3 when the trajectory visits
///   `B_2 ∩ R_U` before the root (parity of the first visit), else Theorem 2.
/// * `pair0 ∈ B_m \ R`, `m >= 2`: Corollary 1 when `h < m`, otherwise the
///   Theorem 4 case selected by the parity of `h - m`.
pub fn select_bounds(pair0: ErrorPair, tree: TreeSize) -> Result<BoundResult> {
    let tag = classify(&pair0);
    if !tag.side.in_triangle() {
        return Err(Error::NotInTriangle);
    }
    if tree.height == 0 {
        return Err(Error::InvalidArgument("tree needs at least 2 leaves".into()));
    }
    let x = -pair0.total_error_log2();
    let m = tag.b_index.ok_or(Error::IndexOverflow {
        cap: crate::region::DEFAULT_BAND_CAP,
    })?;
    let mut result = if tag.in_r {
        if Parity::of(tree.height) == Parity::Even {
            bound_theorem1(x, tree)?
        } else {
            let trajectory = evolve(pair0, tree.height);
            match detect_b2ru_visit(&trajectory) {
                Some(k) => bound_theorem3(x, tree, Parity::of(k))?,
                None => bound_theorem2(x, tree)?,
            }
        }
    } else if m >= 2 {
        if tree.height < m {
            bound_corollary1(x, tree)?
        } else {
            bound_theorem4(x, tree, m)?
        }
    } else {
        // B_1 is contained in R, so a B_1 point outside R means the
        // classification itself is broken.
        return Err(Error::RegionInconsistent);
    };
    result.m = Some(m);
    Ok(result)
}

/// Exact `log2 P_N^-1` from the recursion next to the dispatched bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub exact: f64,
    pub bound: BoundResult,
    pub ok: bool,
}

pub fn sandwich_check(pair0: ErrorPair, tree: TreeSize) -> Result<SandwichCheck> {
    let bound = select_bounds(pair0, tree)?;
    let exact = -crate::dynamics::fuse_n(pair0, tree.height).total_error_log2();
    Ok(SandwichCheck {
        exact,
        bound,
        ok: bound.contains(exact),
    })
}

/// Helper for callers that only hold plain probabilities.
pub fn is_b2_ru(alpha: f64, beta: f64) -> Result<bool> {
    Ok(in_b2_ru(&ErrorPair::new(alpha, beta)?))
}
