//! The fusion map of a balanced binary relay tree and its trajectories.

use crate::error::{Error, Result};
use crate::logmath::log2_add;
use crate::prob::ExtendedProb;
use crate::region::{classify, RegionTag};

/// Type I / Type II error probabilities shared by every node of one tree
/// level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub alpha: ExtendedProb,
    pub beta: ExtendedProb,
}

impl ErrorPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Ok(ErrorPair {
            alpha: ExtendedProb::new(alpha)?,
            beta: ExtendedProb::new(beta)?,
        })
    }

    pub const fn from_extended(alpha: ExtendedProb, beta: ExtendedProb) -> Self {
        ErrorPair { alpha, beta }
    }

    /// Reflection across the diagonal `beta = alpha`.
    pub fn swap(self) -> Self {
        ErrorPair {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// Reflection across the line `alpha + beta = 1`.
    pub fn complement(self) -> Self {
        ErrorPair {
            alpha: self.alpha.complement(),
            beta: self.beta.complement(),
        }
    }

    /// The pair reflected into the closed upper half `beta >= alpha`.
    pub fn upper(self) -> Self {
        if self.alpha_le_beta() {
            self
        } else {
            self.swap()
        }
    }

    #[inline]
    pub fn alpha_le_beta(&self) -> bool {
        self.alpha.cmp_value(&self.beta).is_le()
    }

    /// `(alpha, beta)` as plain doubles.
    pub fn values(&self) -> (f64, f64) {
        (self.alpha.value(), self.beta.value())
    }

    /// `log2(alpha + beta)`, i.e. `log2 L` where `L` is twice the total error
    /// probability under equal priors. `-inf` for the perfect pair `(0, 0)`.
    pub fn total_error_log2(&self) -> f64 {
        log2_add(self.alpha.log2_p(), self.beta.log2_p())
    }
}

/// Two-input fusion rule of a relay node. A node outputs 1 ("decide H1")
/// under `Or` when either child says 1, under `And` when both do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Gate {
    Or,
    And,
}

impl Gate {
    /// The rule applied to a level whose nodes carry `pair`: `Or` when
    /// `alpha <= beta`, `And` otherwise.
    pub fn for_pair(pair: &ErrorPair) -> Gate {
        if pair.alpha_le_beta() {
            Gate::Or
        } else {
            Gate::And
        }
    }

    #[inline]
    pub fn apply(self, x: bool, y: bool) -> bool {
        match self {
            Gate::Or => x | y,
            Gate::And => x & y,
        }
    }
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gate::Or => f.write_str("OR"),
            Gate::And => f.write_str("AND"),
        }
    }
}

/// One fusion level: `(1-(1-a)^2, b^2)` when `a <= b`, else `(a^2, 1-(1-b)^2)`.
///
/// Runs entirely in the log domain, so trajectories can be followed long
/// after the probabilities leave the range of `f64`.
#[inline]
pub fn fuse(pair: ErrorPair) -> ErrorPair {
    match Gate::for_pair(&pair) {
        Gate::Or => ErrorPair::from_extended(pair.alpha.complement_square(), pair.beta.square()),
        Gate::And => ErrorPair::from_extended(pair.alpha.square(), pair.beta.complement_square()),
    }
}

/// Error pair produced by applying `gate` to two independent children with
/// error pair `(alpha, beta)`, by enumerating the four joint child messages
/// under each hypothesis. Plain double arithmetic.
pub fn gate_error_pair(gate: Gate, alpha: f64, beta: f64) -> (f64, f64) {
    let mut alpha_out = 0.0;
    let mut beta_out = 0.0;
    for x in [false, true] {
        for y in [false, true] {
            // under H0 a child sends 1 with probability alpha
            let p0 = bit_prob(x, alpha) * bit_prob(y, alpha);
            // under H1 a child sends 0 with probability beta
            let p1 = bit_prob(!x, beta) * bit_prob(!y, beta);
            if gate.apply(x, y) {
                alpha_out += p0;
            } else {
                beta_out += p1;
            }
        }
    }
    (alpha_out, beta_out)
}

fn bit_prob(event: bool, p: f64) -> f64 {
    if event {
        p
    } else {
        1.0 - p
    }
}

/// The rule with the smaller total error `alpha' + beta'` for children with
/// error pair `(alpha, beta)`; ties go to `Or`. Totals within a few rounding
/// errors of each other count as tied. Requires `alpha + beta < 1`.
pub fn oracle_gate(alpha: f64, beta: f64) -> Result<Gate> {
    if alpha + beta >= 1.0 {
        return Err(Error::NotInTriangle);
    }
    let (ao, bo) = gate_error_pair(Gate::Or, alpha, beta);
    let (aa, ba) = gate_error_pair(Gate::And, alpha, beta);
    let (or_total, and_total) = (ao + bo, aa + ba);
    let noise = 8.0 * f64::EPSILON * (or_total + and_total);
    if or_total <= and_total + noise {
        Ok(Gate::Or)
    } else {
        Ok(Gate::And)
    }
}

/// Independent reference for [`fuse`]: picks the better of OR and AND by
/// exhaustive outcome enumeration in plain doubles.
pub fn fuse_oracle(pair: ErrorPair) -> Result<ErrorPair> {
    let (alpha, beta) = pair.values();
    let gate = oracle_gate(alpha, beta)?;
    let (a, b) = gate_error_pair(gate, alpha, beta);
    ErrorPair::new(a.clamp(0.0, 1.0), b.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub level: u32,
    pub pair: ErrorPair,
    pub tag: RegionTag,
}

/// States `(alpha_k, beta_k)` for `k = 0..=levels`, each with its region tag
/// and `log2 L_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<TrajectoryState>,
    pub log2_l: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &TrajectoryState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn pairs(&self) -> impl Iterator<Item = &ErrorPair> + '_ {
        self.states.iter().map(|s| &s.pair)
    }
}

pub fn evolve(pair0: ErrorPair, levels: u32) -> Trajectory {
    let mut states = Vec::with_capacity(levels as usize + 1);
    let mut log2_l = Vec::with_capacity(levels as usize + 1);
    let mut pair = pair0;
    for level in 0..=levels {
        states.push(TrajectoryState {
            level,
            pair,
            tag: classify(&pair),
        });
        log2_l.push(pair.total_error_log2());
        if level < levels {
            pair = fuse(pair);
        }
    }
    Trajectory { states, log2_l }
}

/// Iterates `fuse` without classification; returns the pair at `levels`.
pub fn fuse_n(pair0: ErrorPair, levels: u32) -> ErrorPair {
    (0..levels).fold(pair0, |p, _| fuse(p))
}
