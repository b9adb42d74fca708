//! Literal Monte Carlo simulation of the relay tree.
//!
//! A trial draws all `2^h` leaf messages, packed 64 to a `u64`, and folds
//! them level by level in place: adjacent bit pairs are combined with the
//! level's gate and the surviving even bits are compacted into the low half
//! of each word. No tree is materialized.
//!
//! Randomness is counter based. Word `i` of trial `t` is
//!
//! ```text
//! mix64(mix64(seed) + (t * 2^32 + i) * 0x9E3779B97F4A7C15)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer, so every trial can be
//! regenerated independently of how trials are spread across threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{fuse_n, fuse_oracle, oracle_gate, ErrorPair, Gate};
use crate::error::{Error, Result};

pub const MAX_HEIGHT: u32 = 24;
/// Trials are addressed by the upper half of a 64-bit counter.
pub const MAX_TRIALS: u64 = 1 << 32;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random words of one trial.
struct TrialStream {
    base: u64,
    index: u64,
}

impl TrialStream {
    fn new(key: u64, trial: u64) -> Self {
        TrialStream {
            base: key,
            index: trial << 32,
        }
    }

    #[inline]
    fn next_word(&mut self) -> u64 {
        let w = mix64(self.base.wrapping_add(self.index.wrapping_mul(GOLDEN_GAMMA)));
        self.index += 1;
        w
    }
}

/// A probability quantized to a multiple of `2^-32`.
#[derive(Debug, Clone, Copy)]
struct Threshold(u64);

impl Threshold {
    fn new(p: f64) -> Self {
        Threshold((p * 4_294_967_296.0).round() as u64)
    }

    /// 64 independent bits, each set with probability `t / 2^32`.
    ///
    /// Walks the binary digits of `t` from the lowest set one upwards:
    /// `acc | r` for a one, `acc & r` for a zero, which maps a bit
    /// probability `q` to `(q + d) / 2`.
    #[inline]
    fn word(self, stream: &mut TrialStream) -> u64 {
        let t = self.0;
        if t == 0 {
            return 0;
        }
        if t >= 1 << 32 {
            return !0;
        }
        let low = t.trailing_zeros();
        let mut acc = 0u64;
        for j in low..32 {
            let r = stream.next_word();
            acc = if (t >> j) & 1 == 1 { acc | r } else { acc & r };
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub pair0: ErrorPair,
    pub height: u32,
    pub trials: u64,
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_HEIGHT).contains(&self.height) {
            return Err(Error::InvalidArgument(format!(
                "height must lie in [1, {MAX_HEIGHT}], got {}",
                self.height
            )));
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(Error::InvalidArgument(format!(
                "trials must lie in [1, 2^32], got {}",
                self.trials
            )));
        }
        Ok(())
    }

    fn leaf_words(&self) -> usize {
        (1usize << self.height).div_ceil(64)
    }

    /// Leaf threshold and whether drawn bits mark errors that flip a 0
    /// message (H0) or a 1 message (H1).
    fn leaf_threshold(&self) -> (Threshold, bool) {
        match self.hypothesis {
            Hypothesis::H0 => (Threshold::new(self.pair0.alpha.value()), false),
            Hypothesis::H1 => (Threshold::new(self.pair0.beta.value()), true),
        }
    }

    fn fill_leaves(&self, key: u64, trial: u64, buf: &mut [u64]) {
        let (threshold, invert) = self.leaf_threshold();
        let mut stream = TrialStream::new(key, trial);
        for w in buf.iter_mut() {
            let errors = threshold.word(&mut stream);
            *w = if invert { !errors } else { errors };
        }
    }

    fn is_error(&self, root: bool) -> bool {
        match self.hypothesis {
            Hypothesis::H0 => root,
            Hypothesis::H1 => !root,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub error_rate: f64,
    pub errors: u64,
    pub trials: u64,
    /// `sqrt(rate (1 - rate) / trials)` at the empirical rate.
    pub std_err: f64,
    /// `alpha_h` under H0, `beta_h` under H1, from the recursion.
    pub predicted: f64,
}

impl McEstimate {
    /// Binomial standard error at the predicted rate.
    pub fn predicted_std_err(&self) -> f64 {
        binomial_std_err(self.predicted, self.trials)
    }

    /// `(rate - predicted) / s` with `s` the larger of the empirical and
    /// predicted standard errors. Zero when both vanish and the rates agree.
    pub fn z_score(&self) -> f64 {
        let diff = self.error_rate - self.predicted;
        let s = self.std_err.max(self.predicted_std_err());
        if diff == 0.0 {
            0.0
        } else {
            diff / s
        }
    }

    /// `|rate - predicted| <= k s`, see [`McEstimate::z_score`].
    pub fn agrees_within(&self, k: f64) -> bool {
        self.z_score().abs() <= k
    }
}

fn binomial_std_err(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Per-level rules read off the recursion: `Or` where `alpha_k <= beta_k`.
pub fn gate_schedule(pair0: ErrorPair, height: u32) -> Vec<Gate> {
    let mut pair = pair0;
    (0..height)
        .map(|_| {
            let g = Gate::for_pair(&pair);
            pair = crate::dynamics::fuse(pair);
            g
        })
        .collect()
}

/// Per-level rules chosen by comparing the total error of both gates on
/// the plain-arithmetic trajectory.
fn oracle_schedule(pair0: ErrorPair, height: u32) -> Result<Vec<Gate>> {
    let mut pair = pair0;
    let mut gates = Vec::with_capacity(height as usize);
    for _ in 0..height {
        let (a, b) = pair.values();
        gates.push(oracle_gate(a, b)?);
        pair = fuse_oracle(pair)?;
    }
    Ok(gates)
}

/// Keeps bits 0, 2, 4, .. of `x` and packs them into the low 32 bits.
#[inline]
fn compress_even(mut x: u64) -> u64 {
    x &= 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    (x | (x >> 16)) & 0x0000_0000_FFFF_FFFF
}

#[inline]
fn combine(gate: Gate, w: u64) -> u64 {
    let paired = match gate {
        Gate::Or => w | (w >> 1),
        Gate::And => w & (w >> 1),
    };
    compress_even(paired)
}

/// Folds `2^height` packed leaf bits down to the root message.
fn fold(buf: &mut [u64], gates: &[Gate]) -> bool {
    let mut words = buf.len();
    for &g in gates {
        if words > 1 {
            for j in 0..words / 2 {
                let lo = combine(g, buf[2 * j]);
                let hi = combine(g, buf[2 * j + 1]);
                buf[j] = lo | (hi << 32);
            }
            words /= 2;
        } else {
            buf[0] = combine(g, buf[0]);
        }
    }
    buf[0] & 1 == 1
}

pub fn simulate(config: &McConfig) -> Result<McEstimate> {
    config.validate()?;
    let gates = gate_schedule(config.pair0, config.height);
    let key = mix64(config.seed);
    let words = config.leaf_words();
    let errors: u64 = (0..config.trials)
        .into_par_iter()
        .map_init(
            || vec![0u64; words],
            |buf, trial| {
                config.fill_leaves(key, trial, buf);
                config.is_error(fold(buf, &gates)) as u64
            },
        )
        .sum();
    let root = fuse_n(config.pair0, config.height);
    let predicted = match config.hypothesis {
        Hypothesis::H0 => root.alpha.value(),
        Hypothesis::H1 => root.beta.value(),
    };
    let error_rate = errors as f64 / config.trials as f64;
    Ok(McEstimate {
        error_rate,
        errors,
        trials: config.trials,
        std_err: binomial_std_err(error_rate, config.trials),
        predicted,
    })
}

/// Folds every trial twice from the same leaves, once with
/// [`gate_schedule`] and once with rules picked by minimum total error, and
/// reports whether all root decisions coincide.
pub fn simulate_lrt_equivalence(config: &McConfig) -> Result<bool> {
    config.validate()?;
    if !crate::region::side(&config.pair0).in_triangle() {
        return Err(Error::NotInTriangle);
    }
    let schedule = gate_schedule(config.pair0, config.height);
    let oracle = oracle_schedule(config.pair0, config.height)?;
    let key = mix64(config.seed);
    let words = config.leaf_words();
    Ok((0..config.trials).into_par_iter().all(|trial| {
        let mut a = vec![0u64; words];
        config.fill_leaves(key, trial, &mut a);
        let mut b = a.clone();
        fold(&mut a, &schedule) == fold(&mut b, &oracle)
    }))
}
