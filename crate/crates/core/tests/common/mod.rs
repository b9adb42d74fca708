#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use relay_tree::region::{in_b2_ru, REGION_TOLERANCE};
use relay_tree::{classify, fuse, ErrorPair};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniform point of `{a, b >= 0, a + b <= max_sum}` (strict when
/// `max_sum == 1`).
pub fn random_pair(rng: &mut StdRng, max_sum: f64) -> ErrorPair {
    loop {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let s = a + b;
        if s < max_sum || (s == max_sum && max_sum < 1.0) {
            return ErrorPair::new(a, b).unwrap();
        }
    }
}

/// `(i / n, j / n)` for `0 <= i, j < n` with `i + j < n`.
pub fn triangle_grid(n: u32) -> Vec<ErrorPair> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n - i {
            out.push(ErrorPair::new(i as f64 / n as f64, j as f64 / n as f64).unwrap());
        }
    }
    out
}

fn within(v: f64, lo: f64, hi: f64, scale: f64) -> bool {
    let tol = REGION_TOLERANCE * scale.max(1.0);
    v >= lo - tol && v <= hi + tol
}

fn magnitude(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Step-ratio inequalities that apply at `cur`, checked as additive
/// inequalities on `log2` values. `prev` is the state one level earlier,
/// when there is one.
pub fn ratio_violations(prev: Option<&ErrorPair>, cur: &ErrorPair) -> Vec<String> {
    let mut out = Vec::new();
    let tag = classify(cur);
    let l0 = cur.total_error_log2();
    if !tag.side.in_triangle() || l0 == f64::NEG_INFINITY {
        return out;
    }
    let f1 = fuse(*cur);
    let f2 = fuse(f1);
    let l1 = f1.total_error_log2();
    let l2 = f2.total_error_log2();
    let scale = magnitude(&[2.0 * l0, l1, l2]);
    let mut check = |name: &str, v: f64, lo: f64, hi: f64| {
        if !within(v, lo, hi, scale) {
            let (a, b) = cur.values();
            out.push(format!("{name} at ({a:e}, {b:e}): {v} outside [{lo}, {hi}]"));
        }
    };
    if tag.b_index.is_some_and(|m| m >= 2) {
        check("L1/L0^2 in B_m", l1 - 2.0 * l0, 0.0, 1.0);
    }
    if tag.in_r {
        check("L2/L0^2 in R", l2 - 2.0 * l0, 0.0, 1.0);
    }
    if cur.alpha_le_beta() {
        check("L1/L0^2 in U", l1 - 2.0 * l0, 0.0, f64::INFINITY);
        check("L1/L0 in U", l1 - l0, f64::NEG_INFINITY, 0.0);
    }
    if let Some(p) = prev {
        if in_b2_ru(p) && tag.b_index == Some(1) {
            check("L1/L0 after B2 ∩ R_U", l1 - l0, -1.0, 0.0);
        }
    }
    if tag.in_s {
        for (name, x0, x2) in [
            ("alpha2/alpha0^2 in S", cur.alpha.log2_p(), f2.alpha.log2_p()),
            ("beta2/beta0^2 in S", cur.beta.log2_p(), f2.beta.log2_p()),
        ] {
            if x0.is_finite() {
                check(name, x2 - 2.0 * x0, 0.0, 2.0);
            }
        }
    }
    out
}
