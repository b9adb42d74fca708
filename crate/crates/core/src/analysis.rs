//! Sensor-count and asymptotic analyses built on the exact recursion.

use serde::Serialize;

use crate::bounds::TreeSize;
use crate::dynamics::{fuse, fuse_n, ErrorPair};
use crate::error::{Error, Parity, Result};
use crate::logmath::log2;
use crate::region::{classify, side, DEFAULT_LEVEL_CAP, REGION_TOLERANCE};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Smallest tree whose root satisfies `P_N <= epsilon`, where `P_N` is the
/// root's `alpha + beta` (twice the total error probability). The
/// comparison is made on `log2` values with the region tolerance, so decimal
/// inputs such as `0.1 + 0.2` against `0.3` compare as equal.
pub fn min_sensors_exact(pair0: ErrorPair, epsilon: f64) -> Result<TreeSize> {
    min_sensors_capped(pair0, epsilon, DEFAULT_LEVEL_CAP)
}

pub fn min_sensors_capped(pair0: ErrorPair, epsilon: f64, cap: u32) -> Result<TreeSize> {
    check_epsilon(epsilon)?;
    if !side(&pair0).in_triangle() {
        return Err(Error::NotInTriangle);
    }
    let target = log2(epsilon) + REGION_TOLERANCE;
    let mut pair = pair0;
    for h in 0..=cap {
        if pair.total_error_log2() <= target {
            return Ok(TreeSize::from_height(h));
        }
        pair = fuse(pair);
    }
    Err(Error::NoConvergence { cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub epsilon: f64,
    pub tree: TreeSize,
    /// `N_min / (log2 epsilon)^2`.
    pub ratio: f64,
}

/// [`min_sensors_exact`] over a strictly decreasing list of targets, each
/// normalized by `(log2 epsilon)^2`.
pub fn min_sensors_growth(pair0: ErrorPair, epsilons: &[f64]) -> Result<Vec<GrowthRow>> {
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "epsilons must be strictly decreasing".into(),
        ));
    }
    epsilons
        .iter()
        .map(|&epsilon| {
            let tree = min_sensors_exact(pair0, epsilon)?;
            Ok(GrowthRow {
                epsilon,
                tree,
                ratio: tree.leaves() / log2(epsilon).powi(2),
            })
        })
        .collect()
}

/// `log2 P_N^-1 / (sqrt(N) log2 L_0^-1)` for a start inside `R` and an even
/// height. Perfect sensors (`L_0 = 0`) give 1.
pub fn asymptotic_ratio(pair0: ErrorPair, tree: TreeSize) -> Result<f64> {
    let tag = classify(&pair0);
    if !tag.side.in_triangle() {
        return Err(Error::NotInTriangle);
    }
    if !tag.in_r {
        return Err(Error::NotInR);
    }
    let h = tree.height();
    if Parity::of(h) != Parity::Even {
        return Err(Error::HeightParity {
            height: h,
            expected: Parity::Even,
        });
    }
    let x = -pair0.total_error_log2();
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let exact = -fuse_n(pair0, h).total_error_log2();
    Ok(exact / (2f64.powi((h / 2) as i32) * x))
}

/// How the per-sensor margin `eta_N = 1 - L_0^(N)` shrinks with `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EtaSchedule {
    /// `c / sqrt(N)`, the critical rate.
    InvSqrt,
    /// `c * N^(-1/4)`, slower than critical.
    InvQuarter,
    /// `c / N`, faster than critical.
    InvLinear,
}

impl EtaSchedule {
    pub fn eta(self, c: f64, height: u32) -> f64 {
        let h = height as f64;
        match self {
            EtaSchedule::InvSqrt => c * (-h / 2.0).exp2(),
            EtaSchedule::InvQuarter => c * (-h / 4.0).exp2(),
            EtaSchedule::InvLinear => c * (-h).exp2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EtaSchedule::InvSqrt => "inv_sqrt",
            EtaSchedule::InvQuarter => "inv_quarter",
            EtaSchedule::InvLinear => "inv_linear",
        }
    }
}

pub const DEFAULT_CRUMMY_SPLIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrummyRow {
    pub tree: TreeSize,
    pub eta: f64,
    pub log2_pn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrummyScanResult {
    pub schedule: EtaSchedule,
    pub c: f64,
    pub split: f64,
    pub rows: Vec<CrummyRow>,
}

/// Initial pair for a tree of the given height: `L_0 = 1 - eta`, divided
/// `split : 1 - split` between the two error types.
pub fn crummy_pair(eta: f64, split: f64) -> Result<ErrorPair> {
    let l0 = 1.0 - eta;
    ErrorPair::new(split * l0, (1.0 - split) * l0)
}

/// Runs the recursion from the `N`-dependent start for every height.
pub fn crummy_scan(
    c: f64,
    heights: &[u32],
    split: f64,
    schedule: EtaSchedule,
) -> Result<CrummyScanResult> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split must lie in (0, 1), got {split}"
        )));
    }
    if let Some(&h) = heights.iter().find(|&&h| h % 2 != 0) {
        return Err(Error::HeightParity {
            height: h,
            expected: Parity::Even,
        });
    }
    if let Some(&h_min) = heights.iter().min() {
        let eta = schedule.eta(c, h_min);
        if eta >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "eta = {eta} at height {h_min} is not below 1"
            )));
        }
    }
    let rows = heights
        .iter()
        .map(|&h| {
            let eta = schedule.eta(c, h);
            let pair0 = crummy_pair(eta, split)?;
            Ok(CrummyRow {
                tree: TreeSize::from_height(h),
                eta,
                log2_pn: fuse_n(pair0, h).total_error_log2(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrummyScanResult {
        schedule,
        c,
        split,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;

    fn pair(a: f64, b: f64) -> ErrorPair {
        ErrorPair::new(a, b).unwrap()
    }

    #[test]
    fn min_sensors_examples() {
        let t = min_sensors_exact(pair(0.1, 0.2), 0.01).unwrap();
        assert_eq!(t.leaves_u64(), Some(64));
        assert_eq!(min_sensors_exact(pair(0.1, 0.2), 0.3).unwrap().height(), 0);
        assert_eq!(min_sensors_exact(pair(0.1, 0.2), 0.5).unwrap().height(), 0);
        let t = min_sensors_exact(pair(0.05, 0.9), 0.5).unwrap();
        assert_eq!(t.height(), 7);
        let l = fuse_n(pair(0.05, 0.9), 7).total_error_log2().exp2();
        assert!(l <= 0.5 && l > 0.49);
        assert!(fuse_n(pair(0.05, 0.9), 6).total_error_log2().exp2() > 0.5);
    }

    #[test]
    fn min_sensors_errors() {
        assert!(matches!(
            min_sensors_exact(pair(0.1, 0.2), 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(min_sensors_exact(pair(0.1, 0.2), 1.0).is_err());
        assert_eq!(min_sensors_exact(pair(0.5, 0.5), 0.1), Err(Error::NotInTriangle));
        assert_eq!(
            min_sensors_capped(pair(0.1, 0.2), 1e-300, 5),
            Err(Error::NoConvergence { cap: 5 })
        );
    }

    #[test]
    fn growth_examples() {
        let eps = [2f64.powi(-8), 2f64.powi(-16), 2f64.powi(-32), 2f64.powi(-64)];
        let rows = min_sensors_growth(pair(0.1, 0.2), &eps).unwrap();
        let heights: Vec<u32> = rows.iter().map(|r| r.tree.height()).collect();
        assert_eq!(heights, [6, 8, 10, 12]);
        let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        assert!(hi / lo <= 8.0);

        let rows = min_sensors_growth(pair(0.1, 0.2), &[0.25]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].ratio, rows[0].tree.leaves() / 4.0);

        for r in min_sensors_growth(pair(0.0, 0.0), &eps).unwrap() {
            assert_eq!(r.tree.height(), 0);
        }
        assert!(min_sensors_growth(pair(0.1, 0.2), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn asymptotic_ratio_examples() {
        let r = asymptotic_ratio(pair(0.1, 0.2), TreeSize::from_height(2)).unwrap();
        assert!((r - 0.9).abs() < 1e-3, "{r}");
        assert_eq!(asymptotic_ratio(pair(0.1, 0.2), TreeSize::from_height(0)), Ok(1.0));
        assert_eq!(asymptotic_ratio(pair(0.0, 0.0), TreeSize::from_height(4)), Ok(1.0));
        assert_eq!(
            asymptotic_ratio(pair(0.05, 0.9), TreeSize::from_height(4)),
            Err(Error::NotInR)
        );
        assert!(asymptotic_ratio(pair(0.1, 0.2), TreeSize::from_height(3)).is_err());
    }

    #[test]
    fn asymptotic_ratio_stays_in_unit_interval() {
        for h in (0..=80).step_by(2) {
            let r = asymptotic_ratio(pair(0.1, 0.2), TreeSize::from_height(h)).unwrap();
            assert!(r > 0.0 && r <= 1.0, "h={h} r={r}");
        }
    }

    #[test]
    fn crummy_rows_match_the_recursion() {
        let scan = crummy_scan(4.0, &[10, 14, 18, 22], 0.5, EtaSchedule::InvSqrt).unwrap();
        assert_eq!(scan.rows.len(), 4);
        for row in &scan.rows {
            let h = row.tree.height();
            let pair0 = crummy_pair(row.eta, 0.5).unwrap();
            let traj = evolve(pair0, h);
            assert_eq!(row.log2_pn, *traj.log2_l.last().unwrap());
            assert!(row.log2_pn < 0.0);
        }
    }

    #[test]
    fn crummy_fixed_margin_decreases() {
        // c = 0.5 * 2^(h/4) would vary; a fixed eta needs c scaled per height,
        // so scan each height separately with eta = 0.5
        let mut prev = 0.0;
        for h in (2..=20).step_by(2) {
            let c = 0.5 * 2f64.powf(h as f64 / 2.0);
            let scan = crummy_scan(c, &[h], 0.5, EtaSchedule::InvSqrt).unwrap();
            assert!((scan.rows[0].eta - 0.5).abs() < 1e-12);
            assert!(scan.rows[0].log2_pn < prev);
            prev = scan.rows[0].log2_pn;
        }
    }

    #[test]
    fn crummy_inv_linear_tends_to_one() {
        let scan = crummy_scan(4.0, &[10, 14, 18, 22, 26], 0.5, EtaSchedule::InvLinear).unwrap();
        assert!(scan.rows.last().unwrap().log2_pn > -0.1);
    }

    #[test]
    fn crummy_errors() {
        assert!(crummy_scan(4.0, &[2], 0.5, EtaSchedule::InvSqrt).is_err());
        assert!(crummy_scan(4.0, &[11], 0.5, EtaSchedule::InvSqrt).is_err());
        assert!(crummy_scan(4.0, &[10], 1.0, EtaSchedule::InvSqrt).is_err());
        assert!(crummy_scan(-1.0, &[10], 0.5, EtaSchedule::InvSqrt).is_err());
    }
}
