//! C ABI for the relay-tree library.
//!
//! Every fallible entry point returns an [`RtStatus`] and writes its result
//! through an out pointer. Out pointers are left untouched on failure. The
//! text of the most recent error on the calling thread is available from
//! [`rt_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use relay_tree::analysis::min_sensors_exact;
use relay_tree::bounds::{sandwich_check, Theorem, TreeSize};
use relay_tree::mc::{simulate, Hypothesis, McConfig};
use relay_tree::{classify, evolve, fuse, Error, ErrorPair, RegionTag, Side, Trajectory};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidProbability = 2,
    NotInTriangle = 3,
    IndexOverflow = 4,
    NoEntry = 5,
    NoConvergence = 6,
    NotPowerOfTwo = 7,
    HeightParity = 8,
    InvalidBand = 9,
    NotInR = 10,
    RegionInconsistent = 11,
    InvalidArgument = 12,
    OutOfRange = 13,
    Panic = 14,
}

impl From<&Error> for RtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidProbability(_) => RtStatus::InvalidProbability,
            Error::NotInTriangle => RtStatus::NotInTriangle,
            Error::IndexOverflow { .. } => RtStatus::IndexOverflow,
            Error::NoEntry { .. } => RtStatus::NoEntry,
            Error::NoConvergence { .. } => RtStatus::NoConvergence,
            Error::NotPowerOfTwo(_) => RtStatus::NotPowerOfTwo,
            Error::HeightParity { .. } => RtStatus::HeightParity,
            Error::InvalidBand(_) => RtStatus::InvalidBand,
            Error::NotInR => RtStatus::NotInR,
            Error::RegionInconsistent => RtStatus::RegionInconsistent,
            Error::InvalidArgument(_) => RtStatus::InvalidArgument,
        }
    }
}

/// Position of a pair relative to `alpha + beta = 1` and the diagonal.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtSide {
    UpperTriangle = 0,
    LowerTriangle = 1,
    DiagonalSum1 = 2,
    BeyondSum1 = 3,
}

impl From<Side> for RtSide {
    fn from(s: Side) -> Self {
        match s {
            Side::UpperTriangle => RtSide::UpperTriangle,
            Side::LowerTriangle => RtSide::LowerTriangle,
            Side::DiagonalSum1 => RtSide::DiagonalSum1,
            Side::BeyondSum1 => RtSide::BeyondSum1,
        }
    }
}

/// Which bound formula was dispatched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtTheorem {
    Corollary1 = 0,
    Theorem1 = 1,
    Theorem2 = 2,
    Theorem3EvenVisit = 3,
    Theorem3OddVisit = 4,
    Theorem4OddGap = 5,
    Theorem4EvenGap = 6,
}

impl From<Theorem> for RtTheorem {
    fn from(t: Theorem) -> Self {
        match t {
            Theorem::Corollary1 => RtTheorem::Corollary1,
            Theorem::Theorem1 => RtTheorem::Theorem1,
            Theorem::Theorem2 => RtTheorem::Theorem2,
            Theorem::Theorem3EvenVisit => RtTheorem::Theorem3EvenVisit,
            Theorem::Theorem3OddVisit => RtTheorem::Theorem3OddVisit,
            Theorem::Theorem4OddGap => RtTheorem::Theorem4OddGap,
            Theorem::Theorem4EvenGap => RtTheorem::Theorem4EvenGap,
        }
    }
}

/// Hypothesis selector for [`rt_simulate`]: true message is 0.
pub const RT_HYPOTHESIS_H0: u32 = 0;
/// Hypothesis selector for [`rt_simulate`]: true message is 1.
pub const RT_HYPOTHESIS_H1: u32 = 1;

/// Region classification. `b_index` is 0 when the band index is undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtRegionTag {
    pub side: RtSide,
    pub b_index: u32,
    pub in_r: bool,
    pub in_s: bool,
    pub above_diagonal: bool,
}

impl From<RegionTag> for RtRegionTag {
    fn from(t: RegionTag) -> Self {
        RtRegionTag {
            side: t.side.into(),
            b_index: t.b_index.unwrap_or(0),
            in_r: t.in_r,
            in_s: t.in_s,
            above_diagonal: t.above_diagonal,
        }
    }
}

/// One level of a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtState {
    pub level: u32,
    pub alpha: f64,
    pub beta: f64,
    pub log2_alpha: f64,
    pub log2_beta: f64,
    pub log2_l: f64,
    pub tag: RtRegionTag,
}

/// Dispatched bounds on `log2 P_N^-1` next to the exact value. `m` is 0
/// when no band index applies.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtBounds {
    pub exact: f64,
    pub lower: f64,
    pub lower_clamped: f64,
    pub upper: f64,
    pub log2_l0: f64,
    pub theorem: RtTheorem,
    pub height: u32,
    pub m: u32,
    pub ok: bool,
}

/// Monte Carlo error-rate estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtMcEstimate {
    pub error_rate: f64,
    pub errors: u64,
    pub trials: u64,
    pub std_err: f64,
    pub predicted: f64,
    pub z: f64,
}

/// Opaque handle to a computed trajectory.
pub struct RtTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

/// Runs `f`, records its error text, and turns panics into a status.
fn guard(f: impl FnOnce() -> Result<(), RtStatus>) -> RtStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RtStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            RtStatus::Panic
        }
    }
}

fn fail(e: Error) -> RtStatus {
    set_last_error(&e.to_string());
    RtStatus::from(&e)
}

fn null(name: &str) -> RtStatus {
    set_last_error(&format!("{name} is null"));
    RtStatus::NullPointer
}

fn pair(alpha: f64, beta: f64) -> Result<ErrorPair, RtStatus> {
    ErrorPair::new(alpha, beta).map_err(fail)
}

fn state_of(t: &Trajectory, index: usize) -> RtState {
    let s = &t.states[index];
    let (alpha, beta) = s.pair.values();
    RtState {
        level: s.level,
        alpha,
        beta,
        log2_alpha: s.pair.alpha.log2_p(),
        log2_beta: s.pair.beta.log2_p(),
        log2_l: t.log2_l[index],
        tag: s.tag.into(),
    }
}

/// Static description of a status code. Takes a plain integer so that
/// unknown codes are safe to pass. Never null.
#[no_mangle]
pub extern "C" fn rt_status_message(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer argument",
        2 => c"probability outside [0, 1]",
        3 => c"pair not inside alpha + beta < 1",
        4 => c"band index exceeds the cap",
        5 => c"trajectory did not enter the target region",
        6 => c"total error did not reach the target",
        7 => c"leaf count is not a power of two",
        8 => c"tree height has the wrong parity",
        9 => c"band index must be at least 2",
        10 => c"pair not in the invariant region R",
        11 => c"region classification is inconsistent",
        12 => c"invalid argument",
        13 => c"index out of range",
        14 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Detailed text of the last error on this thread, empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn rt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// One fusion step `(alpha, beta) -> f(alpha, beta)`.
///
/// # Safety
/// `out_alpha` and `out_beta` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_fuse(alpha: f64, beta: f64, out_alpha: *mut f64, out_beta: *mut f64) -> RtStatus {
    guard(|| {
        if out_alpha.is_null() {
            return Err(null("out_alpha"));
        }
        if out_beta.is_null() {
            return Err(null("out_beta"));
        }
        let (a, b) = fuse(pair(alpha, beta)?).values();
        *out_alpha = a;
        *out_beta = b;
        Ok(())
    })
}

/// Region classification of `(alpha, beta)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_classify(alpha: f64, beta: f64, out: *mut RtRegionTag) -> RtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = classify(&pair(alpha, beta)?).into();
        Ok(())
    })
}

/// Computes levels `0..=levels` from `(alpha0, beta0)`. Release the handle
/// with [`rt_trajectory_free`].
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_trajectory_new(
    alpha0: f64,
    beta0: f64,
    levels: u32,
    out: *mut *mut RtTrajectory,
) -> RtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = evolve(pair(alpha0, beta0)?, levels);
        *out = Box::into_raw(Box::new(RtTrajectory { inner }));
        Ok(())
    })
}

/// Number of states, `levels + 1`. Zero for a null handle.
///
/// # Safety
/// `t` must be null or a live handle from [`rt_trajectory_new`].
#[no_mangle]
pub unsafe extern "C" fn rt_trajectory_len(t: *const RtTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Copies state `index` into `out`.
///
/// # Safety
/// `t` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_trajectory_state(t: *const RtTrajectory, index: usize, out: *mut RtState) -> RtStatus {
    guard(|| {
        let Some(t) = t.as_ref() else {
            return Err(null("trajectory"));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        if index >= t.inner.len() {
            set_last_error(&format!("index {index} out of range for {} states", t.inner.len()));
            return Err(RtStatus::OutOfRange);
        }
        *out = state_of(&t.inner, index);
        Ok(())
    })
}

/// Releases a trajectory. Null is a no-op.
///
/// # Safety
/// `t` must be null or a handle from [`rt_trajectory_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_trajectory_free(t: *mut RtTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Exact `log2 P_N^-1` for a tree of the given height with the dispatched
/// bounds around it.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_sandwich_check(alpha0: f64, beta0: f64, height: u32, out: *mut RtBounds) -> RtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = sandwich_check(pair(alpha0, beta0)?, TreeSize::from_height(height)).map_err(fail)?;
        *out = RtBounds {
            exact: c.exact,
            lower: c.bound.lower,
            lower_clamped: c.bound.lower_clamped,
            upper: c.bound.upper,
            log2_l0: c.bound.log2_l0,
            theorem: c.bound.theorem.into(),
            height: c.bound.tree.height(),
            m: c.bound.m.unwrap_or(0),
            ok: c.ok,
        };
        Ok(())
    })
}

/// Smallest height whose total error `P_N` is at most `epsilon`.
///
/// # Safety
/// `out_height` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_min_sensors(alpha0: f64, beta0: f64, epsilon: f64, out_height: *mut u32) -> RtStatus {
    guard(|| {
        if out_height.is_null() {
            return Err(null("out_height"));
        }
        let tree = min_sensors_exact(pair(alpha0, beta0)?, epsilon).map_err(fail)?;
        *out_height = tree.height();
        Ok(())
    })
}

/// Monte Carlo estimate of the root error rate. `hypothesis` is
/// [`RT_HYPOTHESIS_H0`] or [`RT_HYPOTHESIS_H1`]. Results depend only on the
/// arguments, not on the thread count.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_simulate(
    alpha0: f64,
    beta0: f64,
    height: u32,
    trials: u64,
    seed: u64,
    hypothesis: u32,
    out: *mut RtMcEstimate,
) -> RtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let hypothesis = match hypothesis {
            RT_HYPOTHESIS_H0 => Hypothesis::H0,
            RT_HYPOTHESIS_H1 => Hypothesis::H1,
            other => return Err(fail(Error::InvalidArgument(format!("unknown hypothesis {other}")))),
        };
        let config = McConfig {
            pair0: pair(alpha0, beta0)?,
            height,
            trials,
            seed,
            hypothesis,
        };
        let e = simulate(&config).map_err(fail)?;
        *out = RtMcEstimate {
            error_rate: e.error_rate,
            errors: e.errors,
            trials: e.trials,
            std_err: e.std_err,
            predicted: e.predicted,
            z: e.z_score(),
        };
        Ok(())
    })
}
