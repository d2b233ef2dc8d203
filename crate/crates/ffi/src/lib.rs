//! C interface to `selftest`.
//!
//! Every fallible function returns a [`SelftestStatus`]; on anything other
//! than `SELFTEST_STATUS_OK` a message is available from
//! [`selftest_last_error_message`] on the same thread. Objects cross the
//! boundary as opaque handles that the caller releases with the matching
//! `_free` function. Panics are caught and reported as `SELFTEST_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use selftest::games::{classical_value, game_coefficients, quantum_value};
use selftest::geometry::{angles_from_correlations, canonicalize, chsh_max, classify, AnglePoint, Classification, CorrelationPoint};
use selftest::realization::{build_realization, control_operators, ControlVariant};
use selftest::sdp::{assemble_sdp, solve_lower_bound, CriterionConfig, SdpError, SolveStatus};
use selftest::simulator::rho_swap_fidelity;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotSelfTesting = 3,
    NumericalFailure = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestTag {
    SelfTesting = 0,
    DegenerateLocal = 1,
    NotOnSingletBoundary = 2,
}

/// Outcome of [`selftest_classify`]. `condition_*` and `residual` are set
/// for self-testing points; `degenerate_case` is 1 to 7 for cases (i) to
/// (vii) and 0 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestClassification {
    pub tag: SelftestTag,
    pub condition_i: i32,
    pub condition_j: i32,
    pub condition_xi: i32,
    pub residual: f64,
    pub degenerate_case: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestVariant {
    Direct = 0,
    Rotated = 1,
}

/// Built-in criteria. The `ALPHA01_*` presets are four-setting criteria at
/// `θ = π/2, α00 = π/4` with the named `α01`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestPreset {
    Chsh = 0,
    MayersYao = 1,
    Alpha01HalfPi = 2,
    Alpha01SevenPiOver12 = 3,
    Alpha01TwoPiOver3 = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestSolveStatus {
    Optimal = 0,
    NearOptimal = 1,
    Infeasible = 2,
    NumericalFailure = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestBound {
    pub epsilon: f64,
    pub bound: f64,
    pub primal: f64,
    pub gap: f64,
    pub status: SelftestSolveStatus,
}

/// Opaque correlation point.
pub struct SelftestPoint(CorrelationPoint);

/// Opaque robustness criterion.
pub struct SelftestCriterion(CriterionConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (SelftestStatus, String)>) -> SelftestStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SelftestStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SelftestStatus::Panic
        }
    }
}

fn null() -> (SelftestStatus, String) {
    (SelftestStatus::NullPointer, "null pointer argument".into())
}

fn invalid(e: impl ToString) -> (SelftestStatus, String) {
    (SelftestStatus::InvalidArgument, e.to_string())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn selftest_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn selftest_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn read4(p: *const f64) -> Result<[f64; 4], (SelftestStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    let mut v = [0.0; 4];
    ptr::copy_nonoverlapping(p, v.as_mut_ptr(), 4);
    Ok(v)
}

/// Creates a point from correlators ordered `(E00, E01, E10, E11)`.
///
/// # Safety
/// `e` must point to four readable doubles and `out` to a writable handle.
#[no_mangle]
pub unsafe extern "C" fn selftest_point_new(e: *const f64, out: *mut *mut SelftestPoint) -> SelftestStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let p = CorrelationPoint::from_flat(read4(e)?).map_err(invalid)?;
        *out = Box::into_raw(Box::new(SelftestPoint(p)));
        Ok(())
    })
}

/// Creates a point from angles `α_xy = acos E_xy` ordered `(α00, α01, α10, α11)`.
///
/// # Safety
/// As for [`selftest_point_new`].
#[no_mangle]
pub unsafe extern "C" fn selftest_point_from_angles(alpha: *const f64, out: *mut *mut SelftestPoint) -> SelftestStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let a = AnglePoint::from_flat(read4(alpha)?).map_err(invalid)?;
        *out = Box::into_raw(Box::new(SelftestPoint(a.correlators())));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn selftest_point_free(p: *mut SelftestPoint) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live point handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn selftest_classify(p: *const SelftestPoint, tol: f64, out: *mut SelftestClassification) -> SelftestStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return Err(null());
        };
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(invalid("tolerance must be a finite nonnegative number"));
        }
        let mut c = SelftestClassification {
            tag: SelftestTag::NotOnSingletBoundary,
            condition_i: -1,
            condition_j: -1,
            condition_xi: 0,
            residual: f64::NAN,
            degenerate_case: 0,
        };
        match classify(&p.0, tol) {
            Classification::SelfTesting { condition, .. } => {
                c.tag = SelftestTag::SelfTesting;
                c.condition_i = condition.i as i32;
                c.condition_j = condition.j as i32;
                c.condition_xi = i32::from(condition.xi);
                c.residual = condition.residual;
            }
            Classification::DegenerateLocal { case } => {
                c.tag = SelftestTag::DegenerateLocal;
                c.degenerate_case = ["i", "ii", "iii", "iv", "v", "vi", "vii"].iter().position(|r| *r == case.roman()).map_or(0, |k| k as i32 + 1);
            }
            Classification::NotOnSingletBoundary => {}
        }
        *out = c;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live point handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn selftest_chsh_max(p: *const SelftestPoint, out: *mut f64) -> SelftestStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return Err(null());
        };
        *out = chsh_max(&p.0);
        Ok(())
    })
}

/// Canonical angles `(α00, α01, α10, α11)` of a self-testing point after
/// relabeling.
///
/// # Safety
/// `p` must be a live point handle and `alpha_out` must point to four
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn selftest_canonical_angles(p: *const SelftestPoint, tol: f64, alpha_out: *mut f64) -> SelftestStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), alpha_out.is_null()) else {
            return Err(null());
        };
        let (_, q) = canonicalize(&p.0, tol).map_err(|e| (SelftestStatus::NotSelfTesting, e.to_string()))?;
        let a = angles_from_correlations(&q).flat();
        ptr::copy_nonoverlapping(a.as_ptr(), alpha_out, 4);
        Ok(())
    })
}

fn canonical_angles(alpha: [f64; 4]) -> Result<AnglePoint, (SelftestStatus, String)> {
    let a = AnglePoint::from_flat(alpha).map_err(invalid)?;
    if !a.is_canonical() {
        return Err((SelftestStatus::NotSelfTesting, "angles do not satisfy alpha01 = alpha00 + alpha10 + alpha11".into()));
    }
    Ok(a)
}

/// Swap fidelity of the ideal qubit realization of canonical angles.
///
/// # Safety
/// `alpha` must point to four readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn selftest_ideal_fidelity(alpha: *const f64, variant: SelftestVariant, out: *mut f64) -> SelftestStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let a = canonical_angles(read4(alpha)?)?;
        let variant = match variant {
            SelftestVariant::Direct => ControlVariant::Direct,
            SelftestVariant::Rotated => ControlVariant::Rotated,
        };
        let r = build_realization(&a).map_err(invalid)?;
        let c = control_operators(&a, variant).map_err(invalid)?;
        let m = c.concretize(&r).map_err(invalid)?;
        let (_, f) = rho_swap_fidelity(r.state(), &m, &c.target()).map_err(|e| (SelftestStatus::NumericalFailure, e.to_string()))?;
        *out = f;
        Ok(())
    })
}

/// Tangent XOR game of canonical angles: coefficients `(f00, f01, f10, f11)`
/// and its classical and quantum values. `classical` and `quantum` may be
/// NULL.
///
/// # Safety
/// `alpha` must point to four readable doubles, `f_out` to four writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn selftest_game(alpha: *const f64, f_out: *mut f64, classical: *mut f64, quantum: *mut f64) -> SelftestStatus {
    guard(|| {
        if f_out.is_null() {
            return Err(null());
        }
        let a = canonical_angles(read4(alpha)?)?;
        let g = game_coefficients(&a).map_err(invalid)?;
        ptr::copy_nonoverlapping(g.flat().as_ptr(), f_out, 4);
        if !classical.is_null() {
            *classical = classical_value(&g);
        }
        if !quantum.is_null() {
            *quantum = quantum_value(&g);
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn selftest_criterion_preset(preset: SelftestPreset, out: *mut *mut SelftestCriterion) -> SelftestStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let all = selftest::sdp::fig5_presets(0.0);
        let cfg = match preset {
            SelftestPreset::Alpha01HalfPi => all[0].clone(),
            SelftestPreset::Alpha01SevenPiOver12 => all[1].clone(),
            SelftestPreset::Alpha01TwoPiOver3 => all[2].clone(),
            SelftestPreset::Chsh => CriterionConfig::chsh(0.0),
            SelftestPreset::MayersYao => CriterionConfig::mayers_yao(0.0),
        };
        *out = Box::into_raw(Box::new(SelftestCriterion(cfg)));
        Ok(())
    })
}

/// Four-setting criterion at canonical angles.
///
/// # Safety
/// `alpha` must point to four readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn selftest_criterion_from_angles(alpha: *const f64, out: *mut *mut SelftestCriterion) -> SelftestStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let a = canonical_angles(read4(alpha)?)?;
        let cfg = CriterionConfig::four_setting(a, 0.0).map_err(invalid)?;
        *out = Box::into_raw(Box::new(SelftestCriterion(cfg)));
        Ok(())
    })
}

/// # Safety
/// `c` must be NULL or a live criterion handle.
#[no_mangle]
pub unsafe extern "C" fn selftest_criterion_free(c: *mut SelftestCriterion) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Certified lower bound on the swap fidelity at imperfection `epsilon`.
/// A bound with solve status `NUMERICAL_FAILURE` is still valid, only
/// loose; the call then returns `SELFTEST_STATUS_OK` with that status set.
///
/// # Safety
/// `c` must be a live criterion handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn selftest_bound(c: *const SelftestCriterion, epsilon: f64, out: *mut SelftestBound) -> SelftestStatus {
    guard(|| {
        let (Some(c), false) = (c.as_ref(), out.is_null()) else {
            return Err(null());
        };
        let cfg = c.0.with_epsilon(epsilon);
        cfg.validate().map_err(invalid)?;
        let result = assemble_sdp(&cfg).and_then(|i| solve_lower_bound(&i)).map_err(|e| match e {
            SdpError::InvalidConfig(_) => invalid(e),
            _ => (SelftestStatus::NumericalFailure, e.to_string()),
        })?;
        *out = SelftestBound {
            epsilon: result.epsilon,
            bound: result.bound,
            primal: result.primal,
            gap: result.gap,
            status: match result.status {
                SolveStatus::Optimal => SelftestSolveStatus::Optimal,
                SolveStatus::NearOptimal => SelftestSolveStatus::NearOptimal,
                SolveStatus::Infeasible => SelftestSolveStatus::Infeasible,
                SolveStatus::NumericalFailure => SelftestSolveStatus::NumericalFailure,
            },
        };
        Ok(())
    })
}
