use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::ffi::CStr;
use std::ptr;

use selftest_ffi::*;

fn last_error() -> String {
    let p = selftest_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn point_lifecycle_and_classification() {
    let h = FRAC_1_SQRT_2;
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(selftest_point_new([h, h, h, -h].as_ptr(), &mut p), SelftestStatus::Ok);
        let mut c = std::mem::zeroed::<SelftestClassification>();
        assert_eq!(selftest_classify(p, 1e-9, &mut c), SelftestStatus::Ok);
        assert_eq!(c.tag, SelftestTag::SelfTesting);
        assert_eq!((c.condition_i, c.condition_j, c.condition_xi), (1, 1, 1));

        let mut s = 0.0;
        assert_eq!(selftest_chsh_max(p, &mut s), SelftestStatus::Ok);
        assert!((s - 2.0 * 2f64.sqrt()).abs() <= 1e-12);

        let mut alpha = [0.0; 4];
        assert_eq!(selftest_canonical_angles(p, 1e-9, alpha.as_mut_ptr()), SelftestStatus::Ok);
        assert!((alpha[1] - alpha[0] - alpha[2] - alpha[3]).abs() <= 1e-12);
        selftest_point_free(p);
    }
}

#[test]
fn degenerate_and_rejected_points() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(selftest_point_new([1.0, 0.0, 0.0, 1.0].as_ptr(), &mut p), SelftestStatus::Ok);
        let mut c = std::mem::zeroed::<SelftestClassification>();
        assert_eq!(selftest_classify(p, 1e-9, &mut c), SelftestStatus::Ok);
        assert_eq!((c.tag, c.degenerate_case), (SelftestTag::DegenerateLocal, 3));
        let mut alpha = [0.0; 4];
        assert_eq!(selftest_canonical_angles(p, 1e-9, alpha.as_mut_ptr()), SelftestStatus::NotSelfTesting);
        assert!(!last_error().is_empty());
        selftest_point_free(p);

        let mut q = ptr::null_mut();
        assert_eq!(selftest_point_new([2.0, 0.0, 0.0, 1.0].as_ptr(), &mut q), SelftestStatus::InvalidArgument);
        assert!(q.is_null());
        assert!(!last_error().is_empty());
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(selftest_point_new(ptr::null(), &mut p), SelftestStatus::NullPointer);
        assert_eq!(selftest_chsh_max(ptr::null(), ptr::null_mut()), SelftestStatus::NullPointer);
        assert_eq!(selftest_bound(ptr::null(), 0.0, ptr::null_mut()), SelftestStatus::NullPointer);
        selftest_point_free(ptr::null_mut());
        selftest_criterion_free(ptr::null_mut());
    }
    assert!(!last_error().is_empty());
}

#[test]
fn ideal_fidelity_and_game() {
    let alpha = [FRAC_PI_4, 3.0 * FRAC_PI_4, FRAC_PI_4, FRAC_PI_4];
    unsafe {
        for v in [SelftestVariant::Direct, SelftestVariant::Rotated] {
            let mut f = 0.0;
            assert_eq!(selftest_ideal_fidelity(alpha.as_ptr(), v, &mut f), SelftestStatus::Ok);
            assert!((f - 1.0).abs() <= 1e-9);
        }
        let (mut g, mut c, mut q) = ([0.0; 4], 0.0, 0.0);
        assert_eq!(selftest_game(alpha.as_ptr(), g.as_mut_ptr(), &mut c, &mut q), SelftestStatus::Ok);
        assert!((q - 4.0).abs() <= 1e-6 && c < q);

        let off = [0.3, 0.4, 0.5, 0.6];
        let mut f = 0.0;
        assert_eq!(selftest_ideal_fidelity(off.as_ptr(), SelftestVariant::Direct, &mut f), SelftestStatus::NotSelfTesting);
    }
}

#[test]
fn bounds_through_handles() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(selftest_criterion_preset(SelftestPreset::Chsh, &mut c), SelftestStatus::Ok);
        let mut b = std::mem::zeroed::<SelftestBound>();
        assert_eq!(selftest_bound(c, 0.01, &mut b), SelftestStatus::Ok);
        assert_eq!(b.status, SelftestSolveStatus::Optimal);
        assert!((b.bound - 0.9455692).abs() <= 1e-6, "{b:?}");
        assert!(b.bound <= b.primal + 1e-9);
        assert_eq!(selftest_bound(c, -1.0, &mut b), SelftestStatus::InvalidArgument);
        selftest_criterion_free(c);

        let alpha = [FRAC_PI_4, 7.0 * PI / 12.0, FRAC_PI_2 - FRAC_PI_4, 7.0 * PI / 12.0 - FRAC_PI_2];
        let mut c = ptr::null_mut();
        assert_eq!(selftest_criterion_from_angles(alpha.as_ptr(), &mut c), SelftestStatus::Ok);
        assert_eq!(selftest_bound(c, 0.0, &mut b), SelftestStatus::Ok);
        assert!(b.bound >= 0.999 && b.bound <= 1.0 + 1e-9, "{b:?}");
        selftest_criterion_free(c);
    }
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(selftest_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/selftest.h")).unwrap();
    for sym in [
        "SELFTEST_H",
        "typedef struct SelftestPoint SelftestPoint",
        "SELFTEST_STATUS_NUMERICAL_FAILURE",
        "selftest_point_new",
        "selftest_classify",
        "selftest_bound",
        "selftest_last_error_message",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}
