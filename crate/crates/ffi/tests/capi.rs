use std::ffi::CStr;
use std::ptr;

use streammoments_ffi::*;

fn zipf_like(n: u64, m: usize) -> Vec<u64> {
    (0..m as u64).map(|i| 1 + (i * i + 7 * i) % n.min(1 + i / 3 + 1)).collect()
}

#[test]
fn f2_handle_lifecycle() {
    let items: Vec<u64> = (0..20_000u64).map(|i| 1 + i % 50).collect();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(sm_f2_new(0.1, 0.1, 50, &mut h), SmStatus::SmOk);
        let mut y = 0.0;
        assert_eq!(sm_f2_estimate(h, &mut y), SmStatus::SmInsufficientData);
        assert_eq!(sm_f2_update(h, items.as_ptr(), items.len()), SmStatus::SmOk);
        assert_eq!(sm_f2_estimate(h, &mut y), SmStatus::SmOk);
        let mut exact = 0.0;
        assert_eq!(sm_exact_moment(items.as_ptr(), items.len(), 2.0, &mut exact), SmStatus::SmOk);
        assert_eq!(exact, 50.0 * 400.0 * 400.0);
        assert!((y - exact).abs() / exact < 0.1);
        assert!(sm_f2_bits(h) > 0);
        sm_f2_free(h);
    }
}

#[test]
fn fp_handle_lifecycle() {
    let items = zipf_like(64, 50_000);
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(sm_fp_new(1.5, 0.25, 0.1, 64, 9, 1, &mut h), SmStatus::SmOk);
        assert_eq!(sm_fp_update(h, items.as_ptr(), items.len()), SmStatus::SmOk);
        let mut v = 0.0;
        let st = sm_fp_estimate(h, &mut v);
        assert!(st == SmStatus::SmOk || st == SmStatus::SmNoEstimate);
        if st == SmStatus::SmOk {
            assert!(v.is_finite() && v > 0.0);
        }
        assert!(sm_fp_peak_bits(h) > 0);
        sm_fp_free(h);
    }
}

#[test]
fn rejects_bad_arguments() {
    let mut f2 = ptr::null_mut();
    let mut fp = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(sm_f2_new(0.1, 0.1, 10, ptr::null_mut()), SmStatus::SmNullPointer);
        assert_eq!(sm_f2_new(1.5, 0.1, 10, &mut f2), SmStatus::SmInvalidArgument);
        assert!(f2.is_null());
        assert_eq!(sm_fp_new(2.5, 0.25, 0.1, 10, 1, 0, &mut fp), SmStatus::SmInvalidArgument);
        assert!(fp.is_null());
        assert_eq!(sm_f2_update(ptr::null_mut(), ptr::null(), 0), SmStatus::SmNullPointer);
        assert_eq!(sm_fp_estimate(ptr::null(), &mut v), SmStatus::SmNullPointer);
        assert_eq!(sm_exact_moment(ptr::null(), 3, 1.0, &mut v), SmStatus::SmNullPointer);
        assert_eq!(sm_exact_moment(ptr::null(), 0, -1.0, &mut v), SmStatus::SmInvalidArgument);
        assert_eq!(sm_f2_bits(ptr::null()), 0);
        sm_f2_free(ptr::null_mut());
        sm_fp_free(ptr::null_mut());

        assert_eq!(sm_f2_new(0.1, 0.1, 10, &mut f2), SmStatus::SmOk);
        let bad = [1u64, 11];
        assert_eq!(sm_f2_update(f2, bad.as_ptr(), 2), SmStatus::SmItemOutOfRange);
        sm_f2_free(f2);
    }
}

#[test]
fn deterministic_is_repeatable() {
    let items = zipf_like(256, 200_000);
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(sm_fp_deterministic(0.5, 0.25, 0.1, 256, items.as_ptr(), items.len(), 1, &mut a), SmStatus::SmOk);
        assert_eq!(sm_fp_deterministic(0.5, 0.25, 0.1, 256, items.as_ptr(), items.len(), 1, &mut b), SmStatus::SmOk);
    }
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn status_messages_are_c_strings() {
    for s in [SmStatus::SmOk, SmStatus::SmNoEstimate, SmStatus::SmInternal] {
        let msg = unsafe { CStr::from_ptr(sm_status_message(s)) };
        assert!(!msg.to_str().unwrap().is_empty());
    }
}
