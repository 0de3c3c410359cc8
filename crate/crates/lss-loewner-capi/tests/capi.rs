//! Exercises the C ABI the way a foreign binding would: through the exported
//! extern "C" functions, strings and raw buffers only.

use std::ffi::{CStr, CString};

use lss_loewner::formats;
use lss_loewner::testing::evaporator;
use lss_loewner_capi::*;

fn model_json() -> CString {
    CString::new(formats::model_to_json(&evaporator())).unwrap()
}

fn tuples_json() -> CString {
    let spec = formats::TupleSpec {
        right: vec![[-1.5, 0.0], [1.0, 0.0], [-2.0, 0.0], [1.5, 0.0]],
        left: vec![[2.0, 0.0], [0.0, 0.0], [0.5, 0.0], [-0.5, 0.0]],
        layout: formats::TupleLayout::TwoMode { groups: vec![2], groups_left: None },
    };
    CString::new(formats::tuple_spec_to_json(&spec)).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lss_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn model_parse_query_roundtrip() {
    unsafe {
        let json = model_json();
        let h = lss_model_from_json(json.as_ptr());
        assert!(!h.is_null(), "{}", last_error());
        assert_eq!(lss_model_num_modes(h), 2);
        assert_eq!(lss_model_dim(h, 1), 2);
        assert_eq!(lss_model_dim(h, 3), 0);
        assert_eq!(lss_model_validate(h), 0);

        let back = lss_model_to_json(h);
        assert!(!back.is_null());
        let text = CStr::from_ptr(back).to_str().unwrap().to_owned();
        lss_string_free(back);
        let reparsed = formats::model_from_json(&text).unwrap();
        assert_eq!(reparsed, evaporator());
        lss_model_free(h);
    }
}

#[test]
fn parse_failure_returns_null_with_message() {
    unsafe {
        let bad = CString::new("{ not json").unwrap();
        let h = lss_model_from_json(bad.as_ptr());
        assert!(h.is_null());
        assert!(last_error().contains("model JSON"), "{}", last_error());
    }
}

#[test]
fn transfer_evaluation_matches_library() {
    unsafe {
        let json = model_json();
        let h = lss_model_from_json(json.as_ptr());
        // H_{2,1}(0, 2) = 0.4 on the reference system
        let modes = [2u32, 1u32];
        let re = [0.0, 2.0];
        let im = [0.0, 0.0];
        let (mut vr, mut vi) = (0.0f64, 0.0f64);
        let status = lss_eval_transfer(h, modes.as_ptr(), 2, re.as_ptr(), im.as_ptr(), &mut vr, &mut vi);
        assert_eq!(status, LssStatus::Ok, "{}", last_error());
        assert!((vr - 0.4).abs() < 1e-12 && vi.abs() < 1e-14, "{vr} + {vi}i");

        // a resolvent collision surfaces as a numerical error
        let re_bad = [0.0, -1.0];
        let status = lss_eval_transfer(h, modes.as_ptr(), 2, re_bad.as_ptr(), im.as_ptr(), &mut vr, &mut vi);
        assert_eq!(status, LssStatus::NumericalError);
        assert!(last_error().contains("singular resolvent"));
        lss_model_free(h);
    }
}

#[test]
fn frequency_response_buffers() {
    unsafe {
        let json = model_json();
        let h = lss_model_from_json(json.as_ptr());
        let omega = [0.0f64, 1.0];
        let mut re = [0.0f64; 2];
        let mut im = [0.0f64; 2];
        let status = lss_freq_response(h, 1, omega.as_ptr(), 2, re.as_mut_ptr(), im.as_mut_ptr());
        assert_eq!(status, LssStatus::Ok);
        // DC gain of mode 1: C_1 (-A_1)^{-1} B_1 = 1
        assert!((re[0] - 1.0).abs() < 1e-12 && im[0].abs() < 1e-14);
        lss_model_free(h);
    }
}

#[test]
fn loewner_reduce_recovers_reference_entries() {
    unsafe {
        let json = model_json();
        let h = lss_model_from_json(json.as_ptr());
        let tuples = tuples_json();
        let reduced = lss_loewner_reduce(h, tuples.as_ptr(), 1e-12, 1, 0);
        assert!(!reduced.is_null(), "{}", last_error());
        let out = lss_model_to_json(reduced);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        lss_string_free(out);
        let model = formats::model_from_json(&text).unwrap();
        assert!((model.mode(2).e[(1, 1)] - (-53.0 / 360.0)).abs() < 1e-10);
        lss_model_free(reduced);
        lss_model_free(h);
    }
}

#[test]
fn bt_reduce_and_order_errors() {
    unsafe {
        let json = model_json();
        let h = lss_model_from_json(json.as_ptr());
        let red = lss_bt_reduce(h, 1);
        assert!(!red.is_null(), "{}", last_error());
        assert_eq!(lss_model_dim(red, 1), 1);
        lss_model_free(red);
        let too_big = lss_bt_reduce(h, 7);
        assert!(too_big.is_null());
        assert!(last_error().contains("rank"), "{}", last_error());
        lss_model_free(h);
    }
}

#[test]
fn simulate_and_walk_trajectory() {
    unsafe {
        let json = model_json();
        let h = lss_model_from_json(json.as_ptr());
        let modes = [1u32, 2u32];
        let durations = [0.5f64, 0.5];
        let input = CString::new("step:1").unwrap();
        let traj = lss_simulate(h, modes.as_ptr(), durations.as_ptr(), 2, input.as_ptr(), 0.01);
        assert!(!traj.is_null(), "{}", last_error());
        let n = lss_trajectory_len(traj);
        assert_eq!(n, 101);
        let t = std::slice::from_raw_parts(lss_trajectory_times(traj), n);
        let y = std::slice::from_raw_parts(lss_trajectory_outputs(traj), n);
        let m = std::slice::from_raw_parts(lss_trajectory_modes(traj), n);
        assert_eq!(t[0], 0.0);
        assert!((t[n - 1] - 1.0).abs() < 1e-12);
        assert_eq!(y[0], 0.0);
        assert!(y[n - 1].is_finite() && y[n - 1] > 0.0);
        assert_eq!(m[0], 1);
        assert_eq!(m[n - 1], 2);
        lss_trajectory_free(traj);
        lss_model_free(h);
    }
}
