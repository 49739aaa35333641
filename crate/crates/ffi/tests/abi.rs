use std::ffi::{CStr, CString};
use std::ptr;

use coagrip_ffi::*;

fn last_error() -> String {
    let p = coagrip_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn simulation_lifecycle() {
    let cfg = CString::new("H = 20\nM = 400\nT = 0.1\nMtau = 400").unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(coagrip_simulation_new(cfg.as_ptr(), &mut sim), CoagripStatus::Ok);
        let len = coagrip_simulation_len(sim);
        assert_eq!(len, 401);
        let mut m = CoagripMoments::default();
        assert_eq!(coagrip_simulation_moments(sim, &mut m), CoagripStatus::Ok);
        assert_eq!((m.tau, m.delta), (0.0, 0.2));
        assert_eq!(coagrip_simulation_step(sim, 400), CoagripStatus::Ok);
        assert_eq!(coagrip_simulation_moments(sim, &mut m), CoagripStatus::Ok);
        assert!((m.tau - 0.1).abs() < 1e-12);
        assert!(m.n < 1.0 && m.v > 1.0 - 1e-3);

        let mut buf = vec![0.0; len];
        assert_eq!(coagrip_simulation_phi(sim, buf.as_mut_ptr(), len), CoagripStatus::Ok);
        assert!(buf[0] > 0.9 && buf[0] < 1.0);
        assert_eq!(coagrip_simulation_phi(sim, buf.as_mut_ptr(), 10), CoagripStatus::BufferTooSmall);
        assert!(last_error().contains("need 401"));
        coagrip_simulation_free(sim);
    }
}

#[test]
fn simulation_matches_oracle() {
    let cfg = CString::new("H = 20\nM = 1000\nT = 0.2\nMtau = 500").unwrap();
    let mut sim = ptr::null_mut();
    let mut oracle = ptr::null_mut();
    let params = coagrip_params_default();
    unsafe {
        assert_eq!(coagrip_simulation_new(cfg.as_ptr(), &mut sim), CoagripStatus::Ok);
        assert_eq!(coagrip_simulation_step(sim, 500), CoagripStatus::Ok);
        assert_eq!(coagrip_oracle_new(&params, &mut oracle), CoagripStatus::Ok);
        let (mut a, mut b) = (CoagripMoments::default(), CoagripMoments::default());
        let mut rate = 0.0;
        coagrip_simulation_moments(sim, &mut a);
        assert_eq!(coagrip_oracle_at(oracle, a.tau, &mut b, &mut rate), CoagripStatus::Ok);
        assert!((a.n - b.n).abs() < 1e-3 * b.n);
        assert!((a.v - b.v).abs() < 1e-3 * b.v);
        assert!((rate - b.n / b.v).abs() < 1e-12);
        coagrip_simulation_free(sim);
        coagrip_oracle_free(oracle);
    }
}

#[test]
fn errors_are_reported() {
    let mut sim = ptr::null_mut();
    let bad = CString::new("gamma = -1").unwrap();
    let typo = CString::new("gama = 1").unwrap();
    unsafe {
        assert_eq!(coagrip_simulation_new(bad.as_ptr(), &mut sim), CoagripStatus::InvalidArgument);
        assert!(last_error().contains("gamma"));
        assert_eq!(coagrip_simulation_new(typo.as_ptr(), &mut sim), CoagripStatus::InvalidArgument);
        assert!(last_error().contains("line 1"));
        assert!(sim.is_null());
        assert_eq!(coagrip_simulation_new(bad.as_ptr(), ptr::null_mut()), CoagripStatus::NullPointer);
        assert_eq!(coagrip_simulation_step(ptr::null_mut(), 1), CoagripStatus::NullPointer);
        assert_eq!(coagrip_simulation_len(ptr::null()), 0);
        coagrip_simulation_free(ptr::null_mut());
        coagrip_oracle_free(ptr::null_mut());

        let params = coagrip_params_default();
        let mut oracle = ptr::null_mut();
        assert_eq!(coagrip_oracle_new(&params, &mut oracle), CoagripStatus::Ok);
        let mut m = CoagripMoments::default();
        assert_eq!(coagrip_oracle_at(oracle, 1e9, &mut m, ptr::null_mut()), CoagripStatus::OracleDomain);
        coagrip_oracle_free(oracle);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(coagrip_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/coagrip.h")).unwrap();
    for name in [
        "coagrip_simulation_new",
        "coagrip_simulation_step",
        "coagrip_simulation_phi",
        "coagrip_oracle_at",
        "coagrip_last_error",
        "typedef struct CoagripSimulation CoagripSimulation",
        "COAGRIP_STATUS_NUMERICAL",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
