use std::ffi::{CStr, CString};
use std::ptr;

use mpsplit_ffi::*;

fn last_error() -> String {
    let p = mps_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn preset_run_and_query() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let name = CString::new("scenario2").unwrap();
        assert_eq!(mps_config_preset(name.as_ptr(), 100e6, &mut cfg), MpsStatus::Ok);
        assert_eq!(mps_config_set_seed(cfg, 3), MpsStatus::Ok);
        let key = CString::new("scenario.simulation_time_s").unwrap();
        let value = CString::new("25").unwrap();
        assert_eq!(mps_config_set(cfg, key.as_ptr(), value.as_ptr()), MpsStatus::Ok);

        let mut run = ptr::null_mut();
        assert_eq!(mps_run(cfg, &mut run), MpsStatus::Ok);
        let mut n = 0usize;
        assert_eq!(mps_run_interval_count(run, &mut n), MpsStatus::Ok);
        assert_eq!(n, 50);

        let mut sp1 = 0.0;
        let mut sp2 = 0.0;
        assert_eq!(mps_run_mean_latency(run, MpsSolution::SinglePath1, 0, &mut sp1), MpsStatus::Ok);
        assert_eq!(mps_run_mean_latency(run, MpsSolution::SinglePath2, 0, &mut sp2), MpsStatus::Ok);
        assert!(sp1 > sp2 && sp2 > 0.0);
        assert_eq!(mps_run_mean_latency(run, MpsSolution::MultiPath, 5, &mut sp1), MpsStatus::InvalidArgument);

        let dir = tempfile::tempdir().unwrap();
        let out = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(mps_run_export(run, out.as_ptr()), MpsStatus::Ok);
        assert!(dir.path().join("summary.json").is_file());

        mps_run_free(run);
        mps_config_free(cfg);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new("scenario7").unwrap();
        assert_eq!(mps_config_preset(bad.as_ptr(), 100e6, &mut cfg), MpsStatus::Config);
        assert!(last_error().contains("scenario7"));
        assert!(cfg.is_null());

        assert_eq!(mps_config_preset(ptr::null(), 100e6, &mut cfg), MpsStatus::NullPointer);

        let name = CString::new("scenario1").unwrap();
        assert_eq!(mps_config_preset(name.as_ptr(), 100e6, &mut cfg), MpsStatus::Ok);
        let key = CString::new("radio.total_bandwidth_hz").unwrap();
        let value = CString::new("-1").unwrap();
        assert_eq!(mps_config_set(cfg, key.as_ptr(), value.as_ptr()), MpsStatus::Config);
        assert!(last_error().contains("total_bandwidth_hz"));

        let missing = CString::new("/nonexistent/x.toml").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(mps_config_load(missing.as_ptr(), &mut other), MpsStatus::Config);

        mps_config_free(cfg);
        mps_config_free(ptr::null_mut());
        mps_run_free(ptr::null_mut());
    }
}

#[test]
fn solve_interval_balances_symmetric_paths() {
    let bw = [50e6, 50e6];
    let g = [1e6, 1e6];
    let pkts = [100u64, 20];
    let sizes = [800u64, 2400];
    let gbr = [120e6, 120e6, 200e6, 200e6];
    let mut alphas = [0.0; 2];
    let (mut p1, mut obj) = (0.0, 0.0);
    let status = unsafe {
        mps_solve_interval(
            bw.as_ptr(),
            g.as_ptr(),
            0.2,
            2,
            pkts.as_ptr(),
            sizes.as_ptr(),
            gbr.as_ptr(),
            alphas.as_mut_ptr(),
            &mut p1,
            &mut obj,
        )
    };
    assert_eq!(status, MpsStatus::Ok);
    assert!((p1 - 0.1).abs() < 1e-6, "{p1}");
    for a in alphas {
        assert!((a - 0.5).abs() < 1e-6);
    }
    // Half of each load on each path at rate B log2(1 + g P/2).
    let r = 50e6 * (1.0f64 + 1e6 * 0.1).log2();
    let expected = 0.5 * 80_000.0 * (1.0 / r + 1.0 / 120e6) + 0.5 * 48_000.0 * (1.0 / r + 1.0 / 200e6);
    assert!((obj - expected).abs() <= 1e-9 * expected);

    let zero = [0.0, 120e6, 200e6, 200e6];
    let status = unsafe {
        mps_solve_interval(
            bw.as_ptr(),
            g.as_ptr(),
            0.2,
            2,
            pkts.as_ptr(),
            sizes.as_ptr(),
            zero.as_ptr(),
            alphas.as_mut_ptr(),
            &mut p1,
            &mut obj,
        )
    };
    assert_eq!(status, MpsStatus::InvalidArgument);
}
