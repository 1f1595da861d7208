use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use layered_ra_ffi::*;

fn fig_config(copies: usize) -> *mut LraConfig {
    let arrivals = [3.0; 3];
    let rates = [1.0; 3];
    let mut cfg = ptr::null_mut();
    let status = unsafe {
        lra_config_new_target_sinr(60, 3, arrivals.as_ptr(), rates.as_ptr(), 10.0, 1.0, 1.0, copies, &mut cfg)
    };
    assert_eq!(status, LraStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { lra_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn single_layer_throughput_roundtrip() {
    let (a, p, r) = ([10.0], [2.0], [1.0]);
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(
            lra_config_new(10, 1, a.as_ptr(), p.as_ptr(), r.as_ptr(), 1.0, 1.0, 1, &mut cfg),
            LraStatus::Ok
        );
        let mut total = 0.0;
        let mut layer = [0.0];
        assert_eq!(lra_throughput(cfg, 0, layer.as_mut_ptr(), 1, &mut total), LraStatus::Ok);
        let expected = (-0.5f64).exp() * 10.0 * (-1f64).exp();
        assert!((total - expected).abs() < 1e-14);
        assert_eq!(layer[0], total);

        let mut phi = 0.0;
        assert_eq!(lra_capture_prob(cfg, 1, 0, &mut phi), LraStatus::Ok);
        assert!((phi - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(lra_capture_prob(cfg, 2, 0, &mut phi), LraStatus::InvalidArgument);
        lra_config_free(cfg);
    }
}

#[test]
fn powers_and_rate_optimization() {
    let cfg = fig_config(1);
    unsafe {
        assert_eq!(lra_config_num_layers(cfg), 3);
        let mut p = [0.0; 3];
        assert_eq!(lra_config_powers(cfg, p.as_mut_ptr(), 3), LraStatus::Ok);
        assert!(p[0] > p[1] && p[1] > p[2]);
        let mut small = [0.0; 2];
        assert_eq!(lra_config_powers(cfg, small.as_mut_ptr(), 2), LraStatus::BufferTooSmall);
        assert!(last_error().contains("needed"));

        let mut rates = [0.0; 3];
        let mut best = 0.0;
        assert_eq!(
            lra_optimize_rates(cfg, 0.0, 0, 0.0, 0, rates.as_mut_ptr(), 3, &mut best),
            LraStatus::Ok
        );
        assert_eq!(lra_config_set_rates(cfg, rates.as_ptr(), 3), LraStatus::Ok);
        let mut total = 0.0;
        assert_eq!(lra_throughput(cfg, 0, ptr::null_mut(), 0, &mut total), LraStatus::Ok);
        assert!((total - best).abs() < 1e-12);
        lra_config_free(cfg);
    }
}

#[test]
fn outage_and_simulation() {
    let cfg = fig_config(4);
    unsafe {
        let mut psi = [0.0; 3];
        let mut out = [0.0; 3];
        assert_eq!(lra_outage(cfg, psi.as_mut_ptr(), out.as_mut_ptr(), 3), LraStatus::Ok);
        assert_eq!(out[0], psi[0]);
        assert!(out[0] <= out[1] && out[1] <= out[2]);

        let settings = LraSimSettings {
            slots: 4096,
            seed: 3,
            workers: 1,
            reopen_blocked: 0,
        };
        let mut est = [LraEstimate::default(); 3];
        assert_eq!(lra_simulate_outage(cfg, &settings, est.as_mut_ptr(), 3), LraStatus::Ok);
        assert!(est.iter().all(|e| e.slots == 4096 && e.seed == 3 && (0.0..=1.0).contains(&e.mean)));

        let mut total = LraEstimate::default();
        assert_eq!(
            lra_simulate_throughput(cfg, &settings, ptr::null_mut(), 0, &mut total),
            LraStatus::Ok
        );
        assert!(total.mean > 0.0);
        let bad = LraSimSettings { slots: 0, ..settings };
        assert_eq!(
            lra_simulate_throughput(cfg, &bad, ptr::null_mut(), 0, &mut total),
            LraStatus::InvalidArgument
        );
        lra_config_free(cfg);
    }
}

#[test]
fn invalid_input_reports_errors() {
    let (a, p, r) = ([1.0, 1.0], [1.0, 2.0], [1.0, 1.0]);
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(
            lra_config_new(0, 2, a.as_ptr(), p.as_ptr(), r.as_ptr(), 1.0, 1.0, 1, &mut cfg),
            LraStatus::InvalidArgument
        );
        assert!(cfg.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            lra_config_new(10, 2, ptr::null(), p.as_ptr(), r.as_ptr(), 1.0, 1.0, 1, &mut cfg),
            LraStatus::NullPointer
        );
        assert!(last_error().contains("arrivals"));
        let mut total = 0.0;
        assert_eq!(lra_throughput(ptr::null(), 0, ptr::null_mut(), 0, &mut total), LraStatus::NullPointer);
        assert_eq!(lra_config_num_layers(ptr::null()), 0);
        lra_config_free(ptr::null_mut());
    }
}

#[test]
fn scalar_helpers() {
    assert_eq!(lra_snr_gap(1.0), 1.0);
    let mut pc = 0.0;
    unsafe {
        assert_eq!(lra_collision_prob(2, 10, 1, &mut pc), LraStatus::Ok);
        assert!((pc - 0.1).abs() < 1e-15);
        assert_eq!(lra_collision_prob(2, 10, 11, &mut pc), LraStatus::InvalidArgument);
        let v = CStr::from_ptr(lra_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/layered_ra.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["lra_config_new", "lra_config_free", "lra_simulate_outage", "LRA_STATUS_BUFFER_TOO_SMALL"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"layered_ra.h\"\nint main(void) { LraConfig *c = NULL; lra_config_free(c); return LRA_STATUS_OK; }\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    assert!(status.success());
}
