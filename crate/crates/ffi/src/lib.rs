//! C ABI over `layered-ra`.
//!
//! Configurations live behind an opaque `LraConfig` handle created by
//! `lra_config_new*` and released with `lra_config_free`. Every fallible call
//! returns an `LraStatus`; on failure the message can be fetched with
//! `lra_last_error_message`. Output arrays are caller-allocated and sized by
//! the layer count.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use layered_ra::model::{collision_prob, snr_gap};
use layered_ra::optimize::{optimize_rates, SearchSettings};
use layered_ra::outage::outage;
use layered_ra::sim::{estimate_outage, estimate_throughput, BlockingRule, EstimatorOutput, SimSettings};
use layered_ra::throughput::{capture_prob, throughput, CaptureModel};
use layered_ra::{LayerParams, SystemConfig, TargetSinr};

/// Opaque system configuration.
pub struct LraConfig {
    inner: SystemConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LraStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LraSimSettings {
    pub slots: u64,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub workers: u32,
    /// Non-zero lets cancelled channels re-open for upper layers.
    pub reopen_blocked: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LraEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub slots: u64,
    pub seed: u64,
}

impl From<&EstimatorOutput> for LraEstimate {
    fn from(e: &EstimatorOutput) -> Self {
        Self {
            mean: e.mean,
            std_error: e.std_error,
            slots: e.slots,
            seed: e.seed,
        }
    }
}

struct Failure(LraStatus, String);

impl From<layered_ra::ModelError> for Failure {
    fn from(e: layered_ra::ModelError) -> Self {
        Failure(LraStatus::InvalidArgument, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LraStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LraStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(LraStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn config<'a>(cfg: *const LraConfig) -> Result<&'a SystemConfig, Failure> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, need: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    if len < need {
        return Err(Failure(
            LraStatus::BufferTooSmall,
            format!("`{name}` holds {len} entries, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn store<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

fn model(lower_bound: u8) -> CaptureModel {
    if lower_bound != 0 {
        CaptureModel::LowerBound
    } else {
        CaptureModel::Exact
    }
}

/// Creates a configuration with explicit per-layer arrival rates, powers and
/// rates (arrays of length `layers`, layer 1 first).
///
/// # Safety
/// Array pointers must be valid for `layers` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lra_config_new(
    channels: usize,
    layers: usize,
    arrivals: *const f64,
    powers: *const f64,
    rates: *const f64,
    gain_mean: f64,
    noise_power: f64,
    repetition: usize,
    out: *mut *mut LraConfig,
) -> LraStatus {
    guard(|| {
        let a = input(arrivals, layers, "arrivals")?;
        let p = input(powers, layers, "powers")?;
        let r = input(rates, layers, "rates")?;
        let params = (0..layers)
            .map(|l| LayerParams::new(a[l], p[l], r[l]))
            .collect();
        let inner = SystemConfig::new(channels, params, gain_mean, noise_power, repetition)?;
        store(out, Box::into_raw(Box::new(LraConfig { inner })), "out")
    })
}

/// Creates a configuration whose powers follow the target-SINR rule.
///
/// # Safety
/// Array pointers must be valid for `layers` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lra_config_new_target_sinr(
    channels: usize,
    layers: usize,
    arrivals: *const f64,
    rates: *const f64,
    gamma_db: f64,
    gain_mean: f64,
    noise_power: f64,
    repetition: usize,
    out: *mut *mut LraConfig,
) -> LraStatus {
    guard(|| {
        let a = input(arrivals, layers, "arrivals")?;
        let r = input(rates, layers, "rates")?;
        let inner = SystemConfig::with_target_sinr(
            channels,
            a,
            r,
            TargetSinr::from_db(gamma_db)?,
            gain_mean,
            noise_power,
            repetition,
        )?;
        store(out, Box::into_raw(Box::new(LraConfig { inner })), "out")
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must come from `lra_config_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lra_config_free(cfg: *mut LraConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of layers, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lra_config_num_layers(cfg: *const LraConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.inner.num_layers())
}

/// # Safety
/// `cfg` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lra_config_powers(cfg: *const LraConfig, out: *mut f64, len: usize) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        output(out, len, c.num_layers(), "out")?.copy_from_slice(&c.powers());
        Ok(())
    })
}

/// Replaces the per-layer rates.
///
/// # Safety
/// `cfg` must be a live handle; `rates` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn lra_config_set_rates(cfg: *mut LraConfig, rates: *const f64, len: usize) -> LraStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("config"))?;
        c.inner = c.inner.with_rates(input(rates, len, "rates")?)?;
        Ok(())
    })
}

/// Capture probability of `layer` (1-based).
///
/// # Safety
/// `cfg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lra_capture_prob(
    cfg: *const LraConfig,
    layer: usize,
    lower_bound: u8,
    out: *mut f64,
) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        c.check_layer(layer)?;
        store(out, capture_prob(c, layer, model(lower_bound)), "out")
    })
}

/// Analytic throughput per layer and in total. `layer_out` may be null.
///
/// # Safety
/// `cfg` must be a live handle; non-null outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lra_throughput(
    cfg: *const LraConfig,
    lower_bound: u8,
    layer_out: *mut f64,
    len: usize,
    total_out: *mut f64,
) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        let report = throughput(c, model(lower_bound));
        if !layer_out.is_null() {
            output(layer_out, len, c.num_layers(), "layer_out")?.copy_from_slice(&report.layer_throughput);
        }
        store(total_out, report.total_throughput, "total_out")
    })
}

/// Throughput-maximizing per-layer rates. Pass `grid_points = 0` for the
/// default search settings.
///
/// # Safety
/// `cfg` must be a live handle; `rates_out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lra_optimize_rates(
    cfg: *const LraConfig,
    rate_max: f64,
    grid_points: usize,
    refine_tol: f64,
    lower_bound: u8,
    rates_out: *mut f64,
    len: usize,
    total_out: *mut f64,
) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        let search = if grid_points == 0 {
            SearchSettings::default()
        } else {
            SearchSettings {
                upper: rate_max,
                grid_points,
                refine_tol,
            }
        };
        let plan = optimize_rates(c, &search, model(lower_bound))?;
        output(rates_out, len, c.num_layers(), "rates_out")?.copy_from_slice(&plan.optimal_rates);
        store(total_out, plan.achieved_throughput, "total_out")
    })
}

/// Per-layer failure probabilities Ψ and cascaded outage. Either output may
/// be null.
///
/// # Safety
/// `cfg` must be a live handle; non-null outputs valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lra_outage(
    cfg: *const LraConfig,
    psi_out: *mut f64,
    outage_out: *mut f64,
    len: usize,
) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        let report = outage(c)?;
        if !psi_out.is_null() {
            output(psi_out, len, c.num_layers(), "psi_out")?.copy_from_slice(&report.psi);
        }
        if !outage_out.is_null() {
            output(outage_out, len, c.num_layers(), "outage_out")?.copy_from_slice(&report.outage);
        }
        Ok(())
    })
}

unsafe fn sim_settings(s: *const LraSimSettings) -> Result<SimSettings, Failure> {
    let s = s.as_ref().ok_or_else(|| null("settings"))?;
    let blocking = if s.reopen_blocked != 0 {
        BlockingRule::ReopenOnCancel
    } else {
        BlockingRule::Sticky
    };
    Ok(SimSettings::new(s.slots, s.seed)
        .with_workers(s.workers as usize)
        .with_blocking(blocking))
}

/// Monte Carlo throughput estimate. `layer_out` may be null.
///
/// # Safety
/// Pointers must be valid; `layer_out` valid for `len` writes if non-null.
#[no_mangle]
pub unsafe extern "C" fn lra_simulate_throughput(
    cfg: *const LraConfig,
    settings: *const LraSimSettings,
    layer_out: *mut LraEstimate,
    len: usize,
    total_out: *mut LraEstimate,
) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        let est = estimate_throughput(c, &sim_settings(settings)?)?;
        if !layer_out.is_null() {
            let out = output(layer_out, len, c.num_layers(), "layer_out")?;
            for (o, e) in out.iter_mut().zip(&est.per_layer) {
                *o = e.into();
            }
        }
        store(total_out, (&est.total).into(), "total_out")
    })
}

/// Monte Carlo outage estimate per layer.
///
/// # Safety
/// Pointers must be valid; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lra_simulate_outage(
    cfg: *const LraConfig,
    settings: *const LraSimSettings,
    out: *mut LraEstimate,
    len: usize,
) -> LraStatus {
    guard(|| {
        let c = config(cfg)?;
        let est = estimate_outage(c, &sim_settings(settings)?)?;
        let out = output(out, len, c.num_layers(), "out")?;
        for (o, e) in out.iter_mut().zip(&est) {
            *o = e.into();
        }
        Ok(())
    })
}

/// SINR threshold `2^rate − 1`.
#[no_mangle]
pub extern "C" fn lra_snr_gap(rate: f64) -> f64 {
    snr_gap(rate)
}

/// Probability that a tagged copy collides with one of `users − 1` others.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lra_collision_prob(
    users: usize,
    channels: usize,
    repetition: usize,
    out: *mut f64,
) -> LraStatus {
    guard(|| store(out, collision_prob(users, channels, repetition)?, "out"))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to fit) and returns the full message length
/// excluding the NUL. Returns 0 if there is no message.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lra_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
