//! C ABI over `bds-core`.
//!
//! Configurations and run results are opaque handles owned by the caller
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`BdsStatus`]; on failure [`bds_last_error_message`] describes
//! the cause for the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bds_core::channel::{
    burst_energy_j, link_budget_report, pl_winner_a1, pl_winner_c2, uplink_tx_power_dbm, LinkBudgetParams, LinkType,
    PowerParams,
};
use bds_core::experiment::{records_csv, run_arm, ArmOutput};
use bds_core::metrics::{outage_probability, valueless_battery};
use bds_core::{Error, ScenarioConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Io = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Opaque scenario configuration.
pub struct BdsConfig {
    inner: ScenarioConfig,
}

/// Opaque result of one simulated arm.
pub struct BdsRun {
    arm: ArmOutput,
    capacity_j: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdsUsageRecord {
    pub ue_id: u64,
    pub initial_j: f64,
    /// Nonzero when the battery ran out during the run.
    pub depleted: u8,
    /// Depletion instant in seconds; NaN when `depleted == 0`.
    pub depleted_at_s: f64,
    pub remaining_j: f64,
    pub bytes_sent_direct: u64,
    pub bytes_sent_d2d: u64,
    pub bytes_relayed_for_others: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BdsChannelModel {
    Umts = 0,
    WinnerII = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdsLinkBudgetRow {
    pub model: BdsChannelModel,
    pub cellular_db: f64,
    pub d2d_db: f64,
    pub pl_diff_db: f64,
    pub tx_diff_db: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: BdsStatus, msg: impl Into<String>) -> BdsStatus {
    set_error(msg);
    status
}

fn from_core(err: Error) -> BdsStatus {
    let status = match &err {
        Error::Io { .. } => BdsStatus::Io,
        Error::InvalidArgument(_) => BdsStatus::InvalidArgument,
        _ => BdsStatus::InvalidConfig,
    };
    fail(status, err.to_string())
}

/// Runs `f`, converting panics into `BdsStatus::Panic`.
fn guard(f: impl FnOnce() -> BdsStatus) -> BdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == BdsStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(BdsStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, BdsStatus> {
    if p.is_null() {
        return Err(fail(BdsStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BdsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from a function of this library documented as returning
/// an owned string, and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a configuration holding the default scenario.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn bds_config_new_default(out: *mut *mut BdsConfig) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(BdsConfig { inner: ScenarioConfig::default() }));
        BdsStatus::Ok
    })
}

/// Parses `key = value` config text on top of the defaults.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_config_parse(text: *const c_char, out: *mut *mut BdsConfig) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ScenarioConfig::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(BdsConfig { inner }));
                BdsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Loads a config file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_config_from_file(path: *const c_char, out: *mut *mut BdsConfig) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ScenarioConfig::from_file(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(BdsConfig { inner }));
                BdsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Sets one key. The whole config is revalidated; on failure it is left
/// unchanged.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn bds_config_set(cfg: *mut BdsConfig, key: *const c_char, value: *const c_char) -> BdsStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(BdsStatus::NullPointer, "cfg is null");
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let mut next = cfg.inner.clone();
        if let Err(e) = next.set(key, value).and_then(|_| next.validate()) {
            return from_core(e);
        }
        cfg.inner = next;
        BdsStatus::Ok
    })
}

/// Config rendered as `key = value` text; free with [`bds_string_free`].
/// Returns NULL when `cfg` is NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_config_to_text(cfg: *const BdsConfig) -> *mut c_char {
    match cfg.as_ref() {
        Some(c) => into_c_string(c.inner.to_text()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `cfg` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bds_config_free(cfg: *mut BdsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Simulates one arm of replication `replication`. Battery levels are
/// snapshotted at each of the `n_targets` times in `targets_s` (may be NULL
/// when `n_targets == 0`).
///
/// # Safety
/// `cfg` must be a live handle, `targets_s` must point to `n_targets`
/// doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_run(
    cfg: *const BdsConfig,
    replication: u64,
    cooperation: bool,
    targets_s: *const f64,
    n_targets: usize,
    out: *mut *mut BdsRun,
) -> BdsStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(BdsStatus::NullPointer, "cfg is null");
        };
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        let targets: &[f64] = if n_targets == 0 {
            &[]
        } else if targets_s.is_null() {
            return fail(BdsStatus::NullPointer, "targets_s is null");
        } else {
            std::slice::from_raw_parts(targets_s, n_targets)
        };
        match run_arm(&cfg.inner, replication as usize, cooperation, targets) {
            Ok(arm) => {
                *out = Box::into_raw(Box::new(BdsRun { arm, capacity_j: cfg.inner.battery_capacity_j }));
                BdsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Number of UE records in a run; 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_run_len(run: *const BdsRun) -> usize {
    run.as_ref().map_or(0, |r| r.arm.output.records.len())
}

/// Number of associations created during the run; 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_run_association_count(run: *const BdsRun) -> usize {
    run.as_ref().map_or(0, |r| r.arm.output.associations.len())
}

/// Copies record `index` into `out`.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bds_run_record(run: *const BdsRun, index: usize, out: *mut BdsUsageRecord) -> BdsStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), out.is_null()) else {
            return fail(BdsStatus::NullPointer, "run or out is null");
        };
        let Some(r) = run.arm.output.records.get(index) else {
            return fail(BdsStatus::OutOfRange, format!("record index {index} out of range"));
        };
        *out = BdsUsageRecord {
            ue_id: r.ue_id as u64,
            initial_j: r.initial_j,
            depleted: r.depleted_at.is_some() as u8,
            depleted_at_s: r.depleted_at.unwrap_or(f64::NAN),
            remaining_j: r.remaining_j,
            bytes_sent_direct: r.bytes_sent_direct,
            bytes_sent_d2d: r.bytes_sent_d2d,
            bytes_relayed_for_others: r.bytes_relayed_for_others,
        };
        BdsStatus::Ok
    })
}

/// Fraction of UEs depleted before `target_s`.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bds_run_outage_probability(run: *const BdsRun, target_s: f64, out: *mut f64) -> BdsStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), out.is_null()) else {
            return fail(BdsStatus::NullPointer, "run or out is null");
        };
        match outage_probability(&run.arm.output.records, target_s) {
            Ok(p) => {
                *out = p;
                BdsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Mean remaining battery of survivors at `target_s` as a fraction of
/// capacity; NaN when nobody survived. `target_s` must be one of the
/// snapshot times passed to [`bds_run`].
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bds_run_valueless_battery(run: *const BdsRun, target_s: f64, out: *mut f64) -> BdsStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), out.is_null()) else {
            return fail(BdsStatus::NullPointer, "run or out is null");
        };
        match valueless_battery(&run.arm.output.records, target_s, run.capacity_j) {
            Ok(v) => {
                *out = v.unwrap_or(f64::NAN);
                BdsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Per-UE records as CSV; free with [`bds_string_free`]. NULL for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bds_run_records_csv(run: *const BdsRun) -> *mut c_char {
    match run.as_ref() {
        Some(r) => into_c_string(records_csv(std::slice::from_ref(&r.arm))),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `run` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bds_run_free(run: *mut BdsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Writes the link-budget comparison rows into `rows` (capacity `cap`)
/// and their count into `n`. `cfg` may be NULL for the defaults.
///
/// # Safety
/// `rows` must point to `cap` writable rows; `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_link_budget(
    cfg: *const BdsConfig,
    rows: *mut BdsLinkBudgetRow,
    cap: usize,
    n: *mut usize,
) -> BdsStatus {
    guard(|| {
        if rows.is_null() || n.is_null() {
            return fail(BdsStatus::NullPointer, "rows or n is null");
        }
        let params = cfg.as_ref().map_or_else(LinkBudgetParams::default, |c| LinkBudgetParams::from_config(&c.inner));
        let report = link_budget_report(&params);
        *n = report.len();
        if cap < report.len() {
            return fail(BdsStatus::OutOfRange, format!("need room for {} rows", report.len()));
        }
        for (i, r) in report.iter().enumerate() {
            *rows.add(i) = BdsLinkBudgetRow {
                model: if r.model == "UMTS" { BdsChannelModel::Umts } else { BdsChannelModel::WinnerII },
                cellular_db: r.cellular_db,
                d2d_db: r.d2d_db,
                pl_diff_db: r.pl_diff_db,
                tx_diff_db: r.tx_diff_db,
            };
        }
        BdsStatus::Ok
    })
}

fn positive(x: f64, name: &str) -> Result<(), BdsStatus> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(fail(BdsStatus::InvalidArgument, format!("{name} must be positive, got {x}")))
    }
}

/// WINNER II C2 NLOS path loss in dB.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_pl_winner_c2(d_m: f64, h_enb_m: f64, h_ue_m: f64, fc_ghz: f64, out: *mut f64) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        if let Err(s) = positive(d_m, "d_m").and(positive(h_enb_m, "h_enb_m")).and(positive(fc_ghz, "fc_ghz")) {
            return s;
        }
        *out = pl_winner_c2(d_m, h_enb_m, h_ue_m, fc_ghz);
        BdsStatus::Ok
    })
}

/// WINNER II A1 NLOS path loss in dB.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bds_pl_winner_a1(d_m: f64, n_walls: u32, fc_ghz: f64, out: *mut f64) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        if let Err(s) = positive(d_m, "d_m").and(positive(fc_ghz, "fc_ghz")) {
            return s;
        }
        if n_walls == 0 {
            return fail(BdsStatus::InvalidArgument, "n_walls must be at least 1");
        }
        *out = pl_winner_a1(d_m, n_walls, fc_ghz);
        BdsStatus::Ok
    })
}

fn link(is_d2d: bool) -> LinkType {
    if is_d2d { LinkType::D2d } else { LinkType::Cellular }
}

/// Open-loop uplink transmit power in dBm for the power settings of `cfg`
/// (NULL for defaults).
///
/// # Safety
/// `cfg` must be NULL or a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bds_uplink_tx_power_dbm(
    cfg: *const BdsConfig,
    pl_total_db: f64,
    is_d2d: bool,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        if !pl_total_db.is_finite() {
            return fail(BdsStatus::InvalidArgument, "path loss must be finite");
        }
        let params = cfg.as_ref().map_or_else(PowerParams::default, |c| PowerParams::from_config(&c.inner));
        *out = uplink_tx_power_dbm(pl_total_db, link(is_d2d), &params);
        BdsStatus::Ok
    })
}

/// Energy of one burst in joules.
///
/// # Safety
/// `cfg` must be NULL or a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bds_burst_energy_j(
    cfg: *const BdsConfig,
    pl_total_db: f64,
    is_d2d: bool,
    bytes: u64,
    out: *mut f64,
) -> BdsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BdsStatus::NullPointer, "out is null");
        }
        if !pl_total_db.is_finite() {
            return fail(BdsStatus::InvalidArgument, "path loss must be finite");
        }
        let params = cfg.as_ref().map_or_else(PowerParams::default, |c| PowerParams::from_config(&c.inner));
        match burst_energy_j(pl_total_db, link(is_d2d), bytes, &params) {
            Ok(e) => {
                *out = e;
                BdsStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}
