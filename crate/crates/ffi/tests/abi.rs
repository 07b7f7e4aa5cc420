use std::ffi::{CStr, CString};
use std::ptr;

use bds_ffi::*;

fn small_config() -> *mut BdsConfig {
    let text = CString::new("n_ues = 30\nsim_end_s = 7200\nseed = 5\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { bds_config_parse(text.as_ptr(), &mut cfg) }, BdsStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

fn last_error() -> String {
    let p = bds_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(bds_config_new_default(ptr::null_mut()), BdsStatus::NullPointer);
        let mut cfg = ptr::null_mut();
        assert_eq!(bds_config_parse(ptr::null(), &mut cfg), BdsStatus::NullPointer);
        assert!(cfg.is_null());
        assert_eq!(bds_run_len(ptr::null()), 0);
        assert!(bds_config_to_text(ptr::null()).is_null());
        bds_config_free(ptr::null_mut());
        bds_run_free(ptr::null_mut());
        bds_string_free(ptr::null_mut());
    }
}

#[test]
fn bad_config_text_sets_message() {
    let text = CString::new("no_such_key = 3\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { bds_config_parse(text.as_ptr(), &mut cfg) }, BdsStatus::InvalidConfig);
    assert!(last_error().contains("no_such_key"));
}

#[test]
fn set_rejects_invalid_and_keeps_old_value() {
    let cfg = small_config();
    unsafe {
        let key = CString::new("n_ues").unwrap();
        let bad = CString::new("-4").unwrap();
        assert_ne!(bds_config_set(cfg, key.as_ptr(), bad.as_ptr()), BdsStatus::Ok);
        let good = CString::new("12").unwrap();
        assert_eq!(bds_config_set(cfg, key.as_ptr(), good.as_ptr()), BdsStatus::Ok);
        assert!(bds_last_error_message().is_null());
        let text = bds_config_to_text(cfg);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        bds_string_free(text);
        assert!(s.lines().any(|l| l.replace(' ', "") == "n_ues=12"), "{s}");
        bds_config_free(cfg);
    }
}

#[test]
fn config_from_file_round_trip() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.conf");
    unsafe {
        let text = bds_config_to_text(cfg);
        std::fs::write(&path, CStr::from_ptr(text).to_bytes()).unwrap();
        bds_string_free(text);
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        let mut loaded = ptr::null_mut();
        assert_eq!(bds_config_from_file(cpath.as_ptr(), &mut loaded), BdsStatus::Ok);
        let a = bds_config_to_text(cfg);
        let b = bds_config_to_text(loaded);
        assert_eq!(CStr::from_ptr(a), CStr::from_ptr(b));
        bds_string_free(a);
        bds_string_free(b);
        bds_config_free(loaded);

        let missing = CString::new(dir.path().join("nope").to_str().unwrap()).unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(bds_config_from_file(missing.as_ptr(), &mut none), BdsStatus::Io);
        bds_config_free(cfg);
    }
}

#[test]
fn run_and_query_records() {
    let cfg = small_config();
    let targets = [3600.0, 7000.0];
    unsafe {
        let mut run = ptr::null_mut();
        assert_eq!(bds_run(cfg, 0, true, targets.as_ptr(), targets.len(), &mut run), BdsStatus::Ok);
        let n = bds_run_len(run);
        assert_eq!(n, 30);
        let mut depleted = 0;
        for i in 0..n {
            let mut r = std::mem::zeroed::<BdsUsageRecord>();
            assert_eq!(bds_run_record(run, i, &mut r), BdsStatus::Ok);
            assert_eq!(r.ue_id, i as u64);
            assert!(r.remaining_j <= r.initial_j);
            if r.depleted != 0 {
                depleted += 1;
                assert!(r.depleted_at_s.is_finite() && r.depleted_at_s <= 7200.0);
                assert_eq!(r.remaining_j, 0.0);
            } else {
                assert!(r.depleted_at_s.is_nan());
            }
        }
        let mut r = std::mem::zeroed::<BdsUsageRecord>();
        assert_eq!(bds_run_record(run, n, &mut r), BdsStatus::OutOfRange);

        let mut p = -1.0;
        assert_eq!(bds_run_outage_probability(run, 1e9, &mut p), BdsStatus::Ok);
        assert!((p - depleted as f64 / n as f64).abs() < 1e-12);
        let mut v = -1.0;
        assert_eq!(bds_run_valueless_battery(run, 3600.0, &mut v), BdsStatus::Ok);
        assert!(v.is_nan() || (0.0..=1.0).contains(&v));
        assert_eq!(bds_run_valueless_battery(run, 1234.0, &mut v), BdsStatus::InvalidArgument);

        let csv = bds_run_records_csv(run);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        bds_string_free(csv);
        assert_eq!(text.lines().count(), n + 1);

        let mut again = ptr::null_mut();
        assert_eq!(bds_run(cfg, 0, true, targets.as_ptr(), targets.len(), &mut again), BdsStatus::Ok);
        let csv2 = bds_run_records_csv(again);
        assert_eq!(CStr::from_ptr(csv2).to_str().unwrap(), text);
        bds_string_free(csv2);
        let _ = bds_run_association_count(again);

        bds_run_free(again);
        bds_run_free(run);
        bds_config_free(cfg);
    }
}

#[test]
fn link_budget_rows() {
    let mut rows = [BdsLinkBudgetRow {
        model: BdsChannelModel::Umts,
        cellular_db: 0.0,
        d2d_db: 0.0,
        pl_diff_db: 0.0,
        tx_diff_db: 0.0,
    }; 4];
    let mut n = 0;
    unsafe {
        assert_eq!(bds_link_budget(ptr::null(), rows.as_mut_ptr(), 1, &mut n), BdsStatus::OutOfRange);
        assert_eq!(n, 2);
        assert_eq!(bds_link_budget(ptr::null(), rows.as_mut_ptr(), rows.len(), &mut n), BdsStatus::Ok);
    }
    let umts = rows[..n].iter().find(|r| r.model == BdsChannelModel::Umts).unwrap();
    let winner = rows[..n].iter().find(|r| r.model == BdsChannelModel::WinnerII).unwrap();
    assert!((umts.pl_diff_db - (umts.cellular_db - umts.d2d_db)).abs() < 1e-9);
    assert!((winner.pl_diff_db - 49.4).abs() < 0.1);
}

#[test]
fn pure_functions_match_core() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(bds_pl_winner_c2(300.0, 25.0, 1.5, 2.0, &mut x), BdsStatus::Ok);
        assert_eq!(x, bds_core::channel::pl_winner_c2(300.0, 25.0, 1.5, 2.0));
        assert_eq!(bds_pl_winner_c2(0.0, 25.0, 1.5, 2.0, &mut x), BdsStatus::InvalidArgument);
        assert_eq!(bds_pl_winner_a1(10.0, 0, 2.0, &mut x), BdsStatus::InvalidArgument);
        assert_eq!(bds_pl_winner_a1(10.0, 1, 2.0, &mut x), BdsStatus::Ok);
        assert_eq!(x, bds_core::channel::pl_winner_a1(10.0, 1, 2.0));

        assert_eq!(bds_uplink_tx_power_dbm(ptr::null(), 200.0, false, &mut x), BdsStatus::Ok);
        assert_eq!(x, 24.0);
        assert_eq!(bds_uplink_tx_power_dbm(ptr::null(), f64::NAN, false, &mut x), BdsStatus::InvalidArgument);

        let mut e = 0.0;
        assert_eq!(bds_burst_energy_j(ptr::null(), 120.0, false, 7800, &mut e), BdsStatus::Ok);
        assert!(e > 0.015);
        assert_eq!(bds_burst_energy_j(ptr::null(), 120.0, false, 0, &mut e), BdsStatus::InvalidArgument);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(bds_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bds.h")).unwrap();
    for name in [
        "bds_config_new_default",
        "bds_config_parse",
        "bds_config_from_file",
        "bds_config_set",
        "bds_config_to_text",
        "bds_config_free",
        "bds_run",
        "bds_run_len",
        "bds_run_record",
        "bds_run_association_count",
        "bds_run_outage_probability",
        "bds_run_valueless_battery",
        "bds_run_records_csv",
        "bds_run_free",
        "bds_link_budget",
        "bds_pl_winner_c2",
        "bds_pl_winner_a1",
        "bds_uplink_tx_power_dbm",
        "bds_burst_energy_j",
        "bds_last_error_message",
        "bds_string_free",
        "bds_version",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct BdsConfig BdsConfig;"));
}
