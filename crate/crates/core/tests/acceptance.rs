//! Acceptance battery: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance`.

use std::io::Write;
use std::sync::{Mutex, OnceLock};

use censored_ldp::validation::{Battery, Status, ValidationConfig};

fn battery() -> &'static Battery {
    static BATTERY: OnceLock<Battery> = OnceLock::new();
    BATTERY.get_or_init(|| {
        Battery::new(ValidationConfig::default()).expect("default battery config is valid")
    })
}

/// Criteria run one at a time so the runtime checks see an idle machine.
fn run(id: u8) {
    static SERIAL: Mutex<()> = Mutex::new(());
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let report = battery().criterion(id);
    // bypass the test harness capture so every line shows up in the log
    let _ = writeln!(std::io::stderr(), "{}", report.headline());
    assert_eq!(report.status, Status::Pass, "{report}");
}

#[test]
fn criterion_1_w_values_and_cache() {
    run(1);
}

#[test]
fn criterion_2_simplex_oracle() {
    run(2);
}

#[test]
fn criterion_3_gaussian_and_single_jump_bands() {
    run(3);
}

#[test]
fn criterion_4_near_multiple_band() {
    run(4);
}

#[test]
fn criterion_5_interior_band() {
    run(5);
}

#[test]
fn criterion_6_error_shrinks_with_censoring() {
    run(6);
}

#[test]
fn criterion_7_transition_continuity() {
    run(7);
}

#[test]
fn criterion_8_mills_ratio_and_h() {
    run(8);
}

#[test]
fn criterion_9_estimator_integrity() {
    run(9);
}
