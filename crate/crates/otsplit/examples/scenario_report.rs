//! Runs a named scenario end to end through the same runner the CLI uses and
//! prints its check report.
//!
//! Run with `cargo run --example scenario_report` (or pass a scenario name:
//! `cargo run --example scenario_report -- quarter_disk_full`).

use otsplit::scenario::{run, ScenarioConfig};

fn main() -> otsplit::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "bilinear".into());
    let mut cfg = ScenarioConfig::new(&name);
    // Reduced resolutions keep the example snappy; the acceptance suite runs
    // the full defaults.
    cfg.grid_n = 200;
    cfg.y_scan = 128;
    cfg.oracle_nx = 16;
    cfg.oracle_ny = 32;

    let report = run(&cfg)?;
    println!("scenario {} ({} checks):", report.scenario, report.checks.len());
    for c in &report.checks {
        println!(
            "  {} {:<22} [{:?}] measured {:+.4e} vs {:+.4e} in {:.2}s",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.stage,
            c.measured,
            c.expected,
            c.seconds
        );
    }
    println!("overall: {}", if report.all_pass() { "pass" } else { "fail" });
    Ok(())
}
