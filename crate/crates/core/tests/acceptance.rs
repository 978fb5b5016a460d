//! Acceptance run: one line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};

use levopt::config::{bundled, load_scenario};
use levopt::emit::{emit, Format};
use levopt::report::{reproduce, ReproduceOptions, CRITERIA};

fn simulate_output(seed: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_levopt"))
        .args(["simulate", "--scenario", "kiesel", "--ensemble", "16", "--format", "json", "--seed", seed])
        .output()
        .expect("run levopt");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn main() -> ExitCode {
    let scenarios = ["kiesel", "gieseler"].map(|n| load_scenario(bundled(n).unwrap()).unwrap());
    let report = reproduce(&scenarios, ReproduceOptions::default());

    let quick = ReproduceOptions {
        monte_carlo: false,
        ..ReproduceOptions::default()
    };
    let a = emit(&reproduce(&scenarios, quick).records(), Format::Json).unwrap();
    let b = emit(&reproduce(&scenarios, quick).records(), Format::Json).unwrap();
    let reports_identical = a == b;
    let runs_identical = simulate_output("7") == simulate_output("7");
    let seeds_differ = simulate_output("7") != simulate_output("8");

    let mut failed = 0;
    for n in 1..=CRITERIA {
        let claims: Vec<_> = report.claims.iter().filter(|c| c.criterion == n).collect();
        let mut pass = report.criterion(n).unwrap_or(false);
        let mut detail = format!("{} claims", claims.len());
        if n == 15 {
            pass &= reports_identical && runs_identical && seeds_differ;
            detail += &format!(
                ", report bytes identical: {reports_identical}, seeded runs identical: {runs_identical}, seeds differ: {seeds_differ}"
            );
        }
        println!("[{}] criterion {n:2}: {detail}", if pass { "PASS" } else { "FAIL" });
        for c in claims.iter().filter(|c| !c.pass) {
            println!("       {}: {} computed {:?}, {}", c.id, c.quantity, c.computed, c.check.describe());
        }
        if !pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all {CRITERIA} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {CRITERIA} criteria fail");
        ExitCode::FAILURE
    }
}
