//! Runs every acceptance criterion and prints one PASS/FAIL line per criterion,
//! then checks that a tampered oracle makes the pendulum criterion fail.

use std::process::ExitCode;

use hj_homog::harness::{criterion_ids, run_acceptance_suite, AcceptanceOptions};

fn main() -> ExitCode {
    let summary = run_acceptance_suite(&AcceptanceOptions::default()).expect("suite runs");
    println!("{summary}");
    let mut ok = summary.all_passed() && summary.results.len() == criterion_ids().len();

    let tampered = AcceptanceOptions { alpha_oracle_offset: 0.5, only: Some(vec!["A2".into()]) };
    let t = run_acceptance_suite(&tampered).expect("suite runs");
    let caught = t.get("A2").is_some_and(|r| !r.passed);
    println!("tampered oracle (offset 0.5) rejected by A2: {}", if caught { "yes" } else { "NO" });
    ok &= caught;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
