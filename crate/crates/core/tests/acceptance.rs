// SPDX-License-Identifier: MIT OR Apache-2.0
//! Runs the fourteen acceptance criteria and prints one verdict line per criterion.

use std::process::ExitCode;

use gcdeform::checks::{run, DEFAULT_SEED};

fn main() -> ExitCode {
    let seed = std::env::var("GCDEFORM_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    println!("acceptance suite, seed {seed}");
    let mut failed = 0;
    for id in 1..=14 {
        let start = std::time::Instant::now();
        let report = run(id, seed);
        println!("{} ({:.1}s)", report.line(), start.elapsed().as_secs_f64());
        failed += usize::from(!report.passed);
    }
    println!("{} passed, {failed} failed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
