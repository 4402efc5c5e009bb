//! Runs the full invariant suite and prints one line per check.

use std::process::ExitCode;
use std::time::Instant;

use cpn::check::{run_all, CheckOptions};

fn main() -> ExitCode {
    let opts = CheckOptions::default();
    let start = Instant::now();
    let results = run_all(&opts);
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {:>2} {}: {}", r.id, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s (seed {}, dim {})",
        results.len() - failed,
        start.elapsed().as_secs_f64(),
        opts.seed,
        opts.dim
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
