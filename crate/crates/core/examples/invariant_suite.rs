//! Runs every numbered check with a chosen seed and dimension.

use cpn::check::{run_all, CheckOptions};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let opts = CheckOptions { seed, dim: 5 };
    for r in run_all(&opts) {
        println!("{:>2} {:<34} {}", r.id, r.name, if r.passed { "pass" } else { "FAIL" });
    }
}
