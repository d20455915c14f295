//! Full-scale acceptance criteria. Prints one `criterion N (title): pass|fail`
//! line per criterion, then its individual checks, and exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use kemmer::checks::{run_criterion, Scale};

const SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=10 {
        let start = Instant::now();
        let c = run_criterion(id, Scale::Full, SEED);
        println!("{} [{:.1} s]", c.summary(), start.elapsed().as_secs_f64());
        for check in &c.checks {
            println!("    {check}");
        }
        failed += usize::from(!c.passed());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
