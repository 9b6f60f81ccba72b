//! `verify`: run invariant suites and report each check with its measured
//! slack. Exit 0 when everything passes, 1 on any failure.

use anyhow::anyhow;
use fairsel_core::verify;

use crate::VerifyArgs;

pub fn run(args: VerifyArgs) -> anyhow::Result<u8> {
    let checks = verify::run_suite(&args.suite).map_err(|e| anyhow!("{e}"))?;
    let mut failures = 0usize;
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        if c.threshold.is_nan() {
            println!("[{verdict}] {} — {}", c.name, c.detail);
        } else {
            println!(
                "[{verdict}] {} — measured {:.3e}, allowed {:.3e} ({})",
                c.name, c.measured, c.threshold, c.detail
            );
        }
        if !c.passed {
            failures += 1;
        }
    }
    println!("{} checks, {} failed", checks.len(), failures);
    Ok(if failures == 0 { 0 } else { 1 })
}
