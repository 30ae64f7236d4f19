//! Runs every identity battery and prints one line per check.

use partlim::verify::{run_suite, Suite, VerifyOptions};

fn main() -> partlim::Result<()> {
    let report = run_suite(Suite::All, &VerifyOptions::default())?;
    for c in &report.checks {
        println!("{:<28} {:?}  {}", c.name, c.status, c.detail);
    }
    println!("passed: {}", report.passed);
    Ok(())
}
