//! Randomised checks of the stability and energy bounds.

use expass::cli::theory_suite;

fn main() -> expass::Result<()> {
    let report = theory_suite(50, 42)?;
    for line in report.summary() {
        println!("{line}");
    }
    Ok(())
}
