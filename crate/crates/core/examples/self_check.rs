//! Gradient, DTW and pair-balance self-checks, as run by `fsts verify`.

use fsts::verify::{run_all, VerifyOptions};

fn main() -> fsts::Result<()> {
    let report = run_all(&VerifyOptions::default())?;
    print!("{}", report.render());
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
