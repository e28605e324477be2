// |D(is)| e^{-sqrt(|s|/2)} stays bounded away from zero on the axis.

use waveheat::characteristic::lemma32_ratio;
use waveheat::resolvent::log_spaced;

pub fn run_example() -> waveheat::Result<()> {
    let mut best = (f64::INFINITY, 0.0);
    for s in log_spaced(2.0, 1e4, 4000) {
        for s in [s, -s] {
            let r = lemma32_ratio(s)?;
            if r < best.0 {
                best = (r, s);
            }
        }
    }
    println!("min ratio {:.6} at s = {:.4}", best.0, best.1);
    for s in [2.0, 10.0, 100.0, 1e3, 1e4] {
        println!("  s = {s:>7}: {:.6}", lemma32_ratio(s)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
