// A reduced verification run, and the same checks against a model with a
// flipped sign.

use waveheat::resolvent::log_spaced;
use waveheat::verify::{run_checks, SignFlipped, VerifyOptions};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let v = BoundaryVariant::Neumann;
    let mut opts = VerifyOptions::new(v);
    opts.n_max = 30;
    opts.s_values = log_spaced(10.0, 100.0, 5);
    opts.decay = None;
    let good = run_checks(&v, &opts);
    println!("{good}\n");
    let bad = run_checks(&SignFlipped(v), &opts);
    println!("{bad}");
    assert!(good.all_passed() && !bad.all_passed());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
