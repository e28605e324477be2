// Evaluates the Neumann and Dirichlet characteristic functions, including
// far up the imaginary axis where only the scaled form is representable.

use waveheat::characteristic::Characteristic;
use waveheat::{BoundaryVariant, ComplexFrequency, C64};

pub fn run_example() -> waveheat::Result<()> {
    let points = [C64::new(1.0, 2.0), C64::new(-0.5, 2.2), C64::new(0.0, 40.0)];
    for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
        for &z in &points {
            let l = ComplexFrequency::new(z);
            let d = v.char_fn(&l)?;
            let dd = v.char_fn_deriv(&l)?;
            println!("{v:>9}  D({z}) = {d:.6e}   D' = {dd:.6e}");
        }
    }
    // |D| ~ exp(1e6) here; the scaled form keeps mantissa and log separately
    let far = ComplexFrequency::new(C64::new(-3.0, 1e6));
    let s = BoundaryVariant::Neumann.char_fn_scaled(&far);
    println!("D(-3 + 1e6 i) = {:.6} * exp({:.3})", s.mantissa, s.log_scale);
    assert!(BoundaryVariant::Neumann.char_fn(&far).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
