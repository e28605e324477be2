// Argument-principle counting: one root per Rouche disk, and the real
// roots on the negative axis found by recursive bisection of a rectangle.

use waveheat::spectrum::{self, EigenvalueSeed, Rectangle};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let v = BoundaryVariant::Neumann;
    for n in [5, 20, 80] {
        let seed = EigenvalueSeed::neumann(n);
        let count = spectrum::count_zeros_contour(seed.center.value(), seed.radius, v)?;
        println!("disk n = {n}: radius {:.4}, {count} zero(s)", seed.radius);
    }

    let rect = Rectangle::new(-25.0, -0.1, -0.5, 0.5);
    for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
        let roots = spectrum::roots_in_rectangle(&v, &rect, 12)?;
        let shown: Vec<String> = roots.iter().map(|z| format!("{:.10}", z.re)).collect();
        println!("{v}: real roots in [-25, -0.1]: {}", shown.join(", "));
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
