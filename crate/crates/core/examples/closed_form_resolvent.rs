// Applies the exact resolvent R(is, A) to sampled data and checks the
// boundary, interface and equation residuals of the result.

use waveheat::discretization::GridSpec;
use waveheat::resolvent::{self, DataTriple};
use waveheat::{BoundaryVariant, C64};

pub fn run_example() -> waveheat::Result<()> {
    let s = 25.0;
    for n in [128, 256, 512] {
        let y = DataTriple::from_fn(
            GridSpec::uniform(n)?,
            |x| C64::new((3.0 * x).sin(), 0.0),
            |x| C64::new(0.0, 1.0 + x * x),
            |x| C64::new((1.0 - x).powi(2), 0.0),
        );
        let sol = resolvent::apply_resolvent(s, &y, BoundaryVariant::Neumann)?;
        let worst = sol.boundary_residuals().iter().map(|r| r.1).fold(0.0, f64::max);
        println!(
            "N = {n:>3}: ||x|| = {:.6}, ||y|| = {:.6}, equation residual {:.3e}, worst boundary residual {worst:.1e}",
            sol.state.norm_x,
            y.norm_x(),
            sol.equation_residual(&y)
        );
    }
    let c = resolvent::solve_coefficients(s, &DataTriple::zeros(64, 64), BoundaryVariant::Neumann)?;
    println!("det M(is) at s = {s}: {:.6} * exp({:.3})", c.det_m.mantissa, c.det_m.log_scale);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
