// The discrete generator: its kernel, its energy dissipation, and how its
// eigenvalues approach the exact ones.

use waveheat::discretization::{assemble, GridSpec};
use waveheat::spectrum;
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let v = BoundaryVariant::Neumann;
    let gen = assemble(GridSpec::uniform(64)?, v);
    let k = gen.kernel_vector().expect("neumann kernel");
    let ak = gen.apply(&k);
    println!("dim {}, ||A k|| = {:.1e}", gen.dim(), ak.iter().map(|x| x.abs()).fold(0.0, f64::max));

    let z: Vec<f64> = (0..gen.dim()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let rate = gen.energy_dot(&z, &gen.apply(&z));
    println!("<Az, z>_E = {rate:.6e}, -dissipation = {:.6e}", -gen.dissipation(&z));

    let exact = spectrum::eigenvalues(v, 2)?;
    let target = exact.iter().find(|r| r.n == 1).unwrap().lambda.value();
    for n in [50, 100, 200, 400] {
        let d = assemble(GridSpec::uniform(n)?, v);
        let l = d.nearest_eigenvalue(target)?;
        println!("N = {n:>3}: |l_h - l| = {:.3e}", (l - target).norm());
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
