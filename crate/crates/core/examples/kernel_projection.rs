// With free ends the constant displacement is stationary; phi picks out
// that part of the data and the rest decays.

use waveheat::discretization::{assemble, GridSpec};
use waveheat::simulator::{project_kernel, SimulationConfig, Simulator};
use waveheat::state::{sample, StateVector};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let v = BoundaryVariant::Neumann;
    let grid = GridSpec::uniform(64)?;
    let x = StateVector::new(
        sample(64, -1.0, 0.0, |x| 2.0 + (std::f64::consts::PI * x).cos()),
        sample(64, -1.0, 0.0, |_| 0.0),
        sample(64, 0.0, 1.0, |x| (std::f64::consts::PI * x).sin()),
    )?;
    let (x0, x1) = project_kernel(&x, v)?;
    println!("phi(x) = {:.6}, phi(x0) = {:.1e}, kernel part u = {:.6}", x.phi(), x0.phi(), x1.u[0]);

    let gen = assemble(grid, v);
    let sim = Simulator::new(&gen, SimulationConfig::new(1.0 / 128.0, 20.0, grid, v, 64)?)?;
    let z0 = gen.pack(&x)?;
    println!("discrete phi at t = 0: {:.6}", gen.phi(&z0));
    let z = sim.evolve(&z0, 20 * 128);
    let end = gen.unpack(&z);
    println!("after t = 20: u(-1) = {:.6}, u(0) = {:.6}, phi = {:.6}", end.u[0], end.u[64], gen.phi(&z));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
