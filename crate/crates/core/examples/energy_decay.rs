// Crank-Nicolson energy decay on a coarse grid, for D(A) and D(A^2) data.
// The fine study at N = 800 runs through `waveheat simulate`.

use waveheat::discretization::GridSpec;
use waveheat::domain::{make_domain_data, Profile};
use waveheat::simulator::{self, SimulationConfig};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let v = BoundaryVariant::Neumann;
    let cfg = SimulationConfig::new(1.0 / 200.0, 40.0, GridSpec::uniform(100)?, v, 2)?;
    let mut reports = Vec::new();
    for k in [1, 2] {
        let data = make_domain_data(&Profile::SmoothBump, v, k)?;
        let r = simulator::decay_study(&data, cfg)?;
        println!(
            "k = {k}: E(0) = {:.4}, clean until t = {:.2}, slope {:.3} on [{:.2}, {:.2}], balance {:.1e}",
            r.series.initial_energy(),
            r.horizon,
            r.fit.slope,
            r.fit.window.0,
            r.fit.window.1,
            r.series.balance_per_unit_time()
        );
        reports.push(r);
    }
    let (a, b) = simulator::matched_fits(&reports[0], &reports[1])?;
    println!("same window: {:.3} vs {:.3}", a.slope, b.slope);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
