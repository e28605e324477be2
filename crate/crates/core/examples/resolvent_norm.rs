// Discrete resolvent norm: Lanczos against the dense SVD, the spectral
// lower bound, the peak near a resonance and the sampled lower bound.

use waveheat::discretization::{assemble, GridSpec};
use waveheat::resolvent;
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let v = BoundaryVariant::Neumann;
    let small = assemble(GridSpec::uniform(48)?, v);
    let s = 8.0;
    let lanczos = resolvent::resolvent_norm_discrete(s, &small)?;
    let dense = resolvent::resolvent_norm_dense(s, &small)?;
    let dist = resolvent::spectral_distance(s, &small)?;
    println!("s = {s}: Lanczos {lanczos:.10}, dense {dense:.10}, 1/dist {:.6}", 1.0 / dist);

    let s = 60.0;
    let grid = resolvent::sweep_grid(s);
    let disc = assemble(grid, v);
    let peak = resolvent::resolvent_peak(s, &disc)?;
    let (s_sampled, sampled) = resolvent::sampled_peak(peak.s, 50, grid, v, 1)?;
    println!(
        "peak near s = {s}: s = {:.6}, ||R|| = {:.4} (eigenvalue {:.5}), sampled {sampled:.4} at s = {s_sampled:.6}, N = {}",
        peak.s, peak.norm, peak.eigenvalue, grid.n_wave
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
