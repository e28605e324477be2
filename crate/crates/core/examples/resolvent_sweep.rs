// A short peak-snapped sweep and its log-log slope; the full sweep is the
// `resolvent` subcommand.

use waveheat::resolvent::{self, SweepConfig};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let cfg = SweepConfig {
        s_values: resolvent::log_spaced(10.0, 300.0, 6),
        variant: BoundaryVariant::Dirichlet,
        trials: 0,
        seed: 7,
        check_refinement: false,
    };
    let rows = resolvent::sweep(&cfg)?;
    let mut csv = Vec::new();
    resolvent::write_resolvent_csv(&mut csv, &rows)?;
    print!("{}", String::from_utf8_lossy(&csv));
    let xs: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.norm_discrete).collect();
    let (slope, se) = resolvent::loglog_slope(&xs, &ys);
    println!("slope {slope:.3} +- {se:.3}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
