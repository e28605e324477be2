// High eigenvalues approach the imaginary axis like |Im l|^{-1/2}.

use waveheat::spectrum;
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let recs = spectrum::eigenvalues(BoundaryVariant::Neumann, 200)?;
    let upper: Vec<_> = recs.into_iter().filter(|r| r.n >= 50).collect();
    let report = spectrum::asymptotics_report(&upper)?;
    for row in report.rows.iter().step_by(30) {
        println!(
            "n = {:>3}  Re l = {:+.6e}  |Re l| |Im l|^1/2 = {:.6}",
            row.n, row.lambda.re, row.product
        );
    }
    println!(
        "band over the upper half of the rows: [{:.6}, {:.6}], ratio {:.4}",
        report.c_lower,
        report.c_upper,
        report.band_ratio()
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
