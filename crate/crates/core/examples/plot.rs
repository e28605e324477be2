// Draws the eigenvalues of both variants into one SVG.

use waveheat::plot::{Chart, Series, Style};
use waveheat::spectrum;
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    let mut chart = Chart::new("eigenvalues", "Re l", "Im l");
    for (v, color) in [(BoundaryVariant::Neumann, "#1f5fa8"), (BoundaryVariant::Dirichlet, "#c0392b")] {
        let pts = spectrum::eigenvalues(v, 40)?
            .iter()
            .map(|r| (r.lambda.value().re, r.lambda.value().im))
            .collect();
        chart = chart.with(Series::new(v.name(), pts, Style::Markers, color));
    }
    let path = std::env::temp_dir().join("waveheat_eigenvalues.svg");
    chart.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
