// Initial data in D(A) and D(A^2) with a certificate of every constraint.

use waveheat::domain::{make_domain_data, Profile};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
        for profile in [Profile::SmoothBump, Profile::Polynomial] {
            for k in [1, 2] {
                let d = make_domain_data(&profile, v, k)?;
                println!("{v} {profile} k = {k}: {} constraints, max residual {:.1e}", d.certificate.len(), d.max_residual());
                for c in d.certificate.iter().filter(|c| c.residual > 1e-14) {
                    println!("    {} {:.1e}", c.name, c.residual);
                }
            }
        }
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
