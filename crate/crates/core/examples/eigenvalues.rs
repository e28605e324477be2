// Polishes the first few eigenvalues from their lattice seeds.

use waveheat::spectrum::{self, EigenvalueSeed};
use waveheat::BoundaryVariant;

pub fn run_example() -> waveheat::Result<()> {
    for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
        println!("{v}:");
        for r in spectrum::eigenvalues(v, 6)?.iter().filter(|r| r.n >= 0) {
            let seed = EigenvalueSeed::for_variant(v, r.n).expect("seed");
            println!(
                "  n = {:>2}  lambda = {:+.12} {:+.12}i  seed {:.4}i  in disk: {}  residual {:.1e}",
                r.n,
                r.lambda.value().re,
                r.lambda.value().im,
                seed.center.value().im,
                r.contained,
                r.residual
            );
            assert!(r.lambda.value().re < 0.0);
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
