use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use waveheat::discretization::{assemble, GridSpec};
use waveheat::domain::{make_domain_data, Profile};
use waveheat::freq::C64;
use waveheat::resolvent::{self, DataTriple};
use waveheat::spectrum;
use waveheat::BoundaryVariant::{self, Dirichlet, Neumann};

fn order(h: &[f64], e: &[f64]) -> f64 {
    resolvent::loglog_slope(h, e).0
}

#[test]
fn discrete_eigenvalues_converge_at_second_order() {
    let levels = [64usize, 128, 256];
    for variant in [Neumann, Dirichlet] {
        let exact = spectrum::eigenvalues(variant, 4).unwrap();
        for r in exact.iter().filter(|r| r.n >= 0) {
            let l = r.lambda.value();
            let errs: Vec<f64> = levels
                .iter()
                .map(|&n| {
                    let disc = assemble(GridSpec::uniform(n).unwrap(), variant);
                    (disc.nearest_eigenvalue(l).unwrap() - l).norm()
                })
                .collect();
            let hs: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
            let p = order(&hs, &errs);
            assert!((p - 2.0).abs() <= 0.3, "{variant} n={}: order {p:.3}, errors {errs:?}", r.n);
        }
    }
}

fn manufactured(variant: BoundaryVariant, s: f64, n: usize) -> f64 {
    let data = make_domain_data(&Profile::SmoothBump, variant, 1).unwrap();
    let (av, au, aw) = data.apply_generator();
    let is = C64::new(0.0, s);
    let grid = GridSpec::uniform(n).unwrap();
    let y = DataTriple::from_fn(
        grid,
        |x| is * data.u.value(x) - av.value(x),
        |x| is * data.v.value(x) - au.value(x),
        |x| is * data.w.value(x) - aw.value(x),
    );
    let x = resolvent::apply_resolvent(s, &y, variant).unwrap().state;
    let exact = data.sample(grid);
    let diff = |a: &[C64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    diff(&x.u, &exact.u).max(diff(&x.v, &exact.v)).max(diff(&x.w, &exact.w))
}

#[test]
fn resolvent_inverts_the_generator_on_domain_data() {
    for variant in [Neumann, Dirichlet] {
        for s in [2.0, 10.0, 40.0] {
            let e: Vec<f64> = [128, 256, 512].iter().map(|&n| manufactured(variant, s, n)).collect();
            assert!(e[2] < 1e-3, "{variant} s={s}: {e:?}");
            let p = order(&[4.0, 2.0, 1.0], &e);
            assert!(p >= 1.7, "{variant} s={s}: order {p:.3} from {e:?}");
        }
    }
}

#[test]
fn sampled_norm_is_a_sharp_lower_bound() {
    let s_target = 100.0;
    for variant in [Neumann, Dirichlet] {
        let grid = resolvent::sweep_grid(s_target);
        let disc = assemble(grid, variant);
        let peak = resolvent::resolvent_peak(s_target, &disc).unwrap();
        let (_, sampled) = resolvent::sampled_peak(peak.s, 200, grid, variant, 7).unwrap();
        let ratio = sampled / peak.norm;
        assert!(ratio <= 1.05, "{variant}: {sampled} vs {}", peak.norm);
        assert!(ratio >= 0.5, "{variant}: {sampled} vs {}", peak.norm);
    }
}

#[test]
fn lanczos_matches_dense_svd() {
    for variant in [Neumann, Dirichlet] {
        let disc = assemble(GridSpec::uniform(48).unwrap(), variant);
        for s in [3.0, 7.5, 12.0] {
            let a = resolvent::resolvent_norm_discrete(s, &disc).unwrap();
            let b = resolvent::resolvent_norm_dense(s, &disc).unwrap();
            assert!((a - b).abs() <= 1e-8 * b, "{variant} s={s}: {a} {b}");
        }
    }
}

#[test]
fn closed_form_is_linear() {
    let grid = GridSpec::uniform(128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = resolvent::random_data(10.0, grid, Neumann, &mut rng);
    let b = resolvent::random_data(10.0, grid, Neumann, &mut rng);
    let sum = DataTriple::new(
        a.f.iter().zip(&b.f).map(|(p, q)| p + 2.0 * q).collect(),
        a.g.iter().zip(&b.g).map(|(p, q)| p + 2.0 * q).collect(),
        a.h.iter().zip(&b.h).map(|(p, q)| p + 2.0 * q).collect(),
    )
    .unwrap();
    let ra = resolvent::apply_resolvent(10.0, &a, Neumann).unwrap().state;
    let rb = resolvent::apply_resolvent(10.0, &b, Neumann).unwrap().state;
    let rs = resolvent::apply_resolvent(10.0, &sum, Neumann).unwrap().state;
    let err = rs
        .u
        .iter()
        .zip(ra.u.iter().zip(&rb.u))
        .map(|(s, (p, q))| (s - p - 2.0 * q).norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-12 * rs.norm_x.max(1.0), "{err}");
}
