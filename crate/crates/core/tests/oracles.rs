#![allow(clippy::excessive_precision)]

//! Values computed once with 40-digit arithmetic and frozen here.

use waveheat::characteristic::{lemma32_ratio, Characteristic};
use waveheat::freq::{ComplexFrequency, C64};
use waveheat::resolvent::{det_expansion, det_from_characteristic};
use waveheat::spectrum::{polish, roots_in_rectangle, EigenvalueSeed, Rectangle};
use waveheat::BoundaryVariant::{self, Dirichlet, Neumann};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn characteristic_values() {
    let cases: &[(C64, BoundaryVariant, C64)] = &[
        (c(5.0, 7.0), Neumann, c(-1443.0117832370663611, 1288.0569479205727523)),
        (c(5.0, 7.0), Dirichlet, c(-1443.035348142410379, 1287.9651184608778174)),
        (c(-3.0, 0.5), Neumann, c(-8.3021148399008600934, -9.9718507696671024762)),
        (c(-3.0, 0.5), Dirichlet, c(8.2719078678139456163, 9.9964494172292309374)),
        (c(0.2, 40.0), Neumann, c(-26.234512540494811444, 182.84404836854264337)),
        (c(0.2, 40.0), Dirichlet, c(178.29394563160183908, 167.74075988774381036)),
    ];
    for &(l, v, want) in cases {
        let got = v.char_fn(&ComplexFrequency::new(l)).unwrap();
        assert!(rel(got, want) < 1e-13, "{v} at {l}: {got} vs {want}");
    }
}

#[test]
fn characteristic_derivatives() {
    let cases = [
        (c(5.0, 7.0), c(-1563.9718468811263755, 1681.958844365772621)),
        (c(-3.0, 0.5), c(10.558613130358360757, 14.458388561012325552)),
        (c(0.2, 40.0), c(189.33296607305966597, 180.21991997796239013)),
    ];
    for (l, want) in cases {
        let got = Neumann.char_fn_deriv(&ComplexFrequency::new(l)).unwrap();
        assert!(rel(got, want) < 1e-12, "{l}: {got} vs {want}");
    }
}

#[test]
fn polished_roots() {
    let cases: &[(BoundaryVariant, i64, C64)] = &[
        (Neumann, 0, c(-0.50321147613682114907, 2.2052996976448137949)),
        (Neumann, 1, c(-0.29586769237902242797, 5.0874275315510632786)),
        (Neumann, 10, c(-0.1214859523075931445, 33.110994556394967942)),
        (Neumann, 100, c(-0.039747756768158264125, 315.76989846230868406)),
        (Dirichlet, 1, c(-0.36779995364999181609, 3.6117893298580890519)),
        (Dirichlet, 10, c(-0.12439234354944120612, 31.543294679010886186)),
        (Dirichlet, 100, c(-0.039846753119692324017, 314.19920181278458377)),
    ];
    for &(v, n, want) in cases {
        let seed = EigenvalueSeed::for_variant(v, n).unwrap();
        let got = polish(&seed, v).unwrap().lambda.value();
        assert!((got - want).norm() < 1e-12 * want.norm(), "{v} n={n}: {got} vs {want}");
    }
}

#[test]
fn real_roots() {
    let rect = Rectangle::new(-25.0, -0.1, -0.5, 0.5);
    let mut neumann: Vec<f64> = roots_in_rectangle(&Neumann, &rect, 12).unwrap().iter().map(|z| z.re).collect();
    neumann.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(neumann.len(), 2);
    assert!((neumann[0] + 20.190728556426629986).abs() < 1e-10);
    assert!((neumann[1] + 0.85906674045127728104).abs() < 1e-12);
    let dirichlet = roots_in_rectangle(&Dirichlet, &rect, 12).unwrap();
    assert_eq!(dirichlet.len(), 1);
    assert!((dirichlet[0].re + 20.190728556426629963).abs() < 1e-10);
}

/// The low spectrum off the seed lattice: seeded roots plus these extras
/// account for every zero in the box.
#[test]
fn off_lattice_roots_complete_the_low_spectrum() {
    let extra = c(-0.72563719242990139308, 0.97155715012284847056);
    let near = Rectangle::new(-1.5, -0.1, 0.5, 1.5);
    let found = roots_in_rectangle(&Dirichlet, &near, 12).unwrap();
    assert_eq!(found.len(), 1);
    assert!(rel(found[0], extra) < 1e-12, "{}", found[0]);
    assert!(roots_in_rectangle(&Neumann, &near, 12).unwrap().is_empty());

    let boxed = Rectangle::new(-25.0, -0.05, -24.0, 24.0);
    for (v, extras) in [(Neumann, 2), (Dirichlet, 3)] {
        let seeded = waveheat::spectrum::eigenvalues(v, 12)
            .unwrap()
            .iter()
            .filter(|r| boxed.contains(r.lambda.value()))
            .count() as i64;
        let total = waveheat::spectrum::count_zeros_rectangle(&boxed, v).unwrap();
        assert_eq!(total, seeded + extras, "{v}");
    }
}

#[test]
fn growth_ratio_values() {
    for (s, want) in [(2.0, 0.41596508050752112131), (10.0, 1.5319189119822171393), (1000.0, 9.1889916579633716204)] {
        let got = lemma32_ratio(s).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "s={s}: {got}");
        assert!((lemma32_ratio(-s).unwrap() - want).abs() < 1e-12 * want);
    }
}

#[test]
fn coupling_determinant() {
    for (v, want) in [
        (Neumann, c(-2.0626087978934610264, 143.31867683640042484)),
        (Dirichlet, c(32.685539687438077268, 48.556034176020409191)),
    ] {
        for d in [det_expansion(10.0, v), det_from_characteristic(&v, 10.0)] {
            let got = d.materialize().unwrap();
            assert!(rel(got, want) < 1e-13, "{v}: {got} vs {want}");
        }
    }
}
