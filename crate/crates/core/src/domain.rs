//! Initial data in `D(A)` and `D(A^2)`.
//!
//! Each component is a smooth closed-form function (trigonometric terms plus
//! a polynomial). A profile fixes base functions; polynomial corrections of
//! least coefficient norm are then solved so that every boundary and
//! interface condition holds exactly, and a certificate of the resulting
//! residuals is returned with the sampled state.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::characteristic::BoundaryVariant;
use crate::discretization::GridSpec;
use crate::error::{Error, Result};
use crate::state::{sample, StateVector};

pub const CERTIFICATE_TOL: f64 = 1e-12;
const CORRECTION_DEGREE: usize = 7;

/// `sum amp cos(omega (x - origin) + phase) + sum c_p (x - origin)^p`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Smooth {
    pub origin: f64,
    pub trig: Vec<(f64, f64, f64)>,
    pub poly: Vec<f64>,
}

impl Smooth {
    pub fn poly(origin: f64, coeffs: Vec<f64>) -> Self {
        Self {
            origin,
            trig: Vec::new(),
            poly: coeffs,
        }
    }

    /// The `k`-th derivative at `x`.
    pub fn deriv(&self, x: f64, k: usize) -> f64 {
        let t = x - self.origin;
        let mut acc = 0.0;
        for &(a, w, p) in &self.trig {
            // d^k/dt^k cos(w t + p) = w^k cos(w t + p + k pi / 2)
            acc += a * w.powi(k as i32) * (w * t + p + k as f64 * PI / 2.0).cos();
        }
        for (p, &c) in self.poly.iter().enumerate().skip(k) {
            let falling: f64 = (p - k + 1..=p).map(|j| j as f64).product();
            acc += c * falling * t.powi((p - k) as i32);
        }
        acc
    }

    pub fn value(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }

    fn add_poly(&mut self, coeffs: &[f64]) {
        if self.poly.len() < coeffs.len() {
            self.poly.resize(coeffs.len(), 0.0);
        }
        for (a, b) in self.poly.iter_mut().zip(coeffs) {
            *a += b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Comp {
    U,
    V,
    W,
}

/// One linear condition `sum coef * comp^{(order)}(point) = 0`.
#[derive(Clone, Debug)]
struct Constraint {
    name: &'static str,
    terms: Vec<(Comp, usize, f64, f64)>,
}

fn constraints(variant: BoundaryVariant, order: usize) -> Vec<Constraint> {
    use Comp::*;
    let c = |name, terms| Constraint { name, terms };
    let mut out = match variant {
        BoundaryVariant::Neumann => vec![c("u'(-1)", vec![(U, 1, -1.0, 1.0)])],
        BoundaryVariant::Dirichlet => vec![
            c("u(-1)", vec![(U, 0, -1.0, 1.0)]),
            c("v(-1)", vec![(V, 0, -1.0, 1.0)]),
        ],
    };
    out.push(c("w(1)", vec![(W, 0, 1.0, 1.0)]));
    out.push(c("v(0)-w(0)", vec![(V, 0, 0.0, 1.0), (W, 0, 0.0, -1.0)]));
    out.push(c("u'(0)-w'(0)", vec![(U, 1, 0.0, 1.0), (W, 1, 0.0, -1.0)]));
    if order >= 2 {
        // the same conditions on A x = (v, u'', w'')
        match variant {
            BoundaryVariant::Neumann => out.push(c("v'(-1)", vec![(V, 1, -1.0, 1.0)])),
            BoundaryVariant::Dirichlet => out.push(c("u''(-1)", vec![(U, 2, -1.0, 1.0)])),
        }
        out.push(c("w''(1)", vec![(W, 2, 1.0, 1.0)]));
        out.push(c("u''(0)-w''(0)", vec![(U, 2, 0.0, 1.0), (W, 2, 0.0, -1.0)]));
        out.push(c("v'(0)-w'''(0)", vec![(V, 1, 0.0, 1.0), (W, 3, 0.0, -1.0)]));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// A single cosine mode on the wave segment with the string at rest and
    /// no heat; for the Dirichlet end the quarter-wave `sin(pi (xi + 1) / 2)`.
    SmoothBump,
    /// A low-degree polynomial displacement.
    Polynomial,
    /// Polynomial coefficients for `u`, `v` in powers of `xi + 1` and for `w`
    /// in powers of `xi`; used as given.
    Custom { u: Vec<f64>, v: Vec<f64>, w: Vec<f64> },
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::SmoothBump => f.write_str("smooth_bump"),
            Profile::Polynomial => f.write_str("polynomial"),
            Profile::Custom { .. } => f.write_str("custom"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth_bump" | "bump" => Ok(Profile::SmoothBump),
            "polynomial" | "poly" => Ok(Profile::Polynomial),
            other => Err(Error::InvalidArgument(format!("unknown profile '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintResidual {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct DomainData {
    pub u: Smooth,
    pub v: Smooth,
    pub w: Smooth,
    pub order: usize,
    pub variant: BoundaryVariant,
    pub certificate: Vec<ConstraintResidual>,
}

impl DomainData {
    pub fn max_residual(&self) -> f64 {
        self.certificate.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn sample(&self, grid: GridSpec) -> StateVector<f64> {
        let (nw, nh) = (grid.n_wave, grid.n_heat);
        let u = sample(nw, -1.0, 0.0, |x| self.u.value(x));
        let du = sample(nw, -1.0, 0.0, |x| self.u.deriv(x, 1));
        StateVector::with_derivative(
            u,
            sample(nw, -1.0, 0.0, |x| self.v.value(x)),
            sample(nh, 0.0, 1.0, |x| self.w.value(x)),
            Some(du),
        )
        .expect("grid sizes are consistent")
    }

    /// `A x = (v, u'', w'')` as closed-form functions.
    pub fn apply_generator(&self) -> (Smooth, Smooth, Smooth) {
        let d2 = |s: &Smooth| {
            let trig = s
                .trig
                .iter()
                .map(|&(a, w, p)| (a * w * w, w, p + PI))
                .collect();
            let poly = (2..s.poly.len())
                .map(|p| s.poly[p] * (p * (p - 1)) as f64)
                .collect();
            Smooth {
                origin: s.origin,
                trig,
                poly,
            }
        };
        (self.v.clone(), d2(&self.u), d2(&self.w))
    }
}

fn component<'a>(c: Comp, u: &'a Smooth, v: &'a Smooth, w: &'a Smooth) -> &'a Smooth {
    match c {
        Comp::U => u,
        Comp::V => v,
        Comp::W => w,
    }
}

fn evaluate(cons: &Constraint, u: &Smooth, v: &Smooth, w: &Smooth) -> f64 {
    cons.terms
        .iter()
        .map(|&(c, k, x, coef)| coef * component(c, u, v, w).deriv(x, k))
        .sum()
}

/// Builds a `D(A^order)` datum for `profile` (`order` 1 or 2).
pub fn make_domain_data(profile: &Profile, variant: BoundaryVariant, order: usize) -> Result<DomainData> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!("order {order}, expected 1 or 2")));
    }
    let zero_wave = Smooth::poly(-1.0, vec![]);
    let zero_heat = Smooth::poly(0.0, vec![]);
    let (mut u, mut v, mut w, correct) = match profile {
        Profile::SmoothBump => {
            let u = match variant {
                BoundaryVariant::Neumann => Smooth {
                    origin: -1.0,
                    trig: vec![(1.0, PI, 0.0)],
                    poly: vec![],
                },
                BoundaryVariant::Dirichlet => Smooth {
                    origin: -1.0,
                    trig: vec![(1.0, PI / 2.0, -PI / 2.0)],
                    poly: vec![],
                },
            };
            (u, zero_wave.clone(), zero_heat.clone(), true)
        }
        Profile::Polynomial => {
            let u = match variant {
                BoundaryVariant::Neumann => Smooth::poly(-1.0, vec![1.0, 0.0, -1.0]),
                BoundaryVariant::Dirichlet => Smooth::poly(-1.0, vec![0.0, 1.0]),
            };
            (u, zero_wave.clone(), zero_heat.clone(), true)
        }
        Profile::Custom { u, v, w } => (
            Smooth::poly(-1.0, u.clone()),
            Smooth::poly(-1.0, v.clone()),
            Smooth::poly(0.0, w.clone()),
            false,
        ),
    };
    for f in [&u, &v, &w] {
        let finite = f.poly.iter().all(|c| c.is_finite())
            && f.trig.iter().all(|t| t.0.is_finite() && t.1.is_finite() && t.2.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("non-finite profile coefficient".into()));
        }
    }

    let cons = constraints(variant, order);
    if correct {
        // unknowns: CORRECTION_DEGREE + 1 monomial coefficients per component
        let nb = CORRECTION_DEGREE + 1;
        let mut mat = DMatrix::<f64>::zeros(cons.len(), 3 * nb);
        let mut rhs = DVector::<f64>::zeros(cons.len());
        for (i, c) in cons.iter().enumerate() {
            rhs[i] = -evaluate(c, &u, &v, &w);
            for &(comp, k, x, coef) in &c.terms {
                let (slot, origin) = match comp {
                    Comp::U => (0, -1.0),
                    Comp::V => (1, -1.0),
                    Comp::W => (2, 0.0),
                };
                for p in 0..nb {
                    let mut e = vec![0.0; p + 1];
                    e[p] = 1.0;
                    mat[(i, slot * nb + p)] += coef * Smooth::poly(origin, e).deriv(x, k);
                }
            }
        }
        let sol = mat
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let part = |s: usize| sol.rows(s * nb, nb).iter().copied().collect::<Vec<f64>>();
        u.add_poly(&part(0));
        v.add_poly(&part(1));
        w.add_poly(&part(2));
    }
    let certificate: Vec<ConstraintResidual> = cons
        .iter()
        .map(|c| ConstraintResidual {
            name: c.name,
            residual: evaluate(c, &u, &v, &w).abs(),
        })
        .collect();
    let worst = certificate.iter().map(|c| c.residual).fold(0.0, f64::max);
    if worst > CERTIFICATE_TOL {
        return Err(Error::InfeasibleProfile { residual: worst });
    }
    Ok(DomainData {
        u,
        v,
        w,
        order,
        variant,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_smooth_functions() {
        let s = Smooth {
            origin: -1.0,
            trig: vec![(2.0, 3.0, 0.5)],
            poly: vec![1.0, -2.0, 0.5, 4.0],
        };
        let x: f64 = -0.3;
        let t = x + 1.0;
        let d3 = 2.0 * 27.0 * (3.0 * t + 0.5).sin() + 24.0;
        assert!((s.deriv(x, 3) - d3).abs() < 1e-12);
    }

    #[test]
    fn bump_needs_no_correction_in_domain_of_a() {
        let d = make_domain_data(&Profile::SmoothBump, BoundaryVariant::Neumann, 1).unwrap();
        assert!(d.u.poly.iter().all(|c| c.abs() < 1e-14));
        assert!(d.max_residual() <= CERTIFICATE_TOL);
    }

    #[test]
    fn second_order_certificate_covers_a_x() {
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            for p in [Profile::SmoothBump, Profile::Polynomial] {
                let d = make_domain_data(&p, v, 2).unwrap();
                assert!(d.certificate.iter().any(|c| c.name == "w''(1)"));
                assert!(d.max_residual() <= CERTIFICATE_TOL, "{v} {p}");
                // A x satisfies the first-order conditions
                let (a, b, c) = d.apply_generator();
                for cons in constraints(v, 1) {
                    assert!(evaluate(&cons, &a, &b, &c).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn constant_displacement_is_valid_neumann_data() {
        let one = Profile::Custom {
            u: vec![1.0],
            v: vec![],
            w: vec![],
        };
        assert!(make_domain_data(&one, BoundaryVariant::Neumann, 1).is_ok());
        assert!(matches!(
            make_domain_data(&one, BoundaryVariant::Dirichlet, 1),
            Err(Error::InfeasibleProfile { .. })
        ));
    }
}
