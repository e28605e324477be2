//! Characteristic functions whose zeros are the eigenvalues of the generator.
//!
//! For the Neumann end the determinant is
//! `D_N(l) = sqrt(l) cosh(l) cosh(sqrt l) + sinh(l) sinh(sqrt l)` and for the
//! Dirichlet end `D_D(l) = sqrt(l) sinh(l) cosh(sqrt l) + cosh(l) sinh(sqrt l)`.
//! Both are odd in `sqrt(l)`, so `D = sqrt(l) * E` with `E` entire. The root
//! finder and the contour counter work with `E`, which has no branch cut;
//! `D` itself is available through [`Characteristic::char_fn`] and friends.
//!
//! All products of hyperbolic functions are carried with the common envelope
//! `exp(|Re l| + Re sqrt(l))` factored out.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::freq::{cosh_scaled, sinh_scaled, ComplexFrequency, Scaled, C64, I};

/// Treatment of the wave end at `xi = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryVariant {
    /// `u_xi(-1) = 0`.
    Neumann,
    /// `u(-1) = 0`.
    Dirichlet,
}

impl BoundaryVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryVariant::Neumann => "neumann",
            BoundaryVariant::Dirichlet => "dirichlet",
        }
    }

    /// Whether `0` belongs to the spectrum (only for the Neumann end).
    pub fn has_zero_eigenvalue(&self) -> bool {
        matches!(self, BoundaryVariant::Neumann)
    }
}

impl fmt::Display for BoundaryVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryVariant::Neumann),
            "dirichlet" => Ok(BoundaryVariant::Dirichlet),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// The reduced function `E = D / sqrt(l)` and its derivative, both as
/// mantissas of the shared envelope `exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
pub struct Reduced {
    pub value: C64,
    pub deriv: C64,
    pub log_scale: f64,
}

/// A characteristic function. Implemented by [`BoundaryVariant`]; the trait
/// exists so verification runs can substitute a deliberately broken model.
pub trait Characteristic: Sync {
    fn variant(&self) -> BoundaryVariant;

    /// Evaluates the entire reduced function `E` and `dE/dl`.
    fn reduced(&self, lambda: &ComplexFrequency) -> Reduced;

    /// `D(l)` as `mantissa * exp(log_scale)` with `|mantissa|` in `[1e-2, 1e2]`
    /// unless `D(l) = 0`.
    fn char_fn_scaled(&self, lambda: &ComplexFrequency) -> Scaled {
        let r = self.reduced(lambda);
        Scaled::new(lambda.sqrt_value() * r.value, r.log_scale).normalized()
    }

    /// `D(l)` unscaled; fails with `Overflow` when not representable.
    fn char_fn(&self, lambda: &ComplexFrequency) -> Result<C64> {
        let s = self.char_fn_scaled(lambda);
        s.materialize().ok_or(Error::Overflow {
            log_magnitude: s.log_abs(),
        })
    }

    /// `dD/dl` in scaled form. Undefined on the closed negative real axis.
    fn char_fn_deriv_scaled(&self, lambda: &ComplexFrequency) -> Result<Scaled> {
        if lambda.on_cut() {
            return Err(Error::DegenerateInput(format!(
                "derivative requested at {lambda}, on the branch cut of sqrt"
            )));
        }
        let mu = lambda.sqrt_value();
        let r = self.reduced(lambda);
        // D = mu E  =>  D' = E / (2 mu) + mu E'
        Ok(Scaled::new(r.value / (2.0 * mu) + mu * r.deriv, r.log_scale).normalized())
    }

    fn char_fn_deriv(&self, lambda: &ComplexFrequency) -> Result<C64> {
        let s = self.char_fn_deriv_scaled(lambda)?;
        s.materialize().ok_or(Error::Overflow {
            log_magnitude: s.log_abs(),
        })
    }

    /// `|D(l)|` divided by its natural size `(1 + |sqrt l|) exp(|Re l| + Re sqrt l)`.
    fn relative_residual(&self, lambda: &ComplexFrequency) -> f64 {
        let mu = lambda.sqrt_value();
        let r = self.reduced(lambda);
        (mu * r.value).norm() / (1.0 + mu.norm())
    }
}

/// `sinh(mu)/mu`, the derivative of `cosh(sqrt l)`'s partner, scaled by
/// `exp(-Re mu)`, and `d/dl (sinh(mu)/mu)` with the same scale.
fn sinhc_terms(mu: C64) -> (C64, C64) {
    let scale = (-mu.re).exp();
    if mu.norm() < 0.1 {
        let m2 = mu * mu;
        let sinhc = 1.0 + m2 / 6.0 * (1.0 + m2 / 20.0 * (1.0 + m2 / 42.0 * (1.0 + m2 / 72.0)));
        let dsinhc = 1.0 / 6.0 + m2 / 60.0 + m2 * m2 / 1680.0 + m2 * m2 * m2 / 90720.0;
        (sinhc * scale, dsinhc * scale)
    } else {
        let sinhc = sinh_scaled(mu) / mu;
        let dsinhc = (cosh_scaled(mu) - sinhc) / (2.0 * mu * mu);
        (sinhc, dsinhc)
    }
}

impl Characteristic for BoundaryVariant {
    fn variant(&self) -> BoundaryVariant {
        *self
    }

    fn reduced(&self, lambda: &ComplexFrequency) -> Reduced {
        let l = lambda.value();
        let mu = lambda.sqrt_value();
        let log_scale = l.re.abs() + mu.re;
        let (ch, sh) = (cosh_scaled(l), sinh_scaled(l));
        let chm = cosh_scaled(mu);
        let (sc, dsc) = sinhc_terms(mu);
        let (value, deriv) = match self {
            BoundaryVariant::Neumann => (
                ch * chm + sh * sc,
                sh * (chm + dsc) + 1.5 * ch * sc,
            ),
            BoundaryVariant::Dirichlet => (
                sh * chm + ch * sc,
                ch * (chm + dsc) + 1.5 * sh * sc,
            ),
        };
        Reduced {
            value,
            deriv,
            log_scale,
        }
    }
}

pub fn char_fn(lambda: &ComplexFrequency, variant: BoundaryVariant) -> Result<C64> {
    variant.char_fn(lambda)
}

pub fn char_fn_scaled(lambda: &ComplexFrequency, variant: BoundaryVariant) -> Scaled {
    variant.char_fn_scaled(lambda)
}

pub fn char_fn_deriv(lambda: &ComplexFrequency, variant: BoundaryVariant) -> Result<C64> {
    variant.char_fn_deriv(lambda)
}

/// Distance below which a point counts as sitting on a pole in [`fg_split`].
pub const POLE_GUARD: f64 = 1e-8;

/// `F(l) = coth(l)` and `G(l) = tanh(sqrt l)/sqrt l`, with
/// `(F + G) sinh(l) sqrt(l) cosh(sqrt l) = D_N(l)`.
pub fn fg_split(lambda: &ComplexFrequency) -> Result<(C64, C64)> {
    let l = lambda.value();
    let mu = lambda.sqrt_value();
    let pi = std::f64::consts::PI;

    let n = (l.im / pi).round();
    if (l - I * (n * pi)).norm() < POLE_GUARD {
        return Err(Error::PoleError(format!("{lambda} (coth pole at {n}*pi*i)")));
    }
    // cosh(mu) = 0 at mu = (k + 1/2) pi i, i.e. l = -((k + 1/2) pi)^2
    if l.re < 0.0 {
        let k = ((-l.re).sqrt() / pi - 0.5).round().max(0.0);
        let pole = -((k + 0.5) * pi).powi(2);
        if (l - C64::new(pole, 0.0)).norm() < POLE_GUARD {
            return Err(Error::PoleError(format!("{lambda} (tanh pole at {pole})")));
        }
    }

    let f = cosh_scaled(l) / sinh_scaled(l);
    let g = if mu.norm() < 1e-4 {
        let m2 = mu * mu;
        1.0 - m2 / 3.0 + 2.0 * m2 * m2 / 15.0
    } else {
        sinh_scaled(mu) / (cosh_scaled(mu) * mu)
    };
    Ok((f, g))
}

/// `|D_N(i s)| exp(-|s|^{1/2} / sqrt 2)` for `|s| >= 2`.
pub fn lemma32_ratio(s: f64) -> Result<f64> {
    if !(s.abs() >= 2.0) || !s.is_finite() {
        return Err(Error::DomainError(format!("|s| = {} < 2", s.abs())));
    }
    let lambda = ComplexFrequency::imaginary(s);
    let r = BoundaryVariant::Neumann.reduced(&lambda);
    // log_scale = |Re(i s)| + Re sqrt(i s) = |s|^{1/2}/sqrt 2
    Ok((lambda.sqrt_value() * r.value).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(re: f64, im: f64) -> ComplexFrequency {
        ComplexFrequency::new(C64::new(re, im))
    }

    fn direct(l: C64, variant: BoundaryVariant) -> C64 {
        let mu = crate::freq::principal_sqrt(l);
        match variant {
            BoundaryVariant::Neumann => mu * l.cosh() * mu.cosh() + l.sinh() * mu.sinh(),
            BoundaryVariant::Dirichlet => mu * l.sinh() * mu.cosh() + l.cosh() * mu.sinh(),
        }
    }

    #[test]
    fn zero_is_a_root_of_both_determinants() {
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            assert_eq!(char_fn(&cf(0.0, 0.0), v).unwrap(), C64::new(0.0, 0.0));
            let s = char_fn_scaled(&cf(0.0, 0.0), v);
            assert_eq!(s, Scaled::ZERO);
        }
    }

    #[test]
    fn positive_on_positive_reals() {
        let d = char_fn(&cf(1.0, 0.0), BoundaryVariant::Neumann).unwrap();
        assert!(d.re > 0.0 && d.im.abs() < 1e-15 * d.re);
        let expect = 1f64.cosh() * 1f64.cosh() + 1f64.sinh() * 1f64.sinh();
        assert!((d.re - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn schwarz_reflection_at_one_plus_two_i() {
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            let a = char_fn(&cf(1.0, 2.0), v).unwrap();
            let b = char_fn(&cf(1.0, -2.0), v).unwrap();
            assert!((a.conj() - b).norm() <= 1e-14 * a.norm());
            let da = char_fn_deriv(&cf(1.0, 2.0), v).unwrap();
            let db = char_fn_deriv(&cf(1.0, -2.0), v).unwrap();
            assert!((da.conj() - db).norm() <= 1e-14 * da.norm());
        }
    }

    #[test]
    fn matches_direct_evaluation_in_moderate_range() {
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            for &(re, im) in &[(0.3, 0.2), (-1.0, 3.0), (5.0, 7.0), (-8.0, -20.0), (12.0, 0.5)] {
                let l = C64::new(re, im);
                let got = char_fn(&cf(re, im), v).unwrap();
                let want = direct(l, v);
                assert!((got - want).norm() <= 1e-13 * want.norm(), "{v} {l}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn huge_imaginary_argument_stays_finite_in_scaled_form() {
        let l = cf(0.0, 1e6);
        let s = char_fn_scaled(&l, BoundaryVariant::Neumann);
        assert!(s.mantissa.norm().is_finite());
        assert!((1e-2..=1e2).contains(&s.mantissa.norm()));
        let envelope = l.sqrt_value().re;
        assert!((s.log_scale - envelope).abs() < 10.0);
        assert!(matches!(char_fn(&l, BoundaryVariant::Neumann), Err(Error::Overflow { .. })));
    }

    #[test]
    fn derivative_rejected_on_cut() {
        for x in [0.0, -1.0] {
            let e = char_fn_deriv(&cf(x, 0.0), BoundaryVariant::Neumann);
            assert!(matches!(e, Err(Error::DegenerateInput(_))));
        }
    }

    #[test]
    fn derivative_matches_central_difference_at_2i() {
        let h = 1e-6;
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            let l = C64::new(0.0, 2.0);
            let d = char_fn_deriv(&ComplexFrequency::new(l), v).unwrap();
            let fd = (direct(l + h, v) - direct(l - h, v)) / (2.0 * h);
            assert!((d - fd).norm() / d.norm() < 1e-6);
        }
    }

    #[test]
    fn small_sqrt_series_is_continuous() {
        // both branches of sinhc_terms agree near the switch radius
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            let a = v.reduced(&cf(0.0099999, 1e-4));
            let b = v.reduced(&cf(0.0100001, 1e-4));
            assert!((a.value - b.value).norm() < 1e-6);
            assert!((a.deriv - b.deriv).norm() < 1e-5);
        }
    }

    #[test]
    fn fg_values_at_one() {
        let (f, g) = fg_split(&cf(1.0, 0.0)).unwrap();
        assert!((f.re - 1f64.tanh().recip()).abs() < 1e-14 && f.im.abs() < 1e-15);
        assert!((g.re - 1f64.tanh()).abs() < 1e-14 && g.im.abs() < 1e-15);
    }

    #[test]
    fn coth_vanishes_at_half_pi_i() {
        let (f, _) = fg_split(&cf(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(f.norm() < 1e-15);
    }

    #[test]
    fn fg_poles_rejected() {
        let pi = std::f64::consts::PI;
        assert!(matches!(fg_split(&cf(0.0, 3.0 * pi)), Err(Error::PoleError(_))));
        assert!(matches!(fg_split(&cf(0.0, 0.0)), Err(Error::PoleError(_))));
        assert!(matches!(
            fg_split(&cf(-(1.5 * pi).powi(2), 0.0)),
            Err(Error::PoleError(_))
        ));
    }

    #[test]
    fn fg_product_identity_at_three_plus_four_i() {
        let l = cf(3.0, 4.0);
        let (f, g) = fg_split(&l).unwrap();
        let v = l.value();
        let mu = l.sqrt_value();
        let lhs = (f + g) * v.sinh() * mu * mu.cosh();
        let rhs = char_fn(&l, BoundaryVariant::Neumann).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }

    #[test]
    fn lemma_ratio_domain_and_positivity() {
        assert!(matches!(lemma32_ratio(1.5), Err(Error::DomainError(_))));
        assert!(lemma32_ratio(2.0).unwrap() > 0.0);
        assert!(lemma32_ratio(100.0).unwrap() > 0.0);
        assert!(lemma32_ratio(-100.0).unwrap() > 0.0);
    }

    #[test]
    fn variant_parses() {
        assert_eq!("Neumann".parse::<BoundaryVariant>().unwrap(), BoundaryVariant::Neumann);
        assert!("robin".parse::<BoundaryVariant>().is_err());
    }
}
