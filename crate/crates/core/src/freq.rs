//! Complex frequencies, the shared square-root branch, and exponent-scaled
//! hyperbolic functions.
//!
//! Every module evaluates `sqrt(lambda)` through [`principal_sqrt`] so that the
//! cut along the negative real axis is the same everywhere. On the cut itself
//! the root on the upper side (`Im > 0`) is returned.

use std::fmt;

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Principal square root with the cut on `(-inf, 0)`; `Re >= 0`, and on the
/// cut the imaginary part is positive.
pub fn principal_sqrt(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            C64::new(z.re.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}

/// A point of the complex plane together with its principal square root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexFrequency {
    value: C64,
    sqrt_value: C64,
}

impl ComplexFrequency {
    pub fn new(value: C64) -> Self {
        Self {
            value,
            sqrt_value: principal_sqrt(value),
        }
    }

    /// The point `i s` on the imaginary axis.
    pub fn imaginary(s: f64) -> Self {
        Self::new(C64::new(0.0, s))
    }

    pub fn real(x: f64) -> Self {
        Self::new(C64::new(x, 0.0))
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn sqrt_value(&self) -> C64 {
        self.sqrt_value
    }

    pub fn conj(&self) -> Self {
        Self::new(self.value.conj())
    }

    pub fn is_finite(&self) -> bool {
        self.value.re.is_finite() && self.value.im.is_finite()
    }

    /// True on the closed negative real half-line, where the root jumps.
    pub fn on_cut(&self) -> bool {
        self.value.im == 0.0 && self.value.re <= 0.0
    }
}

impl From<C64> for ComplexFrequency {
    fn from(value: C64) -> Self {
        Self::new(value)
    }
}

impl fmt::Display for ComplexFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.12e}{:+.12e}i", self.value.re, self.value.im)
    }
}

/// A complex number stored as `mantissa * exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: C64,
    pub log_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: C64::new(0.0, 0.0),
        log_scale: 0.0,
    };

    pub fn new(mantissa: C64, log_scale: f64) -> Self {
        Self {
            mantissa,
            log_scale,
        }
    }

    /// Moves the magnitude of the mantissa into the exponent so that
    /// `|mantissa|` lies in `[1e-2, 1e2]`. Zero stays `(0, 0)`.
    pub fn normalized(self) -> Self {
        let m = self.mantissa.norm();
        if m == 0.0 {
            return Self::ZERO;
        }
        if (1e-2..=1e2).contains(&m) {
            return self;
        }
        Self {
            mantissa: self.mantissa / m,
            log_scale: self.log_scale + m.ln(),
        }
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn log_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    /// The unscaled value, or `None` when it is not representable.
    pub fn materialize(&self) -> Option<C64> {
        if self.mantissa == C64::new(0.0, 0.0) {
            return Some(self.mantissa);
        }
        if self.log_abs() > 709.0 {
            return None;
        }
        let v = self.mantissa * self.log_scale.exp();
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }

    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled::new(
            self.mantissa * other.mantissa,
            self.log_scale + other.log_scale,
        )
    }

    /// Quotient `self / other`; assumes `other` is non-zero.
    pub fn div(self, other: Scaled) -> Scaled {
        Scaled::new(
            self.mantissa / other.mantissa,
            self.log_scale - other.log_scale,
        )
    }
}

/// `cosh(z) * exp(-|Re z|)`, bounded by one in modulus.
pub fn cosh_scaled(z: C64) -> C64 {
    let a = z.re.abs();
    let decay = (-2.0 * a).exp();
    let even = 0.5 * (1.0 + decay);
    let odd = z.re.signum() * (-0.5 * (-2.0 * a).exp_m1());
    C64::new(even * z.im.cos(), odd * z.im.sin())
}

/// `sinh(z) * exp(-|Re z|)`, bounded by one in modulus.
pub fn sinh_scaled(z: C64) -> C64 {
    let a = z.re.abs();
    let decay = (-2.0 * a).exp();
    let even = 0.5 * (1.0 + decay);
    let odd = if z.re == 0.0 {
        0.0
    } else {
        z.re.signum() * (-0.5 * (-2.0 * a).exp_m1())
    };
    C64::new(odd * z.im.cos(), even * z.im.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_on_cut_takes_upper_side() {
        let r = principal_sqrt(C64::new(-4.0, 0.0));
        assert_eq!(r, C64::new(0.0, 2.0));
        let r = principal_sqrt(C64::new(-4.0, -0.0));
        assert_eq!(r, C64::new(0.0, 2.0));
    }

    #[test]
    fn sqrt_squares_back_and_keeps_right_half_plane() {
        for &(re, im) in &[(1.0, 2.0), (-3.0, 1e-9), (-3.0, -1e-9), (0.0, 5.0), (7.0, -0.5)] {
            let z = C64::new(re, im);
            let r = principal_sqrt(z);
            assert!(r.re >= 0.0);
            assert!((r * r - z).norm() <= 1e-13 * z.norm());
        }
    }

    #[test]
    fn sqrt_conjugate_symmetric_off_cut() {
        let z = C64::new(-2.0, 0.3);
        assert_eq!(principal_sqrt(z.conj()), principal_sqrt(z).conj());
    }

    #[test]
    fn scaled_hyperbolics_match_direct_values() {
        for &(re, im) in &[(0.3, 1.2), (-2.5, 0.7), (10.0, -4.0), (1e-9, 3.0), (0.0, 2.0)] {
            let z = C64::new(re, im);
            let s = (-z.re.abs()).exp();
            assert!((cosh_scaled(z) - z.cosh() * s).norm() <= 1e-15 * (1.0 + z.cosh().norm() * s));
            assert!((sinh_scaled(z) - z.sinh() * s).norm() <= 1e-15 * (1.0 + z.sinh().norm() * s));
        }
    }

    #[test]
    fn small_sinh_keeps_relative_accuracy() {
        let z = C64::new(1e-10, 2e-10);
        let rel = (sinh_scaled(z) - z * (-z.re).exp()).norm() / z.norm();
        assert!(rel < 1e-12);
    }

    #[test]
    fn huge_arguments_do_not_overflow() {
        let z = C64::new(1e6, 3.0);
        assert!(cosh_scaled(z).norm().is_finite());
        let s = Scaled::new(C64::new(3.0, 0.0), 1e4);
        assert!(s.materialize().is_none());
        assert!((s.log_abs() - (1e4 + 3f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn normalization_keeps_value() {
        let s = Scaled::new(C64::new(1e-7, 2e-7), 3.0).normalized();
        assert!((1e-2..=1e2).contains(&s.mantissa.norm()));
        let v = s.materialize().unwrap();
        let expect = C64::new(1e-7, 2e-7) * 3f64.exp();
        assert!((v - expect).norm() < 1e-14 * expect.norm());
    }
}
