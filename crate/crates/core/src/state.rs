//! Grid functions `(u, v, w)` on `[-1, 0] x [-1, 0] x [0, 1]`.

use crate::error::{Error, Result};
use crate::linalg::Scalar;

/// Trapezoidal integral of `|f|^2` over uniformly spaced samples.
pub fn trapezoid_sq<T: Scalar>(f: &[T], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..n - 1].iter().map(|x| x.norm_sqr()).sum();
    h * (inner + 0.5 * (f[0].norm_sqr() + f[n - 1].norm_sqr()))
}

/// Trapezoidal integral of `weight(x_i) f_i` with `x_i = x0 + i h`.
pub fn trapezoid_weighted<T: Scalar>(f: &[T], h: f64, x0: f64, weight: impl Fn(f64) -> f64) -> T {
    let n = f.len();
    let mut acc = T::zero();
    for (i, &v) in f.iter().enumerate() {
        let c = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        acc += v * (c * h * weight(x0 + i as f64 * h));
    }
    acc
}

/// Samples of `(u, v, w)`: `u`, `v` on the `n_wave + 1` nodes of `[-1, 0]`,
/// `w` on the `n_heat + 1` nodes of `[0, 1]`. `norm_x` and `energy` are filled
/// in by the constructor.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub w: Vec<T>,
    /// Exact `u'` at the nodes, when known.
    pub u_prime: Option<Vec<T>>,
    pub norm_x: f64,
    pub energy: f64,
}

impl<T: Scalar> StateVector<T> {
    pub fn new(u: Vec<T>, v: Vec<T>, w: Vec<T>) -> Result<Self> {
        Self::with_derivative(u, v, w, None)
    }

    pub fn with_derivative(u: Vec<T>, v: Vec<T>, w: Vec<T>, u_prime: Option<Vec<T>>) -> Result<Self> {
        if u.len() < 2 || u.len() != v.len() || w.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "inconsistent grid lengths u={} v={} w={}",
                u.len(),
                v.len(),
                w.len()
            )));
        }
        if let Some(d) = &u_prime {
            if d.len() != u.len() {
                return Err(Error::InvalidArgument("u' length differs from u".into()));
            }
        }
        let mut s = Self {
            u,
            v,
            w,
            u_prime,
            norm_x: 0.0,
            energy: 0.0,
        };
        s.refresh();
        Ok(s)
    }

    pub fn zeros(n_wave: usize, n_heat: usize) -> Self {
        Self::new(
            vec![T::zero(); n_wave + 1],
            vec![T::zero(); n_wave + 1],
            vec![T::zero(); n_heat + 1],
        )
        .expect("valid sizes")
    }

    pub fn n_wave(&self) -> usize {
        self.u.len() - 1
    }

    pub fn n_heat(&self) -> usize {
        self.w.len() - 1
    }

    pub fn h_wave(&self) -> f64 {
        1.0 / self.n_wave() as f64
    }

    pub fn h_heat(&self) -> f64 {
        1.0 / self.n_heat() as f64
    }

    /// `int |u'|^2`: trapezoid of the exact derivative when present, otherwise
    /// the sum of squared differences (exact for the piecewise-linear interpolant).
    pub fn grad_sq(&self) -> f64 {
        let h = self.h_wave();
        match &self.u_prime {
            Some(d) => trapezoid_sq(d, h),
            None => self.u.windows(2).map(|p| (p[1] - p[0]).norm_sqr()).sum::<f64>() / h,
        }
    }

    /// Recomputes `norm_x` and `energy` after the samples were modified.
    pub fn refresh(&mut self) {
        let (hw, hh) = (self.h_wave(), self.h_heat());
        let grad = self.grad_sq();
        let l2u = trapezoid_sq(&self.u, hw);
        let l2v = trapezoid_sq(&self.v, hw);
        let l2w = trapezoid_sq(&self.w, hh);
        self.norm_x = (l2u + grad + l2v + l2w).sqrt();
        self.energy = 0.5 * (grad + l2v + l2w);
    }

    /// The seminorm `(|u'|^2 + |v|^2 + |w|^2)^{1/2}`.
    pub fn seminorm(&self) -> f64 {
        (2.0 * self.energy).sqrt()
    }

    /// `a * self + b * other`, dropping any stored derivative unless both have one.
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        let mix = |p: &[T], q: &[T]| p.iter().zip(q).map(|(&x, &y)| a * x + b * y).collect();
        let d = match (&self.u_prime, &other.u_prime) {
            (Some(p), Some(q)) => Some(mix(p, q)),
            _ => None,
        };
        Self::with_derivative(mix(&self.u, &other.u), mix(&self.v, &other.v), mix(&self.w, &other.w), d)
            .expect("same grid")
    }

    /// `u(0) + int v + int (1 - xi) w` with the trapezoidal rule.
    pub fn phi(&self) -> T {
        let (hw, hh) = (self.h_wave(), self.h_heat());
        self.u[self.n_wave()]
            + trapezoid_weighted(&self.v, hw, -1.0, |_| 1.0)
            + trapezoid_weighted(&self.w, hh, 0.0, |x| 1.0 - x)
    }
}

/// Samples `f` at the `n + 1` nodes of `[a, b]`.
pub fn sample(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..=n).map(|i| f(a + (b - a) * i as f64 / n as f64)).collect()
}
