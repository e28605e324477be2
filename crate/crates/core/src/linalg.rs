//! Small linear-algebra kit: a scalar trait over `f64` and `Complex64`, a
//! tridiagonal LU with partial pivoting, and a coordinate-format sparse matrix.

use std::fmt::Debug;
use std::io::Write;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::freq::C64;

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self {
        Self::from(0.0)
    }
    fn modulus(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn conj(self) -> Self;
    fn to_complex(self) -> C64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn conj(self) -> Self {
        self
    }
    fn to_complex(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn norm_sqr(self) -> f64 {
        C64::norm_sqr(&self)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn to_complex(self) -> C64 {
        self
    }
}

/// Tridiagonal matrix stored by diagonals: `lower[i] = T[i+1][i]`,
/// `diag[i] = T[i][i]`, `upper[i] = T[i][i+1]`.
#[derive(Clone, Debug)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n.saturating_sub(1)],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec<X>(&self, x: &[X]) -> Vec<X>
    where
        X: Scalar + Mul<T, Output = X>,
    {
        let n = self.len();
        let mut y = vec![X::zero(); n];
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.lower[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.upper[i];
            }
            y[i] = acc;
        }
        y
    }

    /// Entrywise `a * self + b * other` with scalar weights.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        let zip = |p: &[T], q: &[T]| p.iter().zip(q).map(|(&x, &y)| a * x + b * y).collect();
        Self {
            lower: zip(&self.lower, &other.lower),
            diag: zip(&self.diag, &other.diag),
            upper: zip(&self.upper, &other.upper),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Tridiagonal<U> {
        Tridiagonal {
            lower: self.lower.iter().map(|&x| f(x)).collect(),
            diag: self.diag.iter().map(|&x| f(x)).collect(),
            upper: self.upper.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            lower: self.upper.clone(),
            diag: self.diag.clone(),
            upper: self.lower.clone(),
        }
    }

    /// LU factorisation with partial pivoting (the `gttrf` scheme).
    pub fn factor(&self) -> Result<TridiagonalLu<T>> {
        let n = self.len();
        let mut dl = self.lower.clone();
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = d
            .iter()
            .chain(dl.iter())
            .chain(du.iter())
            .fold(0.0f64, |m, x| m.max(x.modulus()));
        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    return Err(Error::SolveFailure(format!("zero pivot at row {i}")));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for (i, p) in d.iter().enumerate() {
            if p.modulus() <= 1e-300 * scale.max(1e-300) || !p.modulus().is_finite() {
                return Err(Error::SolveFailure(format!("singular pivot at row {i}")));
            }
        }
        Ok(TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }
}

impl Tridiagonal<f64> {
    pub fn to_complex(&self) -> Tridiagonal<C64> {
        self.map(|x| C64::new(x, 0.0))
    }
}

#[derive(Clone, Debug)]
pub struct TridiagonalLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Scalar> TridiagonalLu<T> {
    /// Solves in place; the right-hand side may be complex over a real factor.
    pub fn solve_in_place<X>(&self, b: &mut [X])
    where
        X: Scalar + Mul<T, Output = X> + Div<T, Output = X>,
    {
        let n = self.d.len();
        if n == 0 {
            return;
        }
        // L y = P b
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - b[i] * self.dl[i];
            } else {
                let t = b[i];
                b[i + 1] -= t * self.dl[i];
            }
        }
        // U x = y
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - b[n - 1] * self.du[n - 2]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - b[i + 1] * self.du[i] - b[i + 2] * self.du2[i]) / self.d[i];
        }
    }

    pub fn solve<X>(&self, b: &[X]) -> Vec<X>
    where
        X: Scalar + Mul<T, Output = X> + Div<T, Output = X>,
    {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Sparse matrix in coordinate form; duplicates are summed on use.
#[derive(Clone, Debug, Default)]
pub struct CooMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn matvec<X: Scalar>(&self, x: &[X]) -> Vec<X> {
        let mut y = vec![X::zero(); self.nrows];
        for &(r, c, v) in &self.entries {
            y[r] += x[c] * v;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Writes `row col value` lines (zero-based), preceded by a size header.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "% rows={} cols={} nnz={}", self.nrows, self.ncols, self.entries.len())?;
        let mut sorted = self.entries.clone();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (r, c, v) in sorted {
            writeln!(out, "{r} {c} {v:e}")?;
        }
        Ok(())
    }
}

/// Hermitian inner product `sum conj(a_i) b_i`.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x.conj() * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(t: &Tridiagonal<C64>) -> DMatrix<C64> {
        let n = t.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = t.lower[i];
                m[(i, i + 1)] = t.upper[i];
            }
        }
        m
    }

    #[test]
    fn pivoted_solve_handles_small_diagonal() {
        // indefinite matrix with a zero leading pivot
        let n = 7;
        let mut t = Tridiagonal::<C64>::zeros(n);
        for i in 0..n {
            t.diag[i] = C64::new(if i == 0 { 0.0 } else { -3.0 + i as f64 }, 0.5 * i as f64);
        }
        for i in 0..n - 1 {
            t.lower[i] = C64::new(1.0 + i as f64, -1.0);
            t.upper[i] = C64::new(2.0, 0.25 * i as f64);
        }
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = t.factor().unwrap().solve(&b);
        let r = dense(&t) * nalgebra::DVector::from_vec(x.clone());
        for i in 0..n {
            assert!((r[i] - b[i]).norm() < 1e-12, "row {i}");
        }
        let y = t.matvec(&x);
        for i in 0..n {
            assert!((y[i] - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = Tridiagonal::<f64>::zeros(2);
        t.diag = vec![1.0, 1.0];
        t.lower = vec![1.0];
        t.upper = vec![1.0];
        assert!(t.factor().is_err());
    }

    #[test]
    fn coo_dump_lists_sorted_entries() {
        let mut m = CooMatrix::new(2, 2);
        m.push(1, 0, 2.0);
        m.push(0, 1, -1.0);
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), "0 1 -1e0");
        assert_eq!(m.matvec(&[1.0, 3.0]), vec![-3.0, 2.0]);
    }
}
