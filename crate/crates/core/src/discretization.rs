//! Second-order discretisation of the generator `A(u, v, w) = (v, u'', w'')`.
//!
//! Piecewise-linear elements with a lumped (trapezoidal) mass on both
//! segments. Unknowns are `u` on the wave nodes and `V`, which holds `v` on
//! the wave nodes followed by `w` on the interior heat nodes; the interface
//! node is stored once, so `v(0) = w(0)` holds by construction, and
//! `u'(0) = w'(0)` is the natural condition of the coupled weak form. In the
//! interior the rows coincide with central differences, and at `xi = -1` with
//! the ghost-point Neumann closure.
//!
//! With `M` the lumped mass on `V`, `K_u` the wave stiffness and `K_w` the heat
//! stiffness (acting on `V`),
//!
//! ```text
//!     u' = P V,      M V' = -P^T K_u u - K_w V,
//! ```
//!
//! and the energy `(u^T K_u u + V^T M V) / 2` decays at exactly `V^T K_w V`.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characteristic::BoundaryVariant;
use crate::error::{Error, Result};
use crate::freq::C64;
use crate::linalg::{CooMatrix, Scalar, Tridiagonal, TridiagonalLu};
use crate::state::StateVector;

pub const SCHEME_ORDER: usize = 2;
pub const MIN_CELLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub n_wave: usize,
    pub n_heat: usize,
}

impl GridSpec {
    pub fn new(n_wave: usize, n_heat: usize) -> Result<Self> {
        if n_wave < MIN_CELLS || n_heat < MIN_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid {n_wave}x{n_heat}: both segments need at least {MIN_CELLS} cells"
            )));
        }
        Ok(Self { n_wave, n_heat })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn h_wave(&self) -> f64 {
        1.0 / self.n_wave as f64
    }

    pub fn h_heat(&self) -> f64 {
        1.0 / self.n_heat as f64
    }

    pub fn refined(&self) -> Self {
        Self {
            n_wave: 2 * self.n_wave,
            n_heat: 2 * self.n_heat,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteGenerator {
    variant: BoundaryVariant,
    grid: GridSpec,
    /// First stored wave node (1 when `u(-1) = 0` is eliminated).
    j0: usize,
    n_u: usize,
    n_v: usize,
    k_u: Tridiagonal<f64>,
    m_u: Vec<f64>,
    m_v: Vec<f64>,
    k_w: Tridiagonal<f64>,
    /// `P^T K_u P`, the wave stiffness embedded in the `V` numbering.
    k_uv: Tridiagonal<f64>,
    /// Factor of the `u` block `K_u + M_u` of `W`.
    w_u_lu: TridiagonalLu<f64>,
}

pub fn assemble(grid: GridSpec, variant: BoundaryVariant) -> DiscreteGenerator {
    let (nw, nh) = (grid.n_wave, grid.n_heat);
    let (hw, hh) = (grid.h_wave(), grid.h_heat());
    let j0 = usize::from(variant == BoundaryVariant::Dirichlet);
    let n_u = nw + 1 - j0;
    let n_v = n_u + nh - 1;

    let mut k_u = Tridiagonal::zeros(n_u);
    for c in 0..nw {
        // cell between wave nodes c and c + 1; node j is stored at j - j0
        let (a, b) = (c as isize - j0 as isize, c as isize + 1 - j0 as isize);
        if a >= 0 {
            k_u.diag[a as usize] += 1.0 / hw;
            k_u.diag[b as usize] += 1.0 / hw;
            k_u.lower[a as usize] -= 1.0 / hw;
            k_u.upper[a as usize] -= 1.0 / hw;
        } else {
            k_u.diag[b as usize] += 1.0 / hw;
        }
    }
    let m_u: Vec<f64> = (j0..=nw)
        .map(|j| if j == 0 || j == nw { 0.5 * hw } else { hw })
        .collect();

    let mut m_v = vec![0.0; n_v];
    m_v[..n_u].copy_from_slice(&m_u);
    m_v[n_u - 1] += 0.5 * hh;
    for m in &mut m_v[n_u..] {
        *m = hh;
    }

    let mut k_w = Tridiagonal::zeros(n_v);
    let iface = n_u - 1;
    for c in 0..nh {
        let (a, b) = (iface + c, iface + c + 1);
        k_w.diag[a] += 1.0 / hh;
        if b < n_v {
            k_w.diag[b] += 1.0 / hh;
            k_w.lower[a] -= 1.0 / hh;
            k_w.upper[a] -= 1.0 / hh;
        }
    }

    let mut k_uv = Tridiagonal::zeros(n_v);
    k_uv.diag[..n_u].copy_from_slice(&k_u.diag);
    k_uv.lower[..n_u - 1].copy_from_slice(&k_u.lower);
    k_uv.upper[..n_u - 1].copy_from_slice(&k_u.upper);

    let mut w_u = k_u.clone();
    for (d, m) in w_u.diag.iter_mut().zip(&m_u) {
        *d += m;
    }
    let w_u_lu = w_u.factor().expect("H1 Gram block is positive definite");

    DiscreteGenerator {
        variant,
        grid,
        j0,
        n_u,
        n_v,
        k_u,
        m_u,
        m_v,
        k_w,
        k_uv,
        w_u_lu,
    }
}

impl DiscreteGenerator {
    pub fn variant(&self) -> BoundaryVariant {
        self.variant
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.n_u + self.n_v
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn mass_v(&self) -> &[f64] {
        &self.m_v
    }

    /// `z -> A_h z`.
    pub fn apply<T: Scalar>(&self, z: &[T]) -> Vec<T> {
        let (u, vv) = z.split_at(self.n_u);
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&vv[..self.n_u]);
        let mut ku = self.k_u.matvec(u);
        ku.resize(self.n_v, T::zero());
        let kw = self.k_w.matvec(vv);
        for i in 0..self.n_v {
            out.push(-(ku[i] + kw[i]) / self.m_v[i]);
        }
        out
    }

    /// `A_h` in coordinate form.
    pub fn matrix(&self) -> CooMatrix {
        let mut a = CooMatrix::new(self.dim(), self.dim());
        let nu = self.n_u;
        for i in 0..nu {
            a.push(i, nu + i, 1.0);
        }
        for i in 0..nu {
            let m = self.m_v[i];
            a.push(nu + i, i, -self.k_u.diag[i] / m);
            if i > 0 {
                a.push(nu + i, i - 1, -self.k_u.lower[i - 1] / m);
            }
            if i + 1 < nu {
                a.push(nu + i, i + 1, -self.k_u.upper[i] / m);
            }
        }
        for i in 0..self.n_v {
            let m = self.m_v[i];
            a.push(nu + i, nu + i, -self.k_w.diag[i] / m);
            if i > 0 {
                a.push(nu + i, nu + i - 1, -self.k_w.lower[i - 1] / m);
            }
            if i + 1 < self.n_v {
                a.push(nu + i, nu + i + 1, -self.k_w.upper[i] / m);
            }
        }
        a
    }

    pub fn dense_matrix(&self) -> DMatrix<f64> {
        self.matrix().to_dense()
    }

    /// `(W, W_E)`: the Gram matrices of the X inner product and of the
    /// energy inner product.
    pub fn gram_matrices(&self) -> (CooMatrix, CooMatrix) {
        let n = self.dim();
        let mut we = CooMatrix::new(n, n);
        for i in 0..self.n_u {
            we.push(i, i, self.k_u.diag[i]);
            if i + 1 < self.n_u {
                we.push(i, i + 1, self.k_u.upper[i]);
                we.push(i + 1, i, self.k_u.lower[i]);
            }
        }
        for i in 0..self.n_v {
            we.push(self.n_u + i, self.n_u + i, self.m_v[i]);
        }
        let mut w = we.clone();
        for i in 0..self.n_u {
            w.push(i, i, self.m_u[i]);
        }
        (w, we)
    }

    pub fn energy_dot<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        let (xu, xv) = x.split_at(self.n_u);
        let (yu, yv) = y.split_at(self.n_u);
        let ku = self.k_u.matvec(yu);
        let mut acc = T::zero();
        for i in 0..self.n_u {
            acc += xu[i].conj() * ku[i];
        }
        for i in 0..self.n_v {
            acc += xv[i].conj() * yv[i] * self.m_v[i];
        }
        acc
    }

    /// The X inner product `<x, y>_W`, conjugate-linear in `x`.
    pub fn w_dot<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        let mut acc = self.energy_dot(x, y);
        for i in 0..self.n_u {
            acc += x[i].conj() * y[i] * self.m_u[i];
        }
        acc
    }

    pub fn w_norm<T: Scalar>(&self, x: &[T]) -> f64 {
        self.w_dot(x, x).to_complex().re.max(0.0).sqrt()
    }

    /// `W^{-1} x`.
    pub fn w_solve<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let mut out = self.w_u_lu.solve(&x[..self.n_u]);
        for i in 0..self.n_v {
            out.push(x[self.n_u + i] / self.m_v[i]);
        }
        out
    }

    /// `(u^T K_u u + V^T M V) / 2`.
    pub fn energy<T: Scalar>(&self, z: &[T]) -> f64 {
        0.5 * self.energy_dot(z, z).to_complex().re
    }

    /// `V^T K_w V`, the exact `int |w'|^2` of the piecewise-linear `w`.
    pub fn dissipation<T: Scalar>(&self, z: &[T]) -> f64 {
        let vv = &z[self.n_u..];
        let kw = self.k_w.matvec(vv);
        vv.iter()
            .zip(&kw)
            .fold(T::zero(), |a, (&x, &y)| a + x.conj() * y)
            .to_complex()
            .re
    }

    /// The discrete `(1, 0, 0)`; `None` for the Dirichlet end.
    pub fn kernel_vector(&self) -> Option<Vec<f64>> {
        self.variant.has_zero_eigenvalue().then(|| {
            let mut z = vec![0.0; self.dim()];
            z[..self.n_u].iter_mut().for_each(|x| *x = 1.0);
            z
        })
    }

    /// Discrete `phi`: nodal `u(0)` plus trapezoidal `int v + int (1 - xi) w`.
    /// Exactly conserved by the semi-discrete flow.
    pub fn phi<T: Scalar>(&self, z: &[T]) -> T {
        let hh = self.grid.h_heat();
        let mut acc = z[self.n_u - 1];
        for i in 0..self.n_v {
            let weight = if i < self.n_u {
                1.0
            } else {
                1.0 - (i + 1 - self.n_u) as f64 * hh
            };
            acc += z[self.n_u + i] * (self.m_v[i] * weight);
        }
        acc
    }

    /// Stacks the samples of a state into the unknown vector. The stored
    /// interface value is `v(0)`; `w(0)`, `w(1)` and, for the Dirichlet end,
    /// `u(-1)`, `v(-1)` are dropped.
    pub fn pack<T: Scalar>(&self, x: &StateVector<T>) -> Result<Vec<T>> {
        if x.n_wave() != self.grid.n_wave || x.n_heat() != self.grid.n_heat {
            return Err(Error::InvalidArgument(format!(
                "state on {}x{} grid, generator on {}x{}",
                x.n_wave(),
                x.n_heat(),
                self.grid.n_wave,
                self.grid.n_heat
            )));
        }
        let mut z = Vec::with_capacity(self.dim());
        z.extend_from_slice(&x.u[self.j0..]);
        z.extend_from_slice(&x.v[self.j0..]);
        z.extend_from_slice(&x.w[1..self.grid.n_heat]);
        Ok(z)
    }

    pub fn unpack<T: Scalar>(&self, z: &[T]) -> StateVector<T> {
        let (nw, nh) = (self.grid.n_wave, self.grid.n_heat);
        let mut u = vec![T::zero(); nw + 1];
        let mut v = vec![T::zero(); nw + 1];
        let mut w = vec![T::zero(); nh + 1];
        u[self.j0..].copy_from_slice(&z[..self.n_u]);
        v[self.j0..].copy_from_slice(&z[self.n_u..2 * self.n_u]);
        w[0] = v[nw];
        w[1..nh].copy_from_slice(&z[2 * self.n_u..]);
        StateVector::new(u, v, w).expect("grid sizes are consistent")
    }

    /// Factorisation for `(sigma - A_h) x = b`.
    pub fn shifted<T: Scalar>(&self, sigma: T) -> Result<ShiftedSolver<'_, T>> {
        let n = self.n_v;
        let mut t = Tridiagonal::<T>::zeros(n);
        for i in 0..n {
            t.diag[i] = sigma * sigma * self.m_v[i] + T::from(self.k_uv.diag[i]) + sigma * self.k_w.diag[i];
        }
        for i in 0..n - 1 {
            t.lower[i] = T::from(self.k_uv.lower[i]) + sigma * self.k_w.lower[i];
            t.upper[i] = T::from(self.k_uv.upper[i]) + sigma * self.k_w.upper[i];
        }
        if sigma.modulus() == 0.0 {
            return Err(Error::SolveFailure("shift 0 needs the full system".into()));
        }
        let lu = t.factor().map_err(|e| Error::SolveFailure(format!("sigma = {sigma:?}: {e}")))?;
        Ok(ShiftedSolver {
            sigma,
            lu,
            gen: self,
        })
    }

    /// Eigenvalue of `A_h` nearest `target` by shifted inverse iteration
    /// followed by Rayleigh-type refinement.
    pub fn nearest_eigenvalue(&self, target: C64) -> Result<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x: Vec<C64> = (0..self.dim())
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let solver = self.shifted(target)?;
        let mut lambda = target;
        let mut prev = C64::new(f64::INFINITY, 0.0);
        for _ in 0..500 {
            let y = solver.solve(&x);
            let ratio = crate::linalg::dot(&x, &y) / crate::linalg::dot(&x, &x);
            lambda = target - 1.0 / ratio;
            let ny = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            x = y.into_iter().map(|c| c / ny).collect();
            if (lambda - prev).norm() <= 1e-11 * lambda.norm().max(1.0) {
                break;
            }
            prev = lambda;
        }
        for _ in 0..4 {
            let shift = lambda + C64::new(0.0, 1e-9 * lambda.norm().max(1.0));
            let Ok(s) = self.shifted(shift) else { break };
            let y = s.solve(&x);
            let ratio = crate::linalg::dot(&x, &y) / crate::linalg::dot(&x, &x);
            let next = shift - 1.0 / ratio;
            let ny = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            x = y.into_iter().map(|c| c / ny).collect();
            let done = (next - lambda).norm() <= 1e-14 * lambda.norm().max(1.0);
            lambda = next;
            if done {
                break;
            }
        }
        Ok(lambda)
    }

    /// Writes `A_h` as `row col value` lines.
    pub fn write_matrix<W: Write>(&self, out: W) -> std::io::Result<()> {
        self.matrix().write_coordinate(out)
    }
}

/// LU factors of `sigma^2 M + P^T K_u P + sigma K_w`, which reduce
/// `(sigma - A_h) x = b` to one tridiagonal solve. The matrix is complex
/// symmetric, so the same factors serve the transposed and adjoint systems.
pub struct ShiftedSolver<'a, T> {
    sigma: T,
    lu: TridiagonalLu<T>,
    gen: &'a DiscreteGenerator,
}

impl<T: Scalar> ShiftedSolver<'_, T> {
    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// `x = (sigma - A_h)^{-1} b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let g = self.gen;
        let (bu, bv) = b.split_at(g.n_u);
        let s = self.sigma;
        let mut ku_bu = g.k_u.matvec(bu);
        ku_bu.resize(g.n_v, T::zero());
        let mut rhs: Vec<T> = (0..g.n_v)
            .map(|i| s * bv[i] * g.m_v[i] - ku_bu[i])
            .collect();
        self.lu.solve_in_place(&mut rhs);
        let mut x = Vec::with_capacity(g.dim());
        for i in 0..g.n_u {
            x.push((bu[i] + rhs[i]) / s);
        }
        x.extend(rhs);
        x
    }

    /// `x = (sigma - A_h)^{-H} b`.
    pub fn solve_adjoint(&self, b: &[T]) -> Vec<T> {
        let g = self.gen;
        let (bu, bv) = b.split_at(g.n_u);
        let s = self.sigma;
        // T(conj sigma) = conj(T(sigma)): solve for conj(q)
        let mut q: Vec<T> = (0..g.n_v)
            .map(|i| {
                let embed = if i < g.n_u { bu[i].conj() } else { T::zero() };
                s * bv[i].conj() + embed
            })
            .collect();
        self.lu.solve_in_place(&mut q);
        let q: Vec<T> = q.into_iter().map(|c| c.conj()).collect();
        let ku_q = g.k_u.matvec(&q[..g.n_u]);
        let mut x = Vec::with_capacity(g.dim());
        for i in 0..g.n_u {
            x.push((bu[i] - ku_q[i]) / s.conj());
        }
        for i in 0..g.n_v {
            x.push(q[i] * g.m_v[i]);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::BoundaryVariant::{Dirichlet, Neumann};

    fn gen(n: usize, v: BoundaryVariant) -> DiscreteGenerator {
        assemble(GridSpec::uniform(n).unwrap(), v)
    }

    #[test]
    fn grid_needs_eight_cells() {
        assert!(GridSpec::new(7, 10).is_err());
        assert!(GridSpec::new(8, 8).is_ok());
    }

    #[test]
    fn kernel_vector_is_annihilated() {
        let g = gen(16, Neumann);
        let z = g.kernel_vector().unwrap();
        assert!(g.apply(&z).iter().all(|&x| x == 0.0));
        assert!(gen(16, Dirichlet).kernel_vector().is_none());
    }

    #[test]
    fn apply_matches_coordinate_matrix() {
        for v in [Neumann, Dirichlet] {
            let g = assemble(GridSpec::new(9, 12).unwrap(), v);
            let z: Vec<f64> = (0..g.dim()).map(|i| ((i * 7 % 11) as f64).sin()).collect();
            let a = g.apply(&z);
            let b = g.matrix().matvec(&z);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn shifted_solves_invert_the_operator() {
        for v in [Neumann, Dirichlet] {
            let g = assemble(GridSpec::new(10, 13).unwrap(), v);
            let sigma = C64::new(0.3, 7.5);
            let s = g.shifted(sigma).unwrap();
            let b: Vec<C64> = (0..g.dim())
                .map(|i| C64::new((i as f64).cos(), (2.0 * i as f64).sin()))
                .collect();
            let x = s.solve(&b);
            let ax = g.apply(&x);
            for i in 0..g.dim() {
                assert!((sigma * x[i] - ax[i] - b[i]).norm() < 1e-10);
            }
            // adjoint: <(sigma - A) y, x> = <y, b> for x = (sigma - A)^{-H} b
            let xa = s.solve_adjoint(&b);
            let a = g.dense_matrix().map(|r| C64::new(r, 0.0));
            let m = DMatrix::from_diagonal_element(g.dim(), g.dim(), sigma) - a;
            let r = m.adjoint() * nalgebra::DVector::from_vec(xa);
            for i in 0..g.dim() {
                assert!((r[i] - b[i]).norm() < 1e-9, "{v} row {i}");
            }
        }
    }

    #[test]
    fn energy_rate_equals_minus_dissipation() {
        let g = gen(12, Neumann);
        let z: Vec<f64> = (0..g.dim()).map(|i| (0.37 * i as f64).sin()).collect();
        let az = g.apply(&z);
        let rate = g.energy_dot(&z, &az);
        assert!((rate + g.dissipation(&z)).abs() < 1e-10 * g.dissipation(&z));
    }

    #[test]
    fn pack_unpack_round_trip() {
        let g = assemble(GridSpec::new(9, 11).unwrap(), Dirichlet);
        let z: Vec<f64> = (0..g.dim()).map(|i| i as f64 + 1.0).collect();
        let s = g.unpack(&z);
        assert_eq!(g.pack(&s).unwrap(), z);
        assert_eq!(s.u[0], 0.0);
        assert_eq!(s.w[0], s.v[9]);
    }

    #[test]
    fn nearest_eigenvalue_matches_dense_spectrum() {
        let g = gen(16, Neumann);
        let target = C64::new(-0.5, 2.2);
        let l = g.nearest_eigenvalue(target).unwrap();
        let ev = g.dense_matrix().complex_eigenvalues();
        let best = ev
            .iter()
            .min_by(|a, b| (*a - target).norm().partial_cmp(&(*b - target).norm()).unwrap())
            .unwrap();
        assert!((l - best).norm() < 1e-9, "{l} vs {best}");
    }
}
