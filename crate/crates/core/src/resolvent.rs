//! The resolvent `R(is, A)` on the imaginary axis.
//!
//! [`apply_resolvent`] evaluates the explicit solution of `(is - A) x = y`:
//! `u = a cos(s (xi + 1)) - U_s` (or `a sin(...)` for the Dirichlet end) and
//! `w = -b sinh(sqrt(is) (1 - xi)) + W_s`. The second form cancels
//! catastrophically for large `s`, so `w` is assembled from integrals whose
//! kernels never exceed `exp(Re sqrt(is))`; the common factor is divided out
//! of every quantity, which then stays of moderate size. Data are taken as
//! the piecewise-linear interpolants of their grid values and all integrals
//! are evaluated exactly for that interpolant by first-order recurrences.
//!
//! The discrete norm `||R(is, A_h)||` in the X geometry comes from Lanczos on
//! `R^# R`, with `R^#` the adjoint in the Gram inner product.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characteristic::{BoundaryVariant, Characteristic};
use crate::discretization::{assemble, DiscreteGenerator, GridSpec};
use crate::error::{Error, Result};
use crate::freq::{cosh_scaled, sinh_scaled, ComplexFrequency, Scaled, C64, I};
use crate::quadrature::Rule;
use crate::state::StateVector;

/// Data `y = (f, g, h)`: `f`, `g` on the nodes of `[-1, 0]`, `h` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataTriple {
    pub f: Vec<C64>,
    pub g: Vec<C64>,
    pub h: Vec<C64>,
}

impl DataTriple {
    pub fn new(f: Vec<C64>, g: Vec<C64>, h: Vec<C64>) -> Result<Self> {
        if f.len() < 2 || f.len() != g.len() || h.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "data lengths f={} g={} h={}",
                f.len(),
                g.len(),
                h.len()
            )));
        }
        Ok(Self { f, g, h })
    }

    pub fn zeros(n_wave: usize, n_heat: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            f: vec![z; n_wave + 1],
            g: vec![z; n_wave + 1],
            h: vec![z; n_heat + 1],
        }
    }

    /// Samples closed-form data on a grid.
    pub fn from_fn(
        grid: GridSpec,
        f: impl Fn(f64) -> C64,
        g: impl Fn(f64) -> C64,
        h: impl Fn(f64) -> C64,
    ) -> Self {
        let wave = |fun: &dyn Fn(f64) -> C64| -> Vec<C64> {
            (0..=grid.n_wave)
                .map(|j| fun(-1.0 + j as f64 * grid.h_wave()))
                .collect()
        };
        Self {
            f: wave(&f),
            g: wave(&g),
            h: (0..=grid.n_heat).map(|k| h(k as f64 * grid.h_heat())).collect(),
        }
    }

    pub fn n_wave(&self) -> usize {
        self.f.len() - 1
    }

    pub fn n_heat(&self) -> usize {
        self.h.len() - 1
    }

    /// `y` as a state `(f, g, h)`; its `norm_x` is the X-norm of the data.
    pub fn as_state(&self) -> StateVector<C64> {
        StateVector::new(self.f.clone(), self.g.clone(), self.h.clone()).expect("consistent data")
    }

    pub fn norm_x(&self) -> f64 {
        self.as_state().norm_x
    }

    pub fn scale(&self, c: f64) -> Self {
        let m = |v: &[C64]| v.iter().map(|x| x * c).collect();
        Self {
            f: m(&self.f),
            g: m(&self.g),
            h: m(&self.h),
        }
    }
}

/// `(int_0^1 e^{-z t} (1 - t) dt, int_0^1 e^{-z t} t dt)`.
fn linear_exp_weights(z: C64) -> (C64, C64) {
    if z.norm() < 2.0 {
        // sum_k (-z)^k / k! * (1/((k+1)(k+2)), 1/(k+2))
        let mut term = C64::new(1.0, 0.0);
        let (mut e0, mut e1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for k in 0..40 {
            let kf = k as f64;
            e0 += term / ((kf + 1.0) * (kf + 2.0));
            e1 += term / (kf + 2.0);
            term *= -z / (kf + 1.0);
            if term.norm() < 1e-18 {
                break;
            }
        }
        (e0, e1)
    } else {
        let ez = (-z).exp();
        let e = (1.0 - ez) / z;
        let e1 = (1.0 - ez * (1.0 + z)) / (z * z);
        (e - e1, e1)
    }
}

/// Node values of `U_s` and `U_s'` for piecewise-linear `f`, `g`.
fn wave_particular_nodes(s: f64, f: &[C64], g: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let n = f.len() - 1;
    let dx = 1.0 / n as f64;
    let is = I * s;
    let big_f: Vec<C64> = f.iter().zip(g).map(|(&f, &g)| is * f + g).collect();
    let zp = -is * dx;
    let zm = is * dx;
    let (p0, p1) = linear_exp_weights(zp);
    let (m0, m1) = linear_exp_weights(zm);
    let (ep, em) = ((is * dx).exp(), (-is * dx).exp());
    let (mut phi_p, mut phi_m) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let mut u = vec![C64::new(0.0, 0.0); n + 1];
    let mut du = vec![C64::new(0.0, 0.0); n + 1];
    for j in 0..n {
        phi_p = ep * phi_p + dx * (p1 * big_f[j] + p0 * big_f[j + 1]);
        phi_m = em * phi_m + dx * (m1 * big_f[j] + m0 * big_f[j + 1]);
        du[j + 1] = 0.5 * (phi_p + phi_m);
        u[j + 1] = (phi_p - phi_m) / (2.0 * is);
    }
    (u, du)
}

/// Heat-segment integrals at the nodes: `A+`, `A-`, `G`, `Hb`.
struct HeatIntegrals {
    a_plus: Vec<C64>,
    a_minus: Vec<C64>,
    g: Vec<C64>,
    hb: Vec<C64>,
}

fn heat_integrals(mu: C64, h: &[C64]) -> HeatIntegrals {
    let n = h.len() - 1;
    let dx = 1.0 / n as f64;
    let z = mu * dx;
    let (e0, e1) = linear_exp_weights(z);
    let ez = (-z).exp();
    let zero = C64::new(0.0, 0.0);
    let mut a_plus = vec![zero; n + 1];
    let mut g = vec![zero; n + 1];
    for k in 0..n {
        let eta = k as f64 * dx;
        a_plus[k + 1] = ez * a_plus[k] + dx * (e1 * h[k] + e0 * h[k + 1]);
        g[k + 1] = g[k] + (-mu * eta).exp() * dx * (e0 * h[k] + e1 * h[k + 1]);
    }
    let mut a_minus = vec![zero; n + 1];
    let mut hb = vec![zero; n + 1];
    for k in (0..n).rev() {
        let eta1 = (k + 1) as f64 * dx;
        a_minus[k] = ez * a_minus[k + 1] + dx * (e0 * h[k] + e1 * h[k + 1]);
        hb[k] = hb[k + 1] + (-mu * (1.0 - eta1)).exp() * dx * (e1 * h[k] + e0 * h[k + 1]);
    }
    HeatIntegrals {
        a_plus,
        a_minus,
        g,
        hb,
    }
}

/// Linear interpolation of nodal data on `[a, a + 1]`.
fn interp(data: &[C64], a: f64, x: f64) -> C64 {
    let n = data.len() - 1;
    let t = ((x - a) * n as f64).clamp(0.0, n as f64);
    let j = (t.floor() as usize).min(n - 1);
    let frac = t - j as f64;
    data[j] * (1.0 - frac) + data[j + 1] * frac
}

fn check_s(s: f64) -> Result<()> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::DegenerateInput(format!("s = {s}")));
    }
    Ok(())
}

/// Composite Gauss-Legendre on `[lo, hi]` with panels no longer than `max_len`
/// and aligned with the cells of a grid with `cells` cells on `[a, a + 1]`.
fn aligned_quadrature(
    lo: f64,
    hi: f64,
    a: f64,
    cells: usize,
    max_len: f64,
    mut f: impl FnMut(f64) -> C64,
) -> C64 {
    let rule = Rule::new(16);
    let mut acc = C64::new(0.0, 0.0);
    if hi <= lo {
        return acc;
    }
    let dx = 1.0 / cells as f64;
    let first = (((lo - a) / dx).floor().max(0.0)) as usize;
    for j in first..cells {
        let c0 = (a + j as f64 * dx).max(lo);
        let c1 = (a + (j + 1) as f64 * dx).min(hi);
        if c1 <= c0 {
            if a + j as f64 * dx >= hi {
                break;
            }
            continue;
        }
        let pieces = ((c1 - c0) / max_len).ceil().max(1.0) as usize;
        let step = (c1 - c0) / pieces as f64;
        for p in 0..pieces {
            for (x, w) in rule.on(c0 + p as f64 * step, c0 + (p + 1) as f64 * step) {
                acc += f(x) * w;
            }
        }
    }
    acc
}

/// `U_s(xi)` and `U_s'(xi)` by direct quadrature.
pub fn particular_wave(s: f64, f: &[C64], g: &[C64], xi: f64) -> Result<(C64, C64)> {
    check_s(s)?;
    if !(-1.0..=0.0).contains(&xi) {
        return Err(Error::InvalidArgument(format!("xi = {xi} outside [-1, 0]")));
    }
    let is = I * s;
    let n = f.len() - 1;
    let max_len = 2.0 * PI / s.abs() / 2.0;
    let u = aligned_quadrature(-1.0, xi, -1.0, n, max_len, |r| {
        (s * (xi - r)).sin() * (is * interp(f, -1.0, r) + interp(g, -1.0, r)) / s
    });
    let du = aligned_quadrature(-1.0, xi, -1.0, n, max_len, |r| {
        (s * (xi - r)).cos() * (is * interp(f, -1.0, r) + interp(g, -1.0, r))
    });
    Ok((u, du))
}

/// `W_s(xi)` and `W_s'(xi)` by direct quadrature; the growth
/// `exp(Re sqrt(is) (r - xi))` is carried by the kernel, so values overflow
/// only beyond `|s| ~ 10^6`.
pub fn particular_heat(s: f64, h: &[C64], xi: f64) -> Result<(C64, C64)> {
    check_s(s)?;
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidArgument(format!("xi = {xi} outside [0, 1]")));
    }
    let mu = ComplexFrequency::imaginary(s).sqrt_value();
    let n = h.len() - 1;
    let max_len = (0.5 / mu.norm()).min(0.25);
    let w = aligned_quadrature(xi, 1.0, 0.0, n, max_len, |r| {
        -(mu * (r - xi)).sinh() * interp(h, 0.0, r) / mu
    });
    let dw = aligned_quadrature(xi, 1.0, 0.0, n, max_len, |r| {
        (mu * (r - xi)).cosh() * interp(h, 0.0, r)
    });
    Ok((w, dw))
}

/// The 2x2 coupling system for the coefficients `a`, `b`. Matrix and right
/// side are stored multiplied by `exp(-log_scale)`, `log_scale = Re sqrt(is)`.
#[derive(Clone, Debug)]
pub struct ResolventCoefficients {
    pub s: f64,
    pub variant: BoundaryVariant,
    pub m_scaled: [[C64; 2]; 2],
    pub rhs_scaled: [C64; 2],
    pub log_scale: f64,
    pub det_m: Scaled,
    pub a: C64,
    pub b: C64,
}

impl ResolventCoefficients {
    /// `|M (a, b)^T - rhs| / |rhs|` in the scaled form.
    pub fn residual(&self) -> f64 {
        let m = &self.m_scaled;
        let r0 = m[0][0] * self.a + m[0][1] * self.b - self.rhs_scaled[0];
        let r1 = m[1][0] * self.a + m[1][1] * self.b - self.rhs_scaled[1];
        let scale = (self.rhs_scaled[0].norm_sqr() + self.rhs_scaled[1].norm_sqr()).sqrt();
        (r0.norm_sqr() + r1.norm_sqr()).sqrt() / scale.max(f64::MIN_POSITIVE)
    }

    /// `det M` from the products of the stored matrix entries.
    pub fn det_from_entries(&self) -> Scaled {
        let m = &self.m_scaled;
        Scaled::new(m[0][0] * m[1][1] - m[0][1] * m[1][0], 2.0 * self.log_scale).normalized()
    }
}

/// `det M(s)` from its expansion, `(is)^{3/2} cos s cosh sqrt(is) - s sin s sinh sqrt(is)`
/// for the Neumann end and `(is)^{3/2} sin s cosh sqrt(is) + s cos s sinh sqrt(is)`
/// for the Dirichlet end.
pub fn det_expansion(s: f64, variant: BoundaryVariant) -> Scaled {
    let mu = ComplexFrequency::imaginary(s).sqrt_value();
    let (ch, sh) = (cosh_scaled(mu), sinh_scaled(mu));
    let is32 = I * s * mu;
    let m = match variant {
        BoundaryVariant::Neumann => is32 * s.cos() * ch - s * s.sin() * sh,
        BoundaryVariant::Dirichlet => is32 * s.sin() * ch + s * s.cos() * sh,
    };
    Scaled::new(m, mu.re).normalized()
}

/// `det M(s)` through the characteristic function: `is D_N(is)` or `s D_D(is)`.
pub fn det_from_characteristic<C: Characteristic + ?Sized>(model: &C, s: f64) -> Scaled {
    let d = model.char_fn_scaled(&ComplexFrequency::imaginary(s));
    let factor = match model.variant() {
        BoundaryVariant::Neumann => I * s,
        BoundaryVariant::Dirichlet => C64::new(s, 0.0),
    };
    Scaled::new(d.mantissa * factor, d.log_scale).normalized()
}

pub const SINGULAR_GUARD: f64 = 1e-300;

/// Closed-form solution of `(is - A) x = y` on the data grids.
#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub state: StateVector<C64>,
    pub w_prime: Vec<C64>,
    pub coefficients: ResolventCoefficients,
}

struct Assembled {
    coeffs: ResolventCoefficients,
    u: Vec<C64>,
    du: Vec<C64>,
    w: Vec<C64>,
    dw: Vec<C64>,
}

fn assemble_solution(s: f64, y: &DataTriple, variant: BoundaryVariant) -> Result<Assembled> {
    check_s(s)?;
    let is = I * s;
    let mu = ComplexFrequency::imaginary(s).sqrt_value();
    let l = mu.re;
    let eps = C64::from_polar(1.0, mu.im);
    let el = (-l).exp();
    let ch = |x: f64| cosh_scaled(mu * x) * (l * x - l).exp();
    let sh = |x: f64| sinh_scaled(mu * x) * (l * x - l).exp();

    let nw = y.n_wave();
    let (uu, udu) = wave_particular_nodes(s, &y.f, &y.g);
    let (u0, du0) = (uu[nw], udu[nw]);
    let r1u = y.f[nw] + is * u0;

    let heat = heat_integrals(mu, &y.h);
    let nh = y.n_heat();
    let (g1, hb0) = (heat.g[nh], heat.hb[0]);

    let (m11, m21) = match variant {
        BoundaryVariant::Neumann => (is * s.cos(), C64::new(s * s.sin(), 0.0)),
        BoundaryVariant::Dirichlet => (is * s.sin(), C64::new(-s * s.cos(), 0.0)),
    };
    let (c1, s1) = (ch(1.0), sh(1.0));
    let d_hat = m11 * mu * c1 - m21 * s1;
    if d_hat.norm() < SINGULAR_GUARD {
        return Err(Error::SingularSystem { s });
    }

    let w0_hat = -(eps * hb0 - el * g1) / (2.0 * mu);
    let dw0_hat = 0.5 * (eps * hb0 + el * g1);
    let h_a = 0.5 * (eps * g1 - el * hb0);
    let a = (mu * c1 * r1u + s1 * du0 + h_a) / d_hat;
    let rhs = [el * r1u + w0_hat, -(el * du0 + dw0_hat)];
    let b = (m11 * rhs[1] - m21 * rhs[0]) / d_hat;

    // wave segment
    let dx = 1.0 / nw as f64;
    let mut u = Vec::with_capacity(nw + 1);
    let mut du = Vec::with_capacity(nw + 1);
    for j in 0..=nw {
        let t = s * (j as f64 * dx);
        let (base, dbase) = match variant {
            BoundaryVariant::Neumann => (C64::new(t.cos(), 0.0), C64::new(-s * t.sin(), 0.0)),
            BoundaryVariant::Dirichlet => (C64::new(t.sin(), 0.0), C64::new(s * t.cos(), 0.0)),
        };
        u.push(a * base - uu[j]);
        du.push(a * dbase - udu[j]);
    }

    // heat segment
    let dh = 1.0 / nh as f64;
    let wave_drive = m21 * r1u + m11 * du0;
    let mut w = Vec::with_capacity(nh + 1);
    let mut dw = Vec::with_capacity(nh + 1);
    for k in 0..=nh {
        let eta = k as f64 * dh;
        let e_back = (-mu * (1.0 - eta) - l).exp();
        let e_fwd = (-mu * eta - l).exp();
        let q1 = (mu * (1.0 - eta) - l).exp() * g1;
        let q2 = (mu * eta - l).exp() * hb0;
        let (pc, ps) = {
            let x = eps * heat.a_plus[k];
            let y = e_back * heat.g[k];
            (0.5 * (x + y), 0.5 * (x - y))
        };
        let (sc, ss) = {
            let x = eps * heat.a_minus[k];
            let y = e_fwd * heat.hb[k];
            (0.5 * (x + y), 0.5 * (x - y))
        };
        let (qc, qs) = (0.5 * (q1 + q2), 0.5 * (q1 - q2));
        let k2 = (qc - pc - sc) / (2.0 * mu);
        let k3 = 0.5 * (ps + qs + ss);
        let dk2 = 0.5 * (ps - qs - ss);
        let dk3 = 0.5 * mu * (-pc - qc + sc);
        w.push((wave_drive * sh(1.0 - eta) + m21 * k2 + m11 * k3) / d_hat);
        dw.push((-wave_drive * mu * ch(1.0 - eta) + m21 * dk2 + m11 * dk3) / d_hat);
    }

    let coeffs = ResolventCoefficients {
        s,
        variant,
        m_scaled: [[m11 * el, s1], [m21 * el, mu * c1]],
        rhs_scaled: rhs,
        log_scale: l,
        det_m: Scaled::new(d_hat, l).normalized(),
        a,
        b,
    };
    Ok(Assembled {
        coeffs,
        u,
        du,
        w,
        dw,
    })
}

pub fn solve_coefficients(s: f64, y: &DataTriple, variant: BoundaryVariant) -> Result<ResolventCoefficients> {
    Ok(assemble_solution(s, y, variant)?.coeffs)
}

/// `x = R(is, A) y` sampled on the data grids, with exact `u'` and `w'`.
pub fn apply_resolvent(s: f64, y: &DataTriple, variant: BoundaryVariant) -> Result<ResolventSolution> {
    let sol = assemble_solution(s, y, variant)?;
    let is = I * s;
    let v: Vec<C64> = sol.u.iter().zip(&y.f).map(|(&u, &f)| is * u - f).collect();
    let state = StateVector::with_derivative(sol.u, v, sol.w, Some(sol.du))?;
    Ok(ResolventSolution {
        state,
        w_prime: sol.dw,
        coefficients: sol.coeffs,
    })
}

impl ResolventSolution {
    /// The boundary and interface conditions of `D(A)`, each as an absolute residual.
    pub fn boundary_residuals(&self) -> Vec<(&'static str, f64)> {
        let st = &self.state;
        let du = st.u_prime.as_ref().expect("closed form carries u'");
        let (nw, nh) = (st.n_wave(), st.n_heat());
        let end = match self.coefficients.variant {
            BoundaryVariant::Neumann => ("u'(-1)", du[0].norm()),
            BoundaryVariant::Dirichlet => ("u(-1)", st.u[0].norm()),
        };
        vec![
            end,
            ("w(1)", st.w[nh].norm()),
            ("v(0)-w(0)", (st.v[nw] - st.w[0]).norm()),
            ("u'(0)-w'(0)", (du[nw] - self.w_prime[0]).norm()),
        ]
    }

    /// Discrete L2 norm of `D^2 u + s^2 u + is f + g` and `D^2 w - is w + h`
    /// over interior nodes, with `D^2` the central second difference.
    pub fn equation_residual(&self, y: &DataTriple) -> f64 {
        let s = self.coefficients.s;
        let is = I * s;
        let st = &self.state;
        let (hw, hh) = (st.h_wave(), st.h_heat());
        let mut acc = 0.0;
        for j in 1..st.n_wave() {
            let d2 = (st.u[j + 1] - 2.0 * st.u[j] + st.u[j - 1]) / (hw * hw);
            acc += hw * (d2 + s * s * st.u[j] + is * y.f[j] + y.g[j]).norm_sqr();
        }
        for k in 1..st.n_heat() {
            let d2 = (st.w[k + 1] - 2.0 * st.w[k] + st.w[k - 1]) / (hh * hh);
            acc += hh * (d2 - is * st.w[k] + y.h[k]).norm_sqr();
        }
        acc.sqrt()
    }
}

/// Grid density rule for the discrete norm: at least 10 points per
/// wavelength `2 pi / |s|` and 10 per boundary-layer width `|s|^{-1/2}`.
pub fn resolution_ok(s: f64, grid: GridSpec) -> bool {
    let a = s.abs();
    grid.n_wave as f64 >= 10.0 * a / (2.0 * PI) && grid.n_heat as f64 >= 10.0 * a.sqrt()
}

/// The grid used by the sweeps: 20 points per wavelength and 10 per
/// boundary-layer width, with floors of 64 and 32 cells.
pub fn sweep_grid(s: f64) -> GridSpec {
    let a = s.abs();
    let nw = ((20.0 * a / (2.0 * PI)).ceil() as usize).max(64);
    let nh = ((10.0 * a.sqrt()).ceil() as usize).max(32);
    GridSpec { n_wave: nw, n_heat: nh }
}

fn check_resolution(s: f64, disc: &DiscreteGenerator) -> Result<()> {
    check_s(s)?;
    if !resolution_ok(s, disc.grid()) {
        let g = disc.grid();
        return Err(Error::ResolutionError(format!(
            "s = {s}: grid {}x{} below 10 points per wavelength / boundary layer",
            g.n_wave, g.n_heat
        )));
    }
    Ok(())
}

const LANCZOS_MAX: usize = 80;
const LANCZOS_TOL: f64 = 1e-10;

/// `||R(is, A_h)||` in the X-norm.
pub fn resolvent_norm_discrete(s: f64, disc: &DiscreteGenerator) -> Result<f64> {
    check_resolution(s, disc)?;
    discrete_norm_unchecked(s, disc)
}

/// Largest eigenvalue of the W-selfadjoint `R^# R` by Lanczos with full
/// reorthogonalisation, returned as its square root.
fn discrete_norm_unchecked(s: f64, disc: &DiscreteGenerator) -> Result<f64> {
    let solver = disc.shifted(I * s)?;
    let n = disc.dim();
    let op = |x: &[C64]| -> Vec<C64> {
        let y = solver.solve(x);
        let wy = w_apply(disc, &y);
        let t = solver.solve_adjoint(&wy);
        disc.w_solve(&t)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2b);
    let mut q: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nq = disc.w_norm(&q);
    q.iter_mut().for_each(|x| *x /= nq);
    let mut basis: Vec<Vec<C64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for j in 0..LANCZOS_MAX.min(n) {
        let mut r = op(&basis[j]);
        let a = disc.w_dot(&basis[j], &r).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = disc.w_dot(b, &r);
                r.iter_mut().zip(b).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let bnorm = disc.w_norm(&r);
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imax, &tmax) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let last = eig.eigenvectors[(k - 1, imax)].abs();
        let converged = bnorm * last <= LANCZOS_TOL * tmax.abs();
        theta = tmax;
        if converged || bnorm <= 1e-14 * tmax.abs() {
            break;
        }
        beta.push(bnorm);
        basis.push(r.into_iter().map(|x| x / bnorm).collect());
    }
    Ok(theta.max(0.0).sqrt())
}

fn w_apply(disc: &DiscreteGenerator, x: &[C64]) -> Vec<C64> {
    let (w, _) = disc.gram_matrices();
    w.matvec(x)
}

/// Dense-SVD value of `||R(is, A_h)||`: `1 / sigma_min(L^T (is - A_h) L^{-T})`
/// with `W = L L^T`. Intended for small grids.
pub fn resolvent_norm_dense(s: f64, disc: &DiscreteGenerator) -> Result<f64> {
    let n = disc.dim();
    let (w, _) = disc.gram_matrices();
    let chol = w
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::SolveFailure("Gram matrix not positive definite".into()))?;
    let l = chol.l().map(|x| C64::new(x, 0.0));
    let a = disc.dense_matrix().map(|x| C64::new(x, 0.0));
    let shifted = DMatrix::from_diagonal_element(n, n, I * s) - a;
    let lt = l.transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SolveFailure("triangular factor singular".into()))?;
    let c = &lt * shifted * lt_inv;
    let sv = c.singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(1.0 / smin)
}

/// `dist(is, sigma(A_h))` from inverse iteration started at `is` and `is +- i pi`.
pub fn spectral_distance(s: f64, disc: &DiscreteGenerator) -> Result<f64> {
    let target = I * s;
    let mut best = f64::INFINITY;
    for off in [0.0, PI, -PI] {
        let l = disc.nearest_eigenvalue(target + I * off)?;
        best = best.min((l - target).norm());
    }
    Ok(best)
}

/// A local maximum of `s -> ||R(is, A_h)||` next to a discrete eigenvalue.
#[derive(Clone, Copy, Debug)]
pub struct ResolventPeak {
    pub s: f64,
    pub norm: f64,
    pub eigenvalue: C64,
}

fn golden_max(lo: f64, hi: f64, iters: usize, mut f: impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Snaps `s_target` to the resonance of the discrete eigenvalue nearest
/// `i s_target` and maximises the discrete norm over
/// `|s - Im l| <= 3 |Re l|` by golden-section search.
pub fn resolvent_peak(s_target: f64, disc: &DiscreteGenerator) -> Result<ResolventPeak> {
    check_resolution(s_target, disc)?;
    let lambda = disc.nearest_eigenvalue(I * s_target)?;
    let half = 3.0 * lambda.re.abs().max(1e-6);
    let (s, norm) = golden_max(lambda.im - half, lambda.im + half, 30, |s| {
        discrete_norm_unchecked(s, disc)
    })?;
    Ok(ResolventPeak {
        s,
        norm,
        eigenvalue: lambda,
    })
}

/// Random smooth data concentrated near frequency `|s|`: wave modes
/// `cos, sin(k pi (xi + 1) / 2)` with `|k - 2 |s| / pi| <= 2` or `k <= 4`,
/// a dominant `cos, sin(|s| (xi + 1))` pair, heat modes of low order plus the boundary layer
/// `exp(-sqrt(|s|/2) xi)`. Gaussian coefficients, unit X-norm. For the
/// Dirichlet end only the sine modes enter `f`, so that `f(-1) = 0`.
pub fn random_data(s: f64, grid: GridSpec, variant: BoundaryVariant, rng: &mut ChaCha8Rng) -> DataTriple {
    let a = s.abs();
    let kc = 2.0 * a / PI;
    let mut ks: Vec<f64> = (0..=4).map(|k| k as f64).collect();
    let lo = (kc - 2.0).floor().max(5.0) as i64;
    let hi = (kc + 2.0).ceil() as i64;
    ks.extend((lo..=hi).map(|k| k as f64));
    let resonant = ks.len();
    let mut gauss = || -> C64 {
        // Box-Muller
        let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
        let r = (-2.0 * u1.ln()).sqrt();
        C64::new(r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin())
    };
    let mut wave_coeffs = |with_cos: bool| -> Vec<(f64, C64, C64)> {
        let mut c: Vec<(f64, C64, C64)> = ks
            .iter()
            .map(|&k| {
                let c = if with_cos { gauss() } else { C64::new(0.0, 0.0) };
                (k * PI / 2.0, c, gauss())
            })
            .collect();
        // the resonant frequency itself, weighted to dominate
        let w = (resonant as f64).sqrt() * 2.0;
        let c0 = if with_cos { gauss() * w } else { C64::new(0.0, 0.0) };
        c.push((a, c0, gauss() * w));
        c
    };
    let fc = wave_coeffs(variant == BoundaryVariant::Neumann);
    let gc = wave_coeffs(true);
    let layer = (a / 2.0).sqrt();
    let hc: Vec<(f64, C64, C64)> = (0..=4).map(|k| (k as f64 * PI / 2.0, gauss(), gauss())).collect();
    let (hl1, hl2) = (gauss(), gauss());
    let eval = |c: &[(f64, C64, C64)], x: f64| -> C64 {
        c.iter().map(|&(w, a, b)| a * (w * x).cos() + b * (w * x).sin()).sum()
    };
    let y = DataTriple::from_fn(
        grid,
        |x| eval(&fc, x + 1.0),
        |x| eval(&gc, x + 1.0),
        |x| {
            eval(&hc, x)
                + (-layer * x).exp() * (hl1 * (layer * x).cos() + hl2 * (layer * x).sin()) * 3.0
        },
    );
    let n = y.norm_x();
    y.scale(1.0 / n)
}

/// Largest `||R(is) y||_X / ||y||_X` over the given data.
pub fn sampled_norm_over(s: f64, data: &[DataTriple], variant: BoundaryVariant) -> Result<f64> {
    let vals: Result<Vec<f64>> = data
        .par_iter()
        .map(|y| Ok(apply_resolvent(s, y, variant)?.state.norm_x / y.norm_x()))
        .collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

/// A lower bound for `||R(is)||`: the best of `trials` random data triples.
pub fn resolvent_norm_sampled(
    s: f64,
    trials: usize,
    grid: GridSpec,
    variant: BoundaryVariant,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_s(s)?;
    let data = sampled_data(s, trials, grid, variant, seed);
    sampled_norm_over(s, &data, variant)
}

pub fn sampled_data(s: f64, trials: usize, grid: GridSpec, variant: BoundaryVariant, seed: u64) -> Vec<DataTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| random_data(s, grid, variant, &mut rng)).collect()
}

/// The sampled bound maximised over `|s - Im l| <= 3 |Re l|` around the
/// exact eigenvalue `l` nearest `i s_target`, with one fixed set of data.
pub fn sampled_peak(
    s_target: f64,
    trials: usize,
    grid: GridSpec,
    variant: BoundaryVariant,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let lambda = nearest_exact_eigenvalue(s_target, variant)?;
    let data = sampled_data(lambda.im, trials, grid, variant, seed);
    let half = 3.0 * lambda.re.abs();
    golden_max(lambda.im - half, lambda.im + half, 25, |s| sampled_norm_over(s, &data, variant))
}

/// The polished root of the characteristic function closest to `i s`.
pub fn nearest_exact_eigenvalue(s: f64, variant: BoundaryVariant) -> Result<C64> {
    use crate::spectrum::{polish, EigenvalueSeed};
    let base = match variant {
        BoundaryVariant::Neumann => (s / PI - 0.5).round() as i64,
        BoundaryVariant::Dirichlet => (s / PI).round() as i64,
    };
    let mut best: Option<C64> = None;
    for n in base - 1..=base + 1 {
        if let Some(seed) = EigenvalueSeed::for_variant(variant, n) {
            let z = polish(&seed, variant)?.lambda.value();
            if best.is_none_or(|b| (z - I * s).norm() < (b - I * s).norm()) {
                best = Some(z);
            }
        }
    }
    best.ok_or_else(|| Error::NoConvergence {
        iters: 0,
        residual: f64::NAN,
    })
}

/// One row of a resolvent sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub s_target: f64,
    pub s: f64,
    pub norm_discrete: f64,
    pub norm_sampled: f64,
    pub s_sampled: f64,
    pub spectral_lower_bound: f64,
    pub grid: GridSpec,
    pub norm_refined: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub s_values: Vec<f64>,
    pub variant: BoundaryVariant,
    pub trials: usize,
    pub seed: u64,
    pub check_refinement: bool,
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Runs the peak-snapped sweep; rows come back in input order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.s_values
        .par_iter()
        .map(|&st| {
            let grid = sweep_grid(st);
            let disc = assemble(grid, cfg.variant);
            let peak = resolvent_peak(st, &disc)?;
            let lower = 1.0 / spectral_distance(peak.s, &disc)?;
            let (s_sampled, norm_sampled) = if cfg.trials > 0 {
                sampled_peak(peak.s, cfg.trials, grid, cfg.variant, cfg.seed)?
            } else {
                (f64::NAN, f64::NAN)
            };
            let norm_refined = if cfg.check_refinement {
                let fine = assemble(grid.refined(), cfg.variant);
                Some(resolvent_peak(peak.s, &fine)?.norm)
            } else {
                None
            };
            Ok(SweepRow {
                s_target: st,
                s: peak.s,
                norm_discrete: peak.norm,
                norm_sampled,
                s_sampled,
                spectral_lower_bound: lower,
                grid,
                norm_refined,
            })
        })
        .collect()
}

/// Least-squares slope and its standard error for `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let stderr = if n > 2.0 { (resid / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, stderr)
}

pub const RESOLVENT_HEADER: &str =
    "s,norm_discrete,norm_sampled,spectral_lower_bound,grid_N,slope_window_estimate,s_target";

/// Writes `resolvent.csv`; the local slope uses the rows within two
/// positions of each row.
pub fn write_resolvent_csv<W: std::io::Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{RESOLVENT_HEADER}")?;
    for (i, r) in rows.iter().enumerate() {
        let lo = i.saturating_sub(2);
        let hi = (i + 3).min(rows.len());
        let local = if hi - lo >= 3 {
            let xs: Vec<f64> = rows[lo..hi].iter().map(|r| r.s).collect();
            let ys: Vec<f64> = rows[lo..hi].iter().map(|r| r.norm_discrete).collect();
            loglog_slope(&xs, &ys).0
        } else {
            f64::NAN
        };
        writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{},{:.6},{:.12e}",
            r.s, r.norm_discrete, r.norm_sampled, r.spectral_lower_bound, r.grid.n_wave, local, r.s_target
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::uniform(n).unwrap()
    }

    #[test]
    fn exp_weights_agree_across_switch() {
        for z in [C64::new(1.999, 0.0), C64::new(0.0, 1.999), C64::new(1.4, 1.4)] {
            let (a0, a1) = linear_exp_weights(z);
            let z2 = z * (2.001 / 1.999);
            let (b0, b1) = linear_exp_weights(z2);
            assert!((a0 - b0).norm() < 1e-3 && (a1 - b1).norm() < 1e-3);
            // closed form at the same point
            let ez = (-z).exp();
            let e1 = (1.0 - ez * (1.0 + z)) / (z * z);
            assert!((a1 - e1).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let y = DataTriple::zeros(32, 32);
        let c = solve_coefficients(10.0, &y, BoundaryVariant::Neumann).unwrap();
        assert_eq!(c.a, C64::new(0.0, 0.0));
        assert_eq!(c.b, C64::new(0.0, 0.0));
        assert_eq!(particular_wave(10.0, &y.f, &y.g, 0.0).unwrap(), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        assert_eq!(particular_heat(10.0, &y.h, 0.5).unwrap(), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    }

    #[test]
    fn zero_frequency_rejected() {
        let y = DataTriple::zeros(16, 16);
        assert!(matches!(apply_resolvent(0.0, &y, BoundaryVariant::Neumann), Err(Error::DegenerateInput(_))));
        assert!(matches!(particular_wave(0.0, &y.f, &y.g, 0.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn recurrences_match_direct_quadrature() {
        let g = grid(40);
        let y = DataTriple::from_fn(
            g,
            |x| C64::new((3.0 * x).sin(), 0.2),
            |x| C64::new(x * x, -x),
            |x| C64::new((2.0 * x).cos(), x),
        );
        for s in [2.0, 10.0, -7.5, 100.0] {
            let (u, du) = wave_particular_nodes(s, &y.f, &y.g);
            for j in [0, 13, 40] {
                let xi = -1.0 + j as f64 / 40.0;
                let (a, b) = particular_wave(s, &y.f, &y.g, xi).unwrap();
                assert!((a - u[j]).norm() < 1e-11 * (1.0 + a.norm()), "s={s} j={j}");
                assert!((b - du[j]).norm() < 1e-11 * (1.0 + b.norm()));
            }
            let mu = ComplexFrequency::imaginary(s).sqrt_value();
            let heat = heat_integrals(mu, &y.h);
            // W(0) = -(1/mu) int sinh(mu r) h = -(e^mu Hb(0) - G(1)) / (2 mu)
            let w0 = -(mu.exp() * heat.hb[0] - heat.g[40]) / (2.0 * mu);
            let (a, _) = particular_heat(s, &y.h, 0.0).unwrap();
            assert!((a - w0).norm() < 1e-11 * a.norm(), "s={s}: {a} vs {w0}");
        }
    }

    #[test]
    fn coefficient_system_and_two_determinants() {
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            let y = DataTriple::from_fn(
                grid(64),
                |x| C64::new((x + 1.0).powi(2), 0.0),
                |x| C64::new(0.0, x.cos()),
                |x| C64::new(1.0 - x, 0.0),
            );
            for s in [2.0, 17.0, 313.0] {
                let c = solve_coefficients(s, &y, v).unwrap();
                assert!(c.residual() < 1e-10, "{v} s={s} residual {}", c.residual());
                let e = det_expansion(s, v);
                let x = det_from_characteristic(&v, s);
                let m = c.det_from_entries();
                for other in [x, m] {
                    let ratio = other.div(e);
                    let rel = (ratio.mantissa * ratio.log_scale.exp() - 1.0).norm();
                    assert!(rel < 1e-10, "{v} s={s}: {rel}");
                }
            }
        }
    }

    #[test]
    fn closed_form_satisfies_domain_conditions() {
        for v in [BoundaryVariant::Neumann, BoundaryVariant::Dirichlet] {
            let g = grid(256);
            let y = DataTriple::from_fn(
                g,
                |x| C64::new((PI * (x + 1.0)).sin(), 0.0),
                |x| C64::new(x, 1.0),
                |x| C64::new((1.0 - x) * x.exp(), 0.0),
            );
            for s in [2.0, 10.0, 100.0, 1000.0, -30.0] {
                let sol = apply_resolvent(s, &y, v).unwrap();
                let ny = y.norm_x();
                for (name, r) in sol.boundary_residuals() {
                    assert!(r <= 1e-8 * ny, "{v} s={s} {name}: {r}");
                }
            }
        }
    }

    #[test]
    fn norms_are_conjugate_symmetric_and_dense_oracle_agrees() {
        let g = assemble(GridSpec::new(24, 16).unwrap(), BoundaryVariant::Neumann);
        for s in [3.0, 5.5] {
            let a = discrete_norm_unchecked(s, &g).unwrap();
            let b = discrete_norm_unchecked(-s, &g).unwrap();
            let d = resolvent_norm_dense(s, &g).unwrap();
            assert!((a - b).abs() < 1e-8 * a);
            assert!((a - d).abs() < 1e-8 * d, "{a} vs {d}");
        }
    }

    #[test]
    fn precondition_and_trials_guard() {
        let g = assemble(grid(16), BoundaryVariant::Neumann);
        assert!(matches!(resolvent_norm_discrete(100.0, &g), Err(Error::ResolutionError(_))));
        assert!(resolvent_norm_sampled(10.0, 0, grid(16), BoundaryVariant::Neumann, 1).is_err());
    }
}
