//! Eigenvalues of the generator: seed lattice, Newton polishing, argument
//! principle counts on circles and rectangles, and the asymptotic table.
//!
//! All root finding runs on the entire reduced function `E = D / sqrt(l)`
//! (see [`crate::characteristic`]). Its zeros are the non-zero eigenvalues,
//! including the few that sit on the negative real axis, and contours never
//! have to care about the square-root cut. For the Neumann end the origin is
//! an eigenvalue as well and is added to contour counts by hand.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::characteristic::{BoundaryVariant, Characteristic};
use crate::error::{Error, Result};
use crate::freq::{ComplexFrequency, C64, I};
use crate::quadrature::Rule;

pub const MAX_NEWTON_ITERS: usize = 50;
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const STEP_TOL: f64 = 1e-13;
/// A sample this close (Newton distance `|E/E'|`) to a zero rejects a contour.
pub const CONTOUR_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenvalueSeed {
    pub n: i64,
    pub center: ComplexFrequency,
    pub radius: f64,
}

impl EigenvalueSeed {
    /// Neumann lattice `(n + 1/2) pi i`, radius `2 |n + 1/2|^{-1/2}`.
    pub fn neumann(n: i64) -> Self {
        let k = n as f64 + 0.5;
        Self {
            n,
            center: ComplexFrequency::imaginary(k * PI),
            radius: 2.0 / k.abs().sqrt(),
        }
    }

    /// Dirichlet lattice `n pi i`, radius `2 |n|^{-1/2}`; `n != 0`.
    pub fn dirichlet(n: i64) -> Option<Self> {
        (n != 0).then(|| Self {
            n,
            center: ComplexFrequency::imaginary(n as f64 * PI),
            radius: 2.0 / (n.unsigned_abs() as f64).sqrt(),
        })
    }

    pub fn for_variant(variant: BoundaryVariant, n: i64) -> Option<Self> {
        match variant {
            BoundaryVariant::Neumann => Some(Self::neumann(n)),
            BoundaryVariant::Dirichlet => Self::dirichlet(n),
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center.value()).norm() < self.radius
    }

    /// The seed of the conjugate branch.
    pub fn conjugate_index(&self, variant: BoundaryVariant) -> i64 {
        match variant {
            BoundaryVariant::Neumann => -self.n - 1,
            BoundaryVariant::Dirichlet => -self.n,
        }
    }
}

/// Seeds with indices `-n_max..=n_max` (Neumann, `2 n_max + 1` seeds) or
/// `+-1..=+-n_max` (Dirichlet, `2 n_max` seeds), ordered by index.
pub fn seeds(variant: BoundaryVariant, n_max: usize) -> Vec<EigenvalueSeed> {
    let m = n_max as i64;
    (-m..=m)
        .filter_map(|n| EigenvalueSeed::for_variant(variant, n))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenvalueRecord {
    pub n: i64,
    pub lambda: ComplexFrequency,
    /// `|D(l)| / ((1 + |sqrt l|) exp(|Re l| + Re sqrt l))`.
    pub residual: f64,
    pub iters: usize,
    pub contained: bool,
    pub variant: BoundaryVariant,
}

/// Newton's method on `E` from `z0`. Returns the root, iteration count and
/// relative residual.
pub fn newton<C: Characteristic + ?Sized>(
    model: &C,
    z0: C64,
    max_step: f64,
) -> Result<(C64, usize, f64)> {
    let mut z = z0;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_NEWTON_ITERS {
        let lambda = ComplexFrequency::new(z);
        let r = model.reduced(&lambda);
        residual = model.relative_residual(&lambda);
        if r.deriv.norm() == 0.0 || !r.deriv.norm().is_finite() {
            break;
        }
        let mut step = r.value / r.deriv;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        z -= step;
        if step.norm() <= STEP_TOL * z.norm().max(1.0) || residual <= RESIDUAL_TOL * 1e-3 {
            let res = model.relative_residual(&ComplexFrequency::new(z));
            if res <= RESIDUAL_TOL {
                return Ok((z, it, res));
            }
        }
    }
    let res = model.relative_residual(&ComplexFrequency::new(z));
    if res <= RESIDUAL_TOL {
        return Ok((z, MAX_NEWTON_ITERS, res));
    }
    Err(Error::NoConvergence {
        iters: MAX_NEWTON_ITERS,
        residual: res.min(residual),
    })
}

pub fn polish(seed: &EigenvalueSeed, variant: BoundaryVariant) -> Result<EigenvalueRecord> {
    polish_with(&variant, seed)
}

/// Newton from the seed center; when that fails, the roots inside the
/// bounding square of a doubled disk are located by subdivision and the one
/// nearest the center is returned.
pub fn polish_with<C: Characteristic + ?Sized>(
    model: &C,
    seed: &EigenvalueSeed,
) -> Result<EigenvalueRecord> {
    let center = seed.center.value();
    let (root, iters, residual) = match newton(model, center, seed.radius) {
        Ok(found) => found,
        Err(err) => {
            let r = 2.0 * seed.radius;
            let rect = Rectangle::new(center.re - r, center.re + r, center.im - r, center.im + r);
            let roots = roots_in_rectangle(model, &rect, 12).map_err(|_| err)?;
            let best = roots
                .into_iter()
                .min_by(|a, b| {
                    (a - center).norm().partial_cmp(&(b - center).norm()).unwrap()
                })
                .ok_or(Error::NoConvergence {
                    iters: MAX_NEWTON_ITERS,
                    residual: f64::NAN,
                })?;
            let (z, it, res) = newton(model, best, seed.radius)?;
            (z, it + MAX_NEWTON_ITERS, res)
        }
    };
    Ok(EigenvalueRecord {
        n: seed.n,
        lambda: ComplexFrequency::new(root),
        residual,
        iters,
        contained: seed.contains(root),
        variant: model.variant(),
    })
}

/// Polishes every seed in parallel; results are ordered by index.
pub fn eigenvalues(variant: BoundaryVariant, n_max: usize) -> Result<Vec<EigenvalueRecord>> {
    eigenvalues_with(&variant, n_max)
}

pub fn eigenvalues_with<C: Characteristic + ?Sized>(
    model: &C,
    n_max: usize,
) -> Result<Vec<EigenvalueRecord>> {
    seeds(model.variant(), n_max)
        .par_iter()
        .map(|s| polish_with(model, s))
        .collect()
}

fn log_derivative<C: Characteristic + ?Sized>(model: &C, z: C64) -> Result<C64> {
    let r = model.reduced(&ComplexFrequency::new(z));
    if r.value.norm() < CONTOUR_GUARD * r.deriv.norm() {
        return Err(Error::ContourTooClose {
            distance: r.value.norm() / r.deriv.norm(),
        });
    }
    Ok(r.deriv / r.value)
}

fn origin_inside(variant: BoundaryVariant, inside: bool) -> i64 {
    i64::from(variant.has_zero_eigenvalue() && inside)
}

/// Number of eigenvalues in the open disk `|l - center| < radius`.
///
/// Trapezoidal rule for `(1/2 pi i) \oint E'/E`, starting with 256 points and
/// doubling until the rounded value is the same at two successive levels.
pub fn count_zeros_contour(center: C64, radius: f64, variant: BoundaryVariant) -> Result<i64> {
    count_zeros_contour_with(&variant, center, radius)
}

pub fn count_zeros_contour_with<C: Characteristic + ?Sized>(
    model: &C,
    center: C64,
    radius: f64,
) -> Result<i64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius}")));
    }
    let mut points = 256usize;
    let mut previous: Option<i64> = None;
    while points <= 1 << 18 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..points {
            let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / points as f64);
            acc += log_derivative(model, center + radius * e)? * (radius * e);
        }
        let winding = acc / points as f64;
        let rounded = winding.re.round();
        if (winding.re - rounded).abs() < 0.05 && winding.im.abs() < 0.05 {
            let n = rounded as i64;
            if previous == Some(n) {
                let inside = center.norm() < radius;
                return Ok(n + origin_inside(model.variant(), inside));
            }
            previous = Some(n);
        } else {
            previous = None;
        }
        points *= 2;
    }
    Err(Error::ContourUnstable(format!(
        "circle at {center} radius {radius}"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    fn quadrants(&self, tx: f64, ty: f64) -> [Rectangle; 4] {
        let xm = self.re_min + tx * (self.re_max - self.re_min);
        let ym = self.im_min + ty * (self.im_max - self.im_min);
        [
            Rectangle::new(self.re_min, xm, self.im_min, ym),
            Rectangle::new(xm, self.re_max, self.im_min, ym),
            Rectangle::new(self.re_min, xm, ym, self.im_max),
            Rectangle::new(xm, self.re_max, ym, self.im_max),
        ]
    }
}

fn edge_integral<C: Characteristic + ?Sized>(
    model: &C,
    a: C64,
    b: C64,
    panels: usize,
    rule: &Rule,
) -> Result<C64> {
    let d = b - a;
    let mut acc = C64::new(0.0, 0.0);
    let h = 1.0 / panels as f64;
    for p in 0..panels {
        for (t, w) in rule.on(p as f64 * h, (p + 1) as f64 * h) {
            acc += log_derivative(model, a + d * t)? * (d * w);
        }
    }
    Ok(acc)
}

/// Number of eigenvalues inside a rectangle, by composite Gauss-Legendre
/// quadrature of `E'/E` along its edges (panel count doubled to stability).
pub fn count_zeros_rectangle(rect: &Rectangle, variant: BoundaryVariant) -> Result<i64> {
    count_zeros_rectangle_with(&variant, rect)
}

pub fn count_zeros_rectangle_with<C: Characteristic + ?Sized>(
    model: &C,
    rect: &Rectangle,
) -> Result<i64> {
    let rule = Rule::new(16);
    let c = rect.corners();
    let perimeter = 2.0 * ((rect.re_max - rect.re_min) + (rect.im_max - rect.im_min));
    let mut panels = (perimeter.ceil() as usize).clamp(4, 4096);
    let mut previous: Option<i64> = None;
    while panels <= 1 << 16 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..4 {
            acc += edge_integral(model, c[k], c[(k + 1) % 4], panels, &rule)?;
        }
        let winding = acc / (2.0 * PI * I);
        let rounded = winding.re.round();
        if (winding.re - rounded).abs() < 0.05 && winding.im.abs() < 0.05 {
            let n = rounded as i64;
            if previous == Some(n) {
                return Ok(n + origin_inside(model.variant(), rect.contains(C64::new(0.0, 0.0))));
            }
            previous = Some(n);
        } else {
            previous = None;
        }
        panels *= 2;
    }
    Err(Error::ContourUnstable(format!("{rect:?}")))
}

/// Zeros of `E` inside `rect` by recursive quartering (split points nudged
/// off-center when a zero sits on a cut line).
pub fn roots_in_rectangle<C: Characteristic + ?Sized>(
    model: &C,
    rect: &Rectangle,
    max_depth: usize,
) -> Result<Vec<C64>> {
    let count = count_e_zeros(model, rect)?;
    let mut out = Vec::new();
    collect_roots(model, rect, count, max_depth, &mut out)?;
    out.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).unwrap());
    Ok(out)
}

fn count_e_zeros<C: Characteristic + ?Sized>(model: &C, rect: &Rectangle) -> Result<i64> {
    let total = count_zeros_rectangle_with(model, rect)?;
    Ok(total - origin_inside(model.variant(), rect.contains(C64::new(0.0, 0.0))))
}

fn collect_roots<C: Characteristic + ?Sized>(
    model: &C,
    rect: &Rectangle,
    count: i64,
    depth: usize,
    out: &mut Vec<C64>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let width = (rect.re_max - rect.re_min).max(rect.im_max - rect.im_min);
    if count == 1 {
        let mid = C64::new(
            0.5 * (rect.re_min + rect.re_max),
            0.5 * (rect.im_min + rect.im_max),
        );
        if let Ok((z, _, _)) = newton(model, mid, 0.5 * width) {
            if rect.contains(z) {
                out.push(z);
                return Ok(());
            }
        }
    }
    if depth == 0 {
        return Err(Error::NoConvergence {
            iters: 0,
            residual: f64::NAN,
        });
    }
    for &(tx, ty) in &[(0.5, 0.5), (0.4731, 0.5269), (0.5377, 0.4613)] {
        let quads = rect.quadrants(tx, ty);
        let counts: Result<Vec<i64>> = quads.iter().map(|q| count_e_zeros(model, q)).collect();
        if let Ok(counts) = counts {
            if counts.iter().sum::<i64>() == count {
                for (q, c) in quads.iter().zip(counts) {
                    collect_roots(model, q, c, depth - 1, out)?;
                }
                return Ok(());
            }
        }
    }
    Err(Error::ContourUnstable(format!("could not split {rect:?}")))
}

#[derive(Clone, Copy, Debug)]
pub struct AsymptoticRow {
    pub n: i64,
    pub lambda: C64,
    /// `|Im l - Im seed|`.
    pub lattice_deviation: f64,
    /// `|Re l| |Im l|^{1/2}`.
    pub product: f64,
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct AsymptoticsReport {
    pub rows: Vec<AsymptoticRow>,
    /// Maximum and minimum of `product` over the upper half of the rows
    /// (ordered by `|Im l|`).
    pub c_upper: f64,
    pub c_lower: f64,
    pub all_negative: bool,
}

impl AsymptoticsReport {
    pub fn band_ratio(&self) -> f64 {
        self.c_upper / self.c_lower
    }
}

pub fn asymptotics_report(records: &[EigenvalueRecord]) -> Result<AsymptoticsReport> {
    if records.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "{} records, need at least 20",
            records.len()
        )));
    }
    let mut rows: Vec<AsymptoticRow> = records
        .iter()
        .map(|r| {
            let l = r.lambda.value();
            let seed = EigenvalueSeed::for_variant(r.variant, r.n)
                .unwrap_or_else(|| EigenvalueSeed::neumann(r.n));
            AsymptoticRow {
                n: r.n,
                lambda: l,
                lattice_deviation: (l.im - seed.center.value().im).abs(),
                product: l.re.abs() * l.im.abs().sqrt(),
                radius: seed.radius,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.lambda.im.abs().partial_cmp(&b.lambda.im.abs()).unwrap());
    let top = &rows[rows.len() / 2..];
    let c_upper = top.iter().map(|r| r.product).fold(f64::MIN, f64::max);
    let c_lower = top.iter().map(|r| r.product).fold(f64::MAX, f64::min);
    let all_negative = records.iter().all(|r| r.lambda.value().re < 0.0);
    Ok(AsymptoticsReport {
        rows,
        c_upper,
        c_lower,
        all_negative,
    })
}

pub const EIGENVALUE_HEADER: &str = "n,re,im,residual,iters,contained,variant";

pub fn write_eigenvalues_csv<W: Write>(mut out: W, records: &[EigenvalueRecord]) -> std::io::Result<()> {
    writeln!(out, "{EIGENVALUE_HEADER}")?;
    for r in records {
        let l = r.lambda.value();
        writeln!(
            out,
            "{},{:.15e},{:.15e},{:.3e},{},{},{}",
            r.n, l.re, l.im, r.residual, r.iters, r.contained, r.variant
        )?;
    }
    Ok(())
}
