//! One-shot PASS/FAIL report over the toolkit's invariants.

use std::fmt;

use crate::characteristic::{lemma32_ratio, BoundaryVariant, Characteristic, Reduced};
use crate::discretization::{assemble, GridSpec};
use crate::domain::{make_domain_data, Profile};
use crate::error::{Error, Result};
use crate::freq::{cosh_scaled, sinh_scaled, ComplexFrequency, Scaled, C64};
use crate::resolvent::{self, DataTriple};
use crate::simulator::{self, SimulationConfig, Simulator};
use crate::spectrum::{self, EigenvalueSeed};
use crate::state::StateVector;

/// A characteristic function with the sign of its second term flipped.
/// Used to confirm that the checks below notice a wrong model.
#[derive(Clone, Copy, Debug)]
pub struct SignFlipped(pub BoundaryVariant);

impl Characteristic for SignFlipped {
    fn variant(&self) -> BoundaryVariant {
        self.0
    }

    fn reduced(&self, lambda: &ComplexFrequency) -> Reduced {
        // E = a + b  ->  a - b, with a the cosh/sinh(l) cosh(mu) term
        let base = self.0.reduced(lambda);
        let l = lambda.value();
        let mu = lambda.sqrt_value();
        let (ch, sh) = (cosh_scaled(l), sinh_scaled(l));
        let chm = cosh_scaled(mu);
        let half_sinhc = if mu.norm() < 1e-8 {
            C64::new(0.5, 0.0)
        } else {
            sinh_scaled(mu) / (2.0 * mu)
        };
        let (a, da) = match self.0 {
            BoundaryVariant::Neumann => (ch * chm, sh * chm + ch * half_sinhc),
            BoundaryVariant::Dirichlet => (sh * chm, ch * chm + sh * half_sinhc),
        };
        Reduced {
            value: 2.0 * a - base.value,
            deriv: 2.0 * da - base.deriv,
            log_scale: base.log_scale,
        }
    }
}

fn borrowed<T>(r: &Result<T>) -> Result<&T> {
    r.as_ref().map_err(|e| Error::InvalidArgument(e.to_string()))
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<34} {}", self.name, self.measured)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    fn push(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (passed, measured) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            measured,
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        )
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub variant: BoundaryVariant,
    pub n_max: usize,
    pub s_values: Vec<f64>,
    pub seed: u64,
    pub trials: usize,
    /// Simulation setup; `None` skips the decay checks.
    pub decay: Option<SimulationConfig>,
}

impl VerifyOptions {
    pub fn new(variant: BoundaryVariant) -> Self {
        Self {
            variant,
            n_max: 100,
            s_values: resolvent::log_spaced(10.0, 1000.0, 25),
            seed: 7,
            trials: 0,
            decay: Some(SimulationConfig::default_for(variant)),
        }
    }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Runs every check with `model` as the characteristic function.
pub fn run_checks<C: Characteristic + ?Sized>(model: &C, opts: &VerifyOptions) -> Report {
    let variant = opts.variant;
    let mut report = Report::default();

    report.push("schwarz reflection of D", (|| {
        let mut worst: f64 = 0.0;
        for &(re, im) in &[(0.3, 2.0), (-1.5, 7.0), (2.0, 40.0), (-0.2, 150.0)] {
            let z = ComplexFrequency::new(C64::new(re, im));
            let a = model.char_fn_scaled(&z.conj());
            let b = model.char_fn_scaled(&z);
            let d = a.div(Scaled::new(b.mantissa.conj(), b.log_scale));
            worst = worst.max((d.mantissa * d.log_scale.exp() - 1.0).norm());
        }
        Ok((worst <= 1e-12, format!("max rel {worst:.2e}")))
    })());

    let records = spectrum::eigenvalues_with(model, opts.n_max);
    report.push("eigenvalue localization", (|| {
        let recs = borrowed(&records)?;
        let n0 = 5;
        let mut bad = 0;
        let mut worst_res: f64 = 0.0;
        for r in recs.iter().filter(|r| r.n.abs() >= n0 && r.n >= 0) {
            let seed = EigenvalueSeed::for_variant(variant, r.n).expect("indexed seed");
            let count = spectrum::count_zeros_contour_with(model, seed.center.value(), seed.radius)?;
            if !(r.contained && r.lambda.value().re < 0.0 && count == 1) {
                bad += 1;
            }
            worst_res = worst_res.max(r.residual);
        }
        Ok((bad == 0, format!("{bad} bad disks, max residual {worst_res:.1e}")))
    })());

    report.push("eigenvalue asymptotic band", (|| {
        let recs = borrowed(&records)?;
        let upper: Vec<_> = recs.iter().filter(|r| r.n >= 0).cloned().collect();
        let a = spectrum::asymptotics_report(&upper)?;
        Ok((
            a.all_negative && a.band_ratio() <= 3.0,
            format!("c in [{:.5}, {:.5}], ratio {:.4}", a.c_lower, a.c_upper, a.band_ratio()),
        ))
    })());

    report.push("conjugate pairing of roots", (|| {
        let recs = borrowed(&records)?;
        let mut worst: f64 = 0.0;
        let mut pairs = 0;
        for r in recs.iter().filter(|r| r.n >= 0) {
            let seed = EigenvalueSeed::for_variant(variant, r.n).expect("indexed seed");
            let j = seed.conjugate_index(variant);
            if let Some(partner) = recs.iter().find(|q| q.n == j) {
                worst = worst.max(rel(partner.lambda.value(), r.lambda.value().conj()));
                pairs += 1;
            }
        }
        if pairs == 0 {
            return Err(Error::InsufficientData("no conjugate pairs".into()));
        }
        Ok((worst <= 1e-10, format!("{pairs} pairs, max rel {worst:.2e}")))
    })());

    report.push("det M two-path agreement", (|| {
        let y = DataTriple::from_fn(
            GridSpec::uniform(64)?,
            |x| C64::new((x + 1.0).powi(2), 0.0),
            |x| C64::new(0.0, x.cos()),
            |x| C64::new(1.0 - x, 0.0),
        );
        let mut worst: f64 = 0.0;
        for s in [2.0, 10.0, 100.0, 313.0] {
            let c = resolvent::solve_coefficients(s, &y, variant)?;
            let e = resolvent::det_expansion(s, variant);
            for other in [resolvent::det_from_characteristic(model, s), c.det_from_entries()] {
                let q = other.div(e);
                worst = worst.max((q.mantissa * q.log_scale.exp() - 1.0).norm());
            }
        }
        Ok((worst <= 1e-10, format!("max rel {worst:.2e}")))
    })());

    report.push("growth ratio |D(is)| e^{-sqrt(s/2)} > 0", (|| {
        let s_values = resolvent::log_spaced(2.0, 1e4, 2000);
        let mut min = f64::INFINITY;
        for s in s_values {
            min = min.min(lemma32_ratio(s)?);
        }
        Ok((min > 0.0, format!("min {min:.6}")))
    })());

    report.push("closed-form resolvent residuals", (|| {
        let grid = GridSpec::uniform(256)?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(opts.seed);
        let mut worst: f64 = 0.0;
        for s in [2.0, 10.0, 100.0] {
            let y = resolvent::random_data(s, grid, variant, &mut rng);
            let sol = resolvent::apply_resolvent(s, &y, variant)?;
            for (_, r) in sol.boundary_residuals() {
                worst = worst.max(r / y.norm_x());
            }
        }
        Ok((worst <= 1e-8, format!("max boundary residual {worst:.2e} ||y||")))
    })());

    let sweep = resolvent::sweep(&resolvent::SweepConfig {
        s_values: opts.s_values.clone(),
        variant,
        trials: opts.trials,
        seed: opts.seed,
        check_refinement: false,
    });
    report.push("resolvent norm growth slope", (|| {
        let rows = borrowed(&sweep)?;
        let xs: Vec<f64> = rows.iter().map(|r| r.s).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.norm_discrete).collect();
        let (slope, se) = resolvent::loglog_slope(&xs, &ys);
        Ok(((0.4..=0.6).contains(&slope), format!("slope {slope:.4} +- {se:.4}")))
    })());
    report.push("||R|| dist(is, spectrum) >= 1", (|| {
        let rows = borrowed(&sweep)?;
        let min = rows
            .iter()
            .map(|r| r.norm_discrete / r.spectral_lower_bound)
            .fold(f64::INFINITY, f64::min);
        Ok((min >= 1.0 - 1e-9, format!("min product {min:.6}")))
    })());

    let grid = GridSpec::uniform(64).expect("valid");
    let gen = assemble(grid, variant);
    let small = SimulationConfig {
        dt: 1.0 / 128.0,
        t_max: 10.0,
        grid,
        variant,
        output_stride: 8,
    };
    if variant.has_zero_eigenvalue() {
        report.push("kernel invariance", (|| {
            let sim = Simulator::new(&gen, small)?;
            let k = gen.kernel_vector().expect("neumann kernel");
            let z = sim.evolve(&k, small.steps());
            let d: Vec<f64> = z.iter().zip(&k).map(|(a, b)| a - b).collect();
            let e = gen.w_norm(&d);
            Ok((e <= 1e-10, format!("||T(t)x - x||_W = {e:.2e}")))
        })());
    }

    report.push("phi on canonical data", (|| {
        let n = 32;
        let one = vec![1.0; n + 1];
        let zero = vec![0.0; n + 1];
        let vals = [
            StateVector::new(one.clone(), zero.clone(), zero.clone())?.phi(),
            StateVector::new(zero.clone(), one.clone(), zero.clone())?.phi(),
            StateVector::new(zero.clone(), zero.clone(), one.clone())?.phi(),
        ];
        let ok = (vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14 && (vals[2] - 0.5).abs() < 1e-14;
        Ok((ok, format!("{:.3} {:.3} {:.3}", vals[0], vals[1], vals[2])))
    })());

    report.push("energy monotone, balance", (|| {
        let cfg = SimulationConfig {
            t_max: 10.0,
            ..SimulationConfig::default_for(variant)
        };
        let gen = assemble(cfg.grid, variant);
        let data = make_domain_data(&Profile::SmoothBump, variant, 1)?;
        let series = Simulator::new(&gen, cfg)?.run(&data.sample(cfg.grid))?;
        let bal = series.balance_per_unit_time();
        let mono = series.is_monotone(1e-12);
        let drift = series
            .phi
            .iter()
            .map(|p| (p - series.phi[0]).abs())
            .fold(0.0, f64::max);
        let conserved = !variant.has_zero_eigenvalue() || drift <= 1e-8;
        Ok((
            mono && bal <= 1e-6 && conserved,
            format!("monotone {mono}, balance {bal:.2e}/E0/t, phi drift {drift:.1e}"),
        ))
    })());

    if let Some(cfg) = opts.decay {
        let studies: Result<Vec<simulator::DecayReport>> = [1, 2]
            .iter()
            .map(|&k| simulator::decay_study(&make_domain_data(&Profile::SmoothBump, variant, k)?, cfg))
            .collect();
        report.push("energy decay slope (k = 1)", (|| {
            let s = borrowed(&studies)?;
            let r = &s[0];
            Ok((
                r.fit.slope <= -3.7 && r.slopes_non_increasing(),
                format!(
                    "slope {:.3} on [{:.2}, {:.2}], decades {:?}",
                    r.fit.slope,
                    r.fit.window.0,
                    r.fit.window.1,
                    r.decades.iter().map(|d| (d.slope * 100.0).round() / 100.0).collect::<Vec<_>>()
                ),
            ))
        })());
        report.push("smoothness gap (k = 2 vs 1)", (|| {
            let s = borrowed(&studies)?;
            let (a, b) = simulator::matched_fits(&s[0], &s[1])?;
            let gap = a.slope - b.slope;
            Ok((gap >= 2.0, format!("{:.3} vs {:.3}, gap {gap:.3}", a.slope, b.slope)))
        })());
    }

    report
}
