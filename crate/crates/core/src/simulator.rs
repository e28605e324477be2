//! Crank-Nicolson integration of `z' = A_h z` and energy-decay fits.
//!
//! With `sigma = 2 / dt` a step is `z+ = (sigma - A_h)^{-1} (sigma + A_h) z`,
//! so the factorisation of [`ShiftedSolver`] is computed once per run.

use crate::characteristic::BoundaryVariant;
use crate::discretization::{DiscreteGenerator, GridSpec, ShiftedSolver};
use crate::error::{Error, Result};
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_max: f64,
    pub grid: GridSpec,
    pub variant: BoundaryVariant,
    /// Record every `output_stride`-th step.
    pub output_stride: usize,
}

pub const MIN_T_MAX: f64 = 10.0;

impl SimulationConfig {
    pub fn new(dt: f64, t_max: f64, grid: GridSpec, variant: BoundaryVariant, output_stride: usize) -> Result<Self> {
        let c = Self {
            dt,
            t_max,
            grid,
            variant,
            output_stride,
        };
        c.validate()?;
        Ok(c)
    }

    /// `N = 800` cells per segment, `dt = h / 2`, `t_max = 80`.
    pub fn default_for(variant: BoundaryVariant) -> Self {
        let grid = GridSpec::uniform(800).expect("valid");
        Self {
            dt: 0.5 / 800.0,
            t_max: 80.0,
            grid,
            variant,
            output_stride: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if self.dt > 0.5 * self.grid.h_wave() * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} exceeds h_w / 2 = {}",
                self.dt,
                0.5 * self.grid.h_wave()
            )));
        }
        if !(self.t_max >= MIN_T_MAX) {
            return Err(Error::InvalidArgument(format!("t_max = {} below {MIN_T_MAX}", self.t_max)));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidArgument("output_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Sampled energy history of one trajectory.
#[derive(Clone, Debug, Default)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// `int |w'|^2` at the sample times.
    pub dissipation: Vec<f64>,
    pub phi: Vec<f64>,
    /// `sum_k |E_{k+1} - E_k + dt (D_k + D_{k+1}) / 2|`, over all steps.
    pub balance_error: f64,
    /// Largest single-step energy increase.
    pub max_increase: f64,
}

impl EnergySeries {
    pub fn initial_energy(&self) -> f64 {
        self.energies.first().copied().unwrap_or(0.0)
    }

    pub fn t_max(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `balance_error / (E(0) t_max)`.
    pub fn balance_per_unit_time(&self) -> f64 {
        self.balance_error / (self.initial_energy() * self.t_max()).max(f64::MIN_POSITIVE)
    }

    /// True when no step raised the energy by more than `slack * E(0)`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.max_increase <= slack * self.initial_energy()
    }
}

pub struct Simulator<'a> {
    gen: &'a DiscreteGenerator,
    config: SimulationConfig,
    solver: ShiftedSolver<'a, f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(gen: &'a DiscreteGenerator, config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        if gen.grid() != config.grid || gen.variant() != config.variant {
            return Err(Error::InvalidArgument("generator does not match the configuration".into()));
        }
        let solver = gen.shifted(2.0 / config.dt)?;
        Ok(Self { gen, config, solver })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn step_packed(&self, z: &[f64]) -> Vec<f64> {
        let sigma = self.solver.sigma();
        let az = self.gen.apply(z);
        let rhs: Vec<f64> = z.iter().zip(&az).map(|(x, y)| sigma * x + y).collect();
        self.solver.solve(&rhs)
    }

    pub fn step(&self, state: &StateVector<f64>) -> Result<StateVector<f64>> {
        let z = self.gen.pack(state)?;
        Ok(self.gen.unpack(&self.step_packed(&z)))
    }

    /// The packed state after `n` steps.
    pub fn evolve(&self, z0: &[f64], n: usize) -> Vec<f64> {
        let mut z = z0.to_vec();
        for _ in 0..n {
            z = self.step_packed(&z);
        }
        z
    }

    pub fn run(&self, x0: &StateVector<f64>) -> Result<EnergySeries> {
        let z0 = self.gen.pack(x0)?;
        Ok(self.run_packed(&z0))
    }

    pub fn run_packed(&self, z0: &[f64]) -> EnergySeries {
        let dt = self.config.dt;
        let mut z = z0.to_vec();
        let mut e = self.gen.energy(&z);
        let mut d = self.gen.dissipation(&z);
        let mut series = EnergySeries::default();
        let record = |s: &mut EnergySeries, t: f64, e: f64, d: f64, z: &[f64]| {
            s.times.push(t);
            s.energies.push(e);
            s.dissipation.push(d);
            s.phi.push(self.gen.phi(z));
        };
        record(&mut series, 0.0, e, d, &z);
        for k in 1..=self.config.steps() {
            z = self.step_packed(&z);
            let e1 = self.gen.energy(&z);
            let d1 = self.gen.dissipation(&z);
            series.balance_error += (e1 - e + 0.5 * dt * (d + d1)).abs();
            series.max_increase = series.max_increase.max(e1 - e);
            e = e1;
            d = d1;
            if k % self.config.output_stride == 0 {
                record(&mut series, k as f64 * dt, e, d, &z);
            }
        }
        series
    }
}

/// Splits `x = x0 + (phi(x), 0, 0)` with `phi(x0) = 0`.
pub fn project_kernel(
    x: &StateVector<f64>,
    variant: BoundaryVariant,
) -> Result<(StateVector<f64>, StateVector<f64>)> {
    if !variant.has_zero_eigenvalue() {
        return Err(Error::VariantError("the Dirichlet end has a trivial kernel".into()));
    }
    let p = x.phi();
    let (nw, nh) = (x.n_wave(), x.n_heat());
    let x1 = StateVector::new(vec![p; nw + 1], vec![0.0; nw + 1], vec![0.0; nh + 1])?;
    let x0 = StateVector::with_derivative(
        x.u.iter().map(|u| u - p).collect(),
        x.v.clone(),
        x.w.clone(),
        x.u_prime.clone(),
    )?;
    Ok((x0, x1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub stderr: f64,
    pub k: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;
pub const ENERGY_FLOOR: f64 = 1e-12;

/// Least-squares slope of `log E` against `log t` on `window`.
pub fn fit_decay(series: &EnergySeries, window: (f64, f64), k: usize) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(Error::WindowError(format!("window [{lo}, {hi}] needs t_hi >= 4 t_lo > 0")));
    }
    let floor = ENERGY_FLOOR * series.initial_energy();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&t, &e) in series.times.iter().zip(&series.energies) {
        if t >= lo && t <= hi {
            if e <= floor {
                return Err(Error::WindowError(format!("E({t}) = {e:e} at the round-off floor")));
            }
            xs.push(t);
            ys.push(e);
        }
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::WindowError(format!("{} samples in [{lo}, {hi}]", xs.len())));
    }
    let (slope, stderr) = crate::resolvent::loglog_slope(&xs, &ys);
    Ok(DecayFit {
        window,
        slope,
        stderr,
        k,
    })
}

/// Slopes over the decades `[t, 10 t]`, `t = t_start * 10^{j/4}`, up to `t_end`.
pub fn local_slopes(series: &EnergySeries, t_start: f64, t_end: f64, k: usize) -> Vec<DecayFit> {
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let lo = t_start * 10f64.powf(j as f64 / 4.0);
        let hi = 10.0 * lo;
        if hi > t_end * (1.0 + 1e-12) {
            break;
        }
        if let Ok(f) = fit_decay(series, (lo, hi), k) {
            out.push(f);
        }
        j += 1;
    }
    out
}

/// Largest `T` such that on `(0, T]` the energies of `fine` and `coarse`
/// agree to relative `tol` and stay above the round-off floor. The two
/// series must share their sample times.
pub fn clean_horizon(fine: &EnergySeries, coarse: &EnergySeries, tol: f64) -> Result<f64> {
    if fine.times.len() != coarse.times.len()
        || fine.times.iter().zip(&coarse.times).any(|(a, b)| (a - b).abs() > 1e-9 * a.max(1.0))
    {
        return Err(Error::InvalidArgument("series have different sample times".into()));
    }
    let floor = ENERGY_FLOOR * fine.initial_energy();
    let mut t_clean = 0.0;
    for i in 1..fine.times.len() {
        let (a, b) = (fine.energies[i], coarse.energies[i]);
        if a <= floor || (a - b).abs() > tol * a {
            break;
        }
        t_clean = fine.times[i];
    }
    Ok(t_clean)
}

/// Slope over `[t / 2, 2 t]` at every sample, from running sums.
pub fn pointwise_slopes(series: &EnergySeries) -> Vec<f64> {
    let n = series.times.len();
    let lx: Vec<f64> = series.times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = series.energies.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let mut cum = vec![[0.0f64; 5]; n + 1];
    for i in 0..n {
        let (x, y) = if series.times[i] > 0.0 { (lx[i], ly[i]) } else { (0.0, 0.0) };
        let c = (series.times[i] > 0.0) as u8 as f64;
        let p = cum[i];
        cum[i + 1] = [p[0] + c, p[1] + x, p[2] + y, p[3] + x * x, p[4] + x * y];
    }
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0usize, 0usize);
    for i in 0..n {
        let t = series.times[i];
        if t <= 0.0 {
            out.push(f64::NAN);
            continue;
        }
        while lo < n && series.times[lo] < t / 2.0 {
            lo += 1;
        }
        while hi < n && series.times[hi] <= 2.0 * t {
            hi += 1;
        }
        let s: Vec<f64> = (0..5).map(|m| cum[hi][m] - cum[lo][m]).collect();
        let den = s[0] * s[3] - s[1] * s[1];
        out.push(if s[0] >= 3.0 && den > 0.0 {
            (s[0] * s[4] - s[1] * s[2]) / den
        } else {
            f64::NAN
        });
    }
    out
}

/// Slopes on consecutive decades `[t_end / 10^{j+1}, t_end / 10^j]`,
/// latest first, while the window starts after `t_min`.
pub fn decade_slopes(series: &EnergySeries, t_end: f64, t_min: f64, k: usize) -> Vec<DecayFit> {
    let mut out = Vec::new();
    let mut hi = t_end;
    while hi / 10.0 >= t_min {
        match fit_decay(series, (hi / 10.0, hi), k) {
            Ok(f) => out.push(f),
            Err(_) => break,
        }
        hi /= 10.0;
    }
    out
}

/// Relative energy mismatch against the half-resolution run that still
/// counts as clean; at the end of a decade it moves the slope by at most
/// `log10(1.25) ~ 0.1`.
pub const CLEAN_TOL: f64 = 0.25;

/// One datum run at the configured grid and at half resolution.
#[derive(Clone, Debug)]
pub struct DecayReport {
    pub k: usize,
    pub series: EnergySeries,
    pub coarse: EnergySeries,
    /// End of the clean part of the trajectory.
    pub horizon: f64,
    /// Fit on the last clean decade `[horizon / 10, horizon]`.
    pub fit: DecayFit,
    /// Consecutive decades ending at the horizon, latest first.
    pub decades: Vec<DecayFit>,
}

impl DecayReport {
    /// True when the decade slopes do not increase towards later times.
    pub fn slopes_non_increasing(&self) -> bool {
        self.decades.windows(2).all(|p| p[0].slope <= p[1].slope)
    }
}

/// Runs `data` (kernel part removed for the Neumann end) on the configured
/// grid and at half resolution with the same `dt`.
pub fn run_pair(data: &crate::domain::DomainData, config: SimulationConfig) -> Result<(EnergySeries, EnergySeries)> {
    config.validate()?;
    let coarse_grid = GridSpec::new(config.grid.n_wave / 2, config.grid.n_heat / 2)?;
    let run_on = |grid: GridSpec| -> Result<EnergySeries> {
        let gen = crate::discretization::assemble(grid, config.variant);
        let x = data.sample(grid);
        let x = if config.variant.has_zero_eigenvalue() {
            project_kernel(&x, config.variant)?.0
        } else {
            x
        };
        Simulator::new(&gen, SimulationConfig { grid, ..config })?.run(&x)
    };
    Ok((run_on(config.grid)?, run_on(coarse_grid)?))
}

/// Fits the last clean decade of a pair produced by [`run_pair`].
pub fn analyze(k: usize, series: EnergySeries, coarse: EnergySeries, config: SimulationConfig) -> Result<DecayReport> {
    let horizon = clean_horizon(&series, &coarse, CLEAN_TOL)?;
    if horizon >= config.t_max * (1.0 - 1e-12) {
        return Err(Error::WindowError(format!(
            "trajectory still clean at t_max = {}; extend the run",
            config.t_max
        )));
    }
    let fit = fit_decay(&series, (horizon / 10.0, horizon), k)?;
    let t_min = config.dt * config.output_stride as f64 * MIN_FIT_SAMPLES as f64;
    let decades = decade_slopes(&series, horizon, t_min, k);
    Ok(DecayReport {
        k,
        series,
        coarse,
        horizon,
        fit,
        decades,
    })
}

pub fn decay_study(data: &crate::domain::DomainData, config: SimulationConfig) -> Result<DecayReport> {
    let (series, coarse) = run_pair(data, config)?;
    analyze(data.order, series, coarse, config)
}

/// Fits both reports on the last decade clean for both.
pub fn matched_fits(a: &DecayReport, b: &DecayReport) -> Result<(DecayFit, DecayFit)> {
    let t = a.horizon.min(b.horizon);
    let w = (t / 10.0, t);
    Ok((fit_decay(&a.series, w, a.k)?, fit_decay(&b.series, w, b.k)?))
}

pub const ENERGY_HEADER: &str = "t,E,dissipation_rate,phi,local_slope";

pub fn write_energy_csv<W: std::io::Write>(mut out: W, series: &EnergySeries) -> std::io::Result<()> {
    writeln!(out, "{ENERGY_HEADER}")?;
    let slopes = pointwise_slopes(series);
    for i in 0..series.times.len() {
        writeln!(
            out,
            "{:.6},{:.12e},{:.12e},{:.12e},{:.6}",
            series.times[i], series.energies[i], series.dissipation[i], series.phi[i], slopes[i]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble;

    fn small(variant: BoundaryVariant) -> (DiscreteGenerator, SimulationConfig) {
        let grid = GridSpec::uniform(32).unwrap();
        let cfg = SimulationConfig::new(1.0 / 64.0, 10.0, grid, variant, 4).unwrap();
        (assemble(grid, variant), cfg)
    }

    #[test]
    fn config_guards() {
        let grid = GridSpec::uniform(32).unwrap();
        let v = BoundaryVariant::Neumann;
        assert!(SimulationConfig::new(0.1, 10.0, grid, v, 1).is_err());
        assert!(SimulationConfig::new(0.01, 5.0, grid, v, 1).is_err());
        assert!(SimulationConfig::new(0.01, 10.0, grid, v, 0).is_err());
        assert!(SimulationConfig::new(0.0, 10.0, grid, v, 1).is_err());
    }

    #[test]
    fn kernel_and_zero_states_are_fixed() {
        let (gen, cfg) = small(BoundaryVariant::Neumann);
        let sim = Simulator::new(&gen, cfg).unwrap();
        let k = gen.kernel_vector().unwrap();
        let z = sim.evolve(&k, 100);
        assert!(z.iter().zip(&k).all(|(a, b)| (a - b).abs() < 1e-12));
        let zero = vec![0.0; gen.dim()];
        assert!(sim.evolve(&zero, 10).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn project_kernel_rejects_dirichlet() {
        let x = StateVector::<f64>::zeros(8, 8);
        assert!(matches!(project_kernel(&x, BoundaryVariant::Dirichlet), Err(Error::VariantError(_))));
        let (x0, x1) = project_kernel(&x, BoundaryVariant::Neumann).unwrap();
        assert_eq!(x0.phi(), 0.0);
        assert_eq!(x1.phi(), 0.0);
    }

    #[test]
    fn fit_recovers_power_law_and_guards_window() {
        let times: Vec<f64> = (1..=400).map(|i| i as f64 * 0.5).collect();
        let series = EnergySeries {
            energies: times.iter().map(|t| 3.0 * t.powf(-4.5)).collect(),
            dissipation: vec![0.0; times.len()],
            phi: vec![0.0; times.len()],
            times,
            ..Default::default()
        };
        let f = fit_decay(&series, (10.0, 100.0), 1).unwrap();
        assert!((f.slope + 4.5).abs() < 1e-10);
        assert!(matches!(fit_decay(&series, (10.0, 39.0), 1), Err(Error::WindowError(_))));
        assert!(matches!(fit_decay(&series, (1.0, 4.2), 1), Err(Error::WindowError(_))));
        let p = pointwise_slopes(&series);
        assert!((p[100] + 4.5).abs() < 1e-10);
    }
}
