//! The `waveheat` command line.
//!
//! Every option may also come from a `key = value` file given with
//! `--config`; keys are the long flag names (`s-min` or `s_min`). Flags on
//! the command line take precedence.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::characteristic::BoundaryVariant;
use crate::discretization::GridSpec;
use crate::domain::{make_domain_data, Profile};
use crate::error::Error;
use crate::plot::{Chart, Series, Style};
use crate::resolvent::{self, SweepConfig};
use crate::simulator::{self, SimulationConfig};
use crate::spectrum;
use crate::verify::{self, SignFlipped, VerifyOptions};

const SCHEMAS: &str = "\
Output files (all CSVs start with a header row, columns in this order):
  eigenvalues.csv  n,re,im,residual,iters,contained,variant
  resolvent.csv    s,norm_discrete,norm_sampled,spectral_lower_bound,grid_N,slope_window_estimate,s_target
  energy.csv       t,E,dissipation_rate,phi,local_slope
Plots are written next to them as .svg files.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.";

#[derive(Parser, Debug)]
#[command(name = "waveheat", version, about = "Spectra, resolvent norms and energy decay of a wave equation coupled to a heat equation", after_long_help = SCHEMAS)]
struct Cli {
    /// key = value file with defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// neumann or dirichlet
    #[arg(long)]
    variant: Option<String>,
    /// output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// seed for the randomised norm bound
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default, Clone)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    s_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s_max: Option<f64>,
    #[arg(long)]
    s_points: Option<usize>,
    /// random data triples per frequency for the sampled bound (0 skips it)
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug, Default, Clone)]
struct SimArgs {
    /// cells per segment
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// smooth_bump, polynomial, k2 (smooth bump in D(A^2)) or <name>_k2
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Polish eigenvalues and write eigenvalues.csv
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        nmax: Option<i64>,
    },
    /// Resolvent norm sweep along the imaginary axis, writes resolvent.csv
    Resolvent {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Energy decay of a classical solution, writes energy.csv
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run every invariant check and print a PASS/FAIL report
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        nmax: Option<i64>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// leave out the long energy-decay runs
        #[arg(long)]
        skip_decay: bool,
        /// flip a sign in the characteristic function (self-test of the checks)
        #[arg(long, hide = true)]
        inject_sign_error: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            Error::InvalidArgument(m) | Error::DomainError(m) | Error::VariantError(m) => Failure::Usage(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Values from the `--config` file, keyed by flag name with `_`.
#[derive(Default)]
struct FileConfig(toml::Table);

const KNOWN_KEYS: &[&str] = &[
    "variant", "out", "seed", "nmax", "s_min", "s_max", "s_points", "trials", "grid", "dt", "tmax", "profile",
    "skip_decay",
];

impl FileConfig {
    fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let raw: toml::Table = text
            .parse()
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut table = toml::Table::new();
        for (k, v) in raw {
            let key = k.replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Failure::Usage(format!("unknown config key '{k}'")));
            }
            table.insert(key, v);
        }
        Ok(Self(table))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, Failure> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Failure::Usage(format!("config '{key}': expected a number, got {v}"))),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>, Failure> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(v) => Err(Failure::Usage(format!("config '{key}': expected an integer, got {v}"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Failure::Usage(format!("config '{key}': expected a string, got {v}"))),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, Failure> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(Failure::Usage(format!("config '{key}': expected true or false, got {v}"))),
        }
    }
}

fn non_negative(key: &str, v: Option<i64>) -> Result<Option<usize>, Failure> {
    match v {
        Some(x) if x < 0 => Err(Failure::Usage(format!("--{key} must be non-negative, got {x}"))),
        other => Ok(other.map(|x| x as usize)),
    }
}

struct Resolved {
    variant: BoundaryVariant,
    out: PathBuf,
    seed: u64,
}

fn resolve_common(c: &Common, file: &FileConfig) -> Result<Resolved, Failure> {
    let variant = match c.variant.clone().or(file.string("variant")?) {
        Some(s) => s.parse::<BoundaryVariant>()?,
        None => BoundaryVariant::Neumann,
    };
    let out = c
        .out
        .clone()
        .or(file.string("out")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let seed = match c.seed {
        Some(s) => s,
        None => non_negative("seed", file.int("seed")?)?.unwrap_or(7) as u64,
    };
    Ok(Resolved { variant, out, seed })
}

fn resolve_nmax(flag: Option<i64>, file: &FileConfig) -> Result<usize, Failure> {
    Ok(non_negative("nmax", flag.or(file.int("nmax")?))?.unwrap_or(100))
}

fn resolve_sweep(a: &SweepArgs, file: &FileConfig, default_trials: usize) -> Result<(Vec<f64>, usize), Failure> {
    let lo = a.s_min.or(file.f64("s_min")?).unwrap_or(10.0);
    let hi = a.s_max.or(file.f64("s_max")?).unwrap_or(1000.0);
    let n = match a.s_points {
        Some(n) => n,
        None => non_negative("s-points", file.int("s_points")?)?.unwrap_or(25),
    };
    let trials = match a.trials {
        Some(t) => t,
        None => non_negative("trials", file.int("trials")?)?.unwrap_or(default_trials),
    };
    if n == 0 {
        return Err(Failure::Usage("--s-points must be at least 1".into()));
    }
    if !(lo >= 2.0 && lo.is_finite() && hi.is_finite()) {
        return Err(Failure::Usage(format!("s-grid entries must be >= 2, got s-min = {lo}")));
    }
    if n > 1 && !(hi > lo) {
        return Err(Failure::Usage(format!("s-grid must be strictly increasing: s-min = {lo}, s-max = {hi}")));
    }
    let s = if n == 1 { vec![lo] } else { resolvent::log_spaced(lo, hi, n) };
    Ok((s, trials))
}

fn parse_profile(name: &str) -> Result<(Profile, usize), Failure> {
    let (base, k) = match name {
        "k2" => ("smooth_bump", 2),
        "k1" => ("smooth_bump", 1),
        n => match n.strip_suffix("_k2") {
            Some(b) => (b, 2),
            None => (n.strip_suffix("_k1").unwrap_or(n), 1),
        },
    };
    Ok((base.parse::<Profile>()?, k))
}

fn resolve_sim(a: &SimArgs, file: &FileConfig, variant: BoundaryVariant) -> Result<(SimulationConfig, Profile, usize), Failure> {
    let base = SimulationConfig::default_for(variant);
    let n = match a.grid {
        Some(n) => n,
        None => non_negative("grid", file.int("grid")?)?.unwrap_or(base.grid.n_wave),
    };
    let grid = GridSpec::uniform(n)?;
    let dt = a.dt.or(file.f64("dt")?).unwrap_or(0.5 / n as f64);
    let t_max = a.tmax.or(file.f64("tmax")?).unwrap_or(base.t_max);
    let profile = a.profile.clone().or(file.string("profile")?).unwrap_or_else(|| "smooth_bump".into());
    let (profile, k) = parse_profile(&profile)?;
    let stride = ((0.01 / dt).round() as usize).max(1);
    let cfg = SimulationConfig::new(dt, t_max, grid, variant, stride)?;
    Ok((cfg, profile, k))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))
}

fn write_svg(dir: &Path, name: &str, chart: &Chart) -> Result<(), Failure> {
    let path = dir.join(name);
    chart.write(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn cmd_spectrum(r: Resolved, n_max: usize) -> Result<(), Failure> {
    prepare_out(&r.out)?;
    let records = spectrum::eigenvalues(r.variant, n_max)?;
    let mut f = create(&r.out, "eigenvalues.csv")?;
    spectrum::write_eigenvalues_csv(&mut f, &records)?;
    f.flush()?;
    let pts: Vec<(f64, f64)> = records.iter().map(|x| (x.lambda.value().re, x.lambda.value().im)).collect();
    let chart = Chart::new(&format!("eigenvalues ({})", r.variant), "Re l", "Im l")
        .with(Series::new("polished roots", pts, Style::Markers, "#1f5fa8"));
    write_svg(&r.out, "eigenvalues.svg", &chart)?;
    let contained = records.iter().filter(|x| x.contained).count();
    println!("{} eigenvalues ({}), {} inside their seed disks", records.len(), r.variant, contained);
    let upper: Vec<_> = records.iter().filter(|x| x.n >= 0).cloned().collect();
    if let Ok(a) = spectrum::asymptotics_report(&upper) {
        println!(
            "|Re l| |Im l|^(1/2) in [{:.6}, {:.6}] over the upper half, ratio {:.4}",
            a.c_lower,
            a.c_upper,
            a.band_ratio()
        );
    }
    Ok(())
}

fn cmd_resolvent(r: Resolved, s_values: Vec<f64>, trials: usize) -> Result<(), Failure> {
    prepare_out(&r.out)?;
    let rows = resolvent::sweep(&SweepConfig {
        s_values,
        variant: r.variant,
        trials,
        seed: r.seed,
        check_refinement: false,
    })?;
    let mut f = create(&r.out, "resolvent.csv")?;
    resolvent::write_resolvent_csv(&mut f, &rows)?;
    f.flush()?;
    let xs: Vec<f64> = rows.iter().map(|x| x.s).collect();
    let ys: Vec<f64> = rows.iter().map(|x| x.norm_discrete).collect();
    let mut chart = Chart::new(&format!("resolvent norm ({})", r.variant), "s", "||R(is)||")
        .log_log()
        .with(Series::new("discrete", xs.iter().cloned().zip(ys.iter().cloned()).collect(), Style::Line, "#1f5fa8"))
        .with(Series::new(
            "1 / dist(is, spectrum)",
            rows.iter().map(|x| (x.s, x.spectral_lower_bound)).collect(),
            Style::Markers,
            "#888888",
        ));
    if trials > 0 {
        chart = chart.with(Series::new(
            "sampled lower bound",
            rows.iter().map(|x| (x.s_sampled, x.norm_sampled)).collect(),
            Style::Markers,
            "#c0392b",
        ));
    }
    if let (Some(&x0), Some(&y0)) = (xs.first(), ys.first()) {
        let x1 = *xs.last().unwrap();
        chart = chart.with(Series::new(
            "slope 1/2",
            vec![(x0, y0), (x1, y0 * (x1 / x0).sqrt())],
            Style::Dashed,
            "#333333",
        ));
    }
    write_svg(&r.out, "resolvent.svg", &chart)?;
    if xs.len() >= 2 {
        let (slope, se) = resolvent::loglog_slope(&xs, &ys);
        println!("fitted slope {slope:.4} +- {se:.4} over {} frequencies", xs.len());
    } else {
        println!("norm {:.6} at s = {:.6}", ys[0], xs[0]);
    }
    Ok(())
}

fn energy_points(s: &simulator::EnergySeries) -> Vec<(f64, f64)> {
    s.times.iter().cloned().zip(s.energies.iter().cloned()).skip(1).collect()
}

fn cmd_simulate(r: Resolved, cfg: SimulationConfig, profile: Profile, k: usize) -> Result<(), Failure> {
    prepare_out(&r.out)?;
    let orders: Vec<usize> = if k == 2 { vec![1, 2] } else { vec![1] };
    let mut reports = Vec::new();
    let mut chart = Chart::new(&format!("energy ({}, {profile})", r.variant), "t", "E(t)").log_log();
    let colors = ["#1f5fa8", "#c0392b"];
    for &order in &orders {
        let data = make_domain_data(&profile, r.variant, order)?;
        let (series, coarse) = simulator::run_pair(&data, cfg)?;
        let name = if order == k { "energy.csv".to_string() } else { format!("energy_k{order}.csv") };
        let mut f = create(&r.out, &name)?;
        simulator::write_energy_csv(&mut f, &series)?;
        f.flush()?;
        chart = chart.with(Series::new(&format!("k = {order}"), energy_points(&series), Style::Line, colors[order - 1]));
        println!(
            "k = {order}: E(0) = {:.6e}, energy balance {:.2e} E(0) per unit time, monotone {}",
            series.initial_energy(),
            series.balance_per_unit_time(),
            series.is_monotone(1e-12)
        );
        reports.push(simulator::analyze(order, series, coarse, cfg));
    }
    write_svg(&r.out, "energy.svg", &chart)?;
    let mut done = Vec::new();
    for rep in reports {
        let rep = rep?;
        let decades: Vec<String> = rep.decades.iter().map(|d| format!("{:.3}", d.slope)).collect();
        println!(
            "k = {}: slope {:.4} +- {:.4} on [{:.3}, {:.3}], decade slopes (latest first) {}",
            rep.k,
            rep.fit.slope,
            rep.fit.stderr,
            rep.fit.window.0,
            rep.fit.window.1,
            decades.join(" ")
        );
        done.push(rep);
    }
    if done.len() == 2 {
        let (a, b) = simulator::matched_fits(&done[0], &done[1])?;
        println!(
            "common window [{:.3}, {:.3}]: k = 1 slope {:.4}, k = 2 slope {:.4}, gap {:.4}",
            a.window.0,
            a.window.1,
            a.slope,
            b.slope,
            a.slope - b.slope
        );
    }
    Ok(())
}

fn cmd_verify(r: Resolved, opts: VerifyOptions, inject: bool) -> Result<bool, Failure> {
    prepare_out(&r.out)?;
    let report = if inject {
        verify::run_checks(&SignFlipped(r.variant), &opts)
    } else {
        verify::run_checks(&r.variant, &opts)
    };
    println!("{report}");
    let mut f = create(&r.out, "verify.txt")?;
    writeln!(f, "{report}")?;
    f.flush()?;
    Ok(report.all_passed())
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Spectrum { common, nmax } => {
            let n = resolve_nmax(nmax, &file)?;
            cmd_spectrum(resolve_common(&common, &file)?, n)?;
        }
        Command::Resolvent { common, sweep } => {
            let (s, trials) = resolve_sweep(&sweep, &file, 200)?;
            cmd_resolvent(resolve_common(&common, &file)?, s, trials)?;
        }
        Command::Simulate { common, sim } => {
            let r = resolve_common(&common, &file)?;
            let (cfg, profile, k) = resolve_sim(&sim, &file, r.variant)?;
            cmd_simulate(r, cfg, profile, k)?;
        }
        Command::Verify {
            common,
            nmax,
            sweep,
            sim,
            skip_decay,
            inject_sign_error,
        } => {
            let r = resolve_common(&common, &file)?;
            let (s_values, trials) = resolve_sweep(&sweep, &file, 0)?;
            let (cfg, _, _) = resolve_sim(&sim, &file, r.variant)?;
            let skip = skip_decay || file.bool("skip_decay")?.unwrap_or(false);
            let opts = VerifyOptions {
                variant: r.variant,
                n_max: resolve_nmax(nmax, &file)?,
                s_values,
                seed: r.seed,
                trials,
                decay: (!skip).then_some(cfg),
            };
            if !cmd_verify(r, opts, inject_sign_error)? {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Usage(m) => ("usage", m),
                Failure::Io(m) => ("i/o", m),
                Failure::Numerical(m) => ("numerical failure", m),
            };
            eprintln!("waveheat: {kind}: {msg}");
            if matches!(f, Failure::Usage(_)) {
                eprintln!("run `waveheat --help` for usage");
            }
            f.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_names() {
        assert_eq!(parse_profile("k2").unwrap(), (Profile::SmoothBump, 2));
        assert_eq!(parse_profile("polynomial_k2").unwrap(), (Profile::Polynomial, 2));
        assert_eq!(parse_profile("smooth_bump").unwrap(), (Profile::SmoothBump, 1));
        assert!(parse_profile("nope").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["waveheat", "spectrum", "--nmax", "-1"]), 1);
        assert_eq!(run(["waveheat", "resolvent", "--s-min", "1"]), 1);
        assert_eq!(run(["waveheat", "simulate", "--dt", "0.1"]), 1);
        assert_eq!(run(["waveheat", "bogus"]), 1);
        assert_eq!(run(["waveheat", "--help"]), 0);
    }
}
