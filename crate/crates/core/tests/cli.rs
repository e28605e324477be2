use std::path::Path;
use std::process::{Command, Output};

fn waveheat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveheat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn spectrum_writes_one_row_per_index() {
    let d = tempfile::tempdir().unwrap();
    let o = waveheat(&["spectrum", "--nmax", "100"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&d.path().join("eigenvalues.csv"));
    assert_eq!(r[0], "n,re,im,residual,iters,contained,variant");
    assert_eq!(r.len() - 1, 201);
    assert!(d.path().join("eigenvalues.svg").exists());

    let o = waveheat(&["spectrum", "--nmax", "50", "--variant", "dirichlet"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&d.path().join("eigenvalues.csv")).len() - 1, 100);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["resolvent", "--s-min", "10", "--s-max", "60", "--s-points", "4", "--trials", "8", "--seed", "3"];
    assert_eq!(waveheat(&args, a.path()).status.code(), Some(0));
    assert_eq!(waveheat(&args, b.path()).status.code(), Some(0));
    let ra = std::fs::read(a.path().join("resolvent.csv")).unwrap();
    let rb = std::fs::read(b.path().join("resolvent.csv")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(rows(&a.path().join("resolvent.csv")).len(), 5);
}

#[test]
fn default_resolvent_sweep_has_25_rows() {
    let d = tempfile::tempdir().unwrap();
    let o = waveheat(&["resolvent", "--trials", "0"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&d.path().join("resolvent.csv"));
    assert!(r[0].starts_with("s,norm_discrete,norm_sampled,spectral_lower_bound,grid_N,slope_window_estimate"));
    assert_eq!(r.len() - 1, 25);
    assert!(String::from_utf8_lossy(&o.stdout).contains("fitted slope"));
}

#[test]
fn simulate_on_a_small_grid() {
    let d = tempfile::tempdir().unwrap();
    let o = waveheat(&["simulate", "--grid", "100", "--tmax", "40"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&d.path().join("energy.csv"));
    assert_eq!(r[0], "t,E,dissipation_rate,phi,local_slope");
    assert_eq!(r.len() - 1, 4001);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(waveheat(&["spectrum", "--nmax", "-1"], d.path()).status.code(), Some(1));
    assert_eq!(waveheat(&["spectrum", "--variant", "robin"], d.path()).status.code(), Some(1));
    assert_eq!(waveheat(&["simulate", "--grid", "100", "--dt", "0.01"], d.path()).status.code(), Some(1));
    assert_eq!(waveheat(&["simulate", "--tmax", "5"], d.path()).status.code(), Some(1));
    assert_eq!(waveheat(&["frobnicate"], d.path()).status.code(), Some(1));

    let file = d.path().join("blocked");
    std::fs::write(&file, "").unwrap();
    assert_eq!(waveheat(&["spectrum", "--nmax", "3"], &file).status.code(), Some(1));

    let quick = ["verify", "--skip-decay", "--nmax", "30", "--s-points", "5", "--s-max", "100"];
    let good = waveheat(&quick, d.path());
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stdout));
    assert!(d.path().join("verify.txt").exists());
    let mut bad_args = quick.to_vec();
    bad_args.push("--inject-sign-error");
    let bad = waveheat(&bad_args, d.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "nmax = 10\nvariant = \"dirichlet\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(waveheat(&["--config", c, "spectrum"], d.path()).status.code(), Some(0));
    assert_eq!(rows(&d.path().join("eigenvalues.csv")).len() - 1, 20);
    assert_eq!(waveheat(&["--config", c, "spectrum", "--nmax", "4"], d.path()).status.code(), Some(0));
    assert_eq!(rows(&d.path().join("eigenvalues.csv")).len() - 1, 8);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(waveheat(&["--config", c, "spectrum"], d.path()).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_waveheat")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
}
