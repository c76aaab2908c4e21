use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use selfdual::io::Report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selfdual"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).env_remove("SELFDUAL_OUT").output().expect("spawn selfdual")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path) -> Report {
    Report::from_json(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const TRIVIAL: &str = "[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nepsilon = 0.2\n";

const SWEEP: &str = "\
[grid]
dim = 2
sizes = [96, 96]
[bundle]
degrees = [1]
[physics]
schedule = [0.2, 0.1, 0.05]
[init]
zeros = [[0.5, 0.5]]
charges = [1]
[diagnostics]
list = [\"discrepancy\", \"vortices\"]
";

#[test]
fn oracle_energies_are_quantized() {
    let tmp = tempfile::tempdir().unwrap();
    for n in 1..=3 {
        let o = run(&["oracle", "--N", &n.to_string()], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        let ratio: f64 = out
            .split("energy/(2pi N)=")
            .nth(1)
            .and_then(|s| s.split_whitespace().next())
            .unwrap()
            .parse()
            .unwrap();
        assert!((ratio - 1.0).abs() <= 0.005, "N={n}: {out}");
    }
}

#[test]
fn oracle_writes_profile_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["oracle", "--N", "2", "--rmax", "20", "--mesh", "2000", "--out", "prof"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("prof/profile_N2.csv")).unwrap();
    assert!(csv.starts_with("r,f,a,energy_density\n"));
    assert_eq!(csv.lines().count(), 2001);
}

#[test]
fn trivial_config_minimizes_to_zero() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), TRIVIAL).unwrap();
    let o = run(&["minimize", "c.toml", "--out", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&tmp.path().join("r"));
    assert_eq!(r.mode, "minimize");
    assert!(r.scalars.energy.unwrap().total <= 1e-8);
    assert!(tmp.path().join("r/final.bin").exists());
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), TRIVIAL).unwrap();
    let o = bin()
        .args(["minimize", "c.toml"])
        .current_dir(tmp.path())
        .env("SELFDUAL_OUT", "from_env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("from_env/report.json").exists());
}

#[test]
fn sweep_writes_one_row_per_epsilon() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("s.toml"), SWEEP).unwrap();
    let o = run(&["sweep", "s.toml", "--out", "run"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("run/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,dirichlet,maxwell,potential,total,max_xi,max_abs_u,flux,grad_norm,iters,converged");
    assert_eq!(lines.len(), 4);
    let r = report(&tmp.path().join("run"));
    assert_eq!(r.sweep.len(), 3);
    assert!(r.sweep.iter().all(|row| row.converged));
    assert_eq!(r.scalars.charges, Some(vec![1]));

    // the final dump feeds the diagnose subcommand
    let o = run(&["diagnose", "run/final.bin", "--epsilon", "0.05", "--all", "--out", "diag"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let d = Report::from_json(&stdout(&o)).unwrap();
    let s = &d.scalars;
    assert!(s.energy.is_some() && s.max_xi.is_some() && s.charges.is_some());
    assert!(s.decay_rate.is_some() && s.concentration.is_some() && s.stationarity_max.is_some());
    assert!(s.monotonicity_violations.is_some() && s.current_mass.is_some());
    assert!(d.skipped.iter().any(|k| k.name == "slices"));
    assert_eq!(s.flux.len(), 1);
    assert!((s.flux[0] - 1.0).abs() < 1e-10);
    assert!(tmp.path().join("diag/monotonicity.csv").exists());

    let o = run(&["dump-roundtrip", "run/final.bin"], tmp.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "identical");
}

#[test]
fn degree_mismatch_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SWEEP.replace("charges = [1]", "charges = [2]");
    fs::write(tmp.path().join("bad.toml"), text).unwrap();
    let o = run(&["sweep", "bad.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("degree mismatch"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), format!("{TRIVIAL}[output]\ndirr = \"x\"\n")).unwrap();
    let o = run(&["minimize", "c.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dirr"), "{}", stderr(&o));
}

#[test]
fn iteration_cap_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[grid]\ndim = 2\nsizes = [32, 32]\n[bundle]\ndegrees = [1]\n[physics]\nepsilon = 0.2\n\
                [init]\nzeros = [[0.5, 0.5]]\ncharges = [1]\ncore = 0.3\n[solver]\nmax_iters = 2\n";
    fs::write(tmp.path().join("c.toml"), text).unwrap();
    let o = run(&["minimize", "c.toml", "--out", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!report(&tmp.path().join("r")).solve.unwrap().converged);
}

#[test]
fn diagnose_rejects_other_format_version() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), TRIVIAL).unwrap();
    assert!(run(&["minimize", "c.toml", "--out", "r"], tmp.path()).status.success());
    let bytes = fs::read(tmp.path().join("r/final.bin")).unwrap();
    let text = String::from_utf8_lossy(&bytes[..64]).into_owned();
    assert!(text.contains("format-version=1"));
    let mut patched = bytes.clone();
    let at = bytes.windows(16).position(|w| w == b"format-version=1").unwrap() + 15;
    patched[at] = b'9';
    fs::write(tmp.path().join("old.bin"), patched).unwrap();
    let o = run(&["diagnose", "old.bin", "--epsilon", "0.2", "--all"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("file has 9") && err.contains("expects 1"), "{err}");
}

#[test]
fn saddle_with_symmetry_classifies() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "\
[grid]
dim = 2
sizes = [64, 64]
[physics]
epsilon = 0.08
[init]
zeros = [[0.25, 0.5], [0.75, 0.5]]
charges = [1, -1]
[[solver.symmetry]]
shift = [32, 0]
conjugate = true
";
    fs::write(tmp.path().join("p.toml"), text).unwrap();
    let o = run(&["saddle", "p.toml", "--out", "sad"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("classification: nontrivial"));
    let r = report(&tmp.path().join("sad"));
    let s = r.solve.unwrap();
    assert!(s.grad_norm <= 1e-6 && s.nontrivial == Some(true));
}

#[test]
fn same_seed_same_report() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[grid]\ndim = 2\nsizes = [24, 24]\n[physics]\nepsilon = 0.2\n[init]\nkind = \"random\"\namplitude = 0.3\n\
                [diagnostics]\nlist = [\"discrepancy\", \"current\", \"stationarity\"]\n";
    fs::write(tmp.path().join("c.toml"), text).unwrap();
    let a = run(&["minimize", "c.toml", "--seed", "11", "--threads", "1", "--out", "a"], tmp.path());
    let b = run(&["minimize", "c.toml", "--seed", "11", "--threads", "1", "--out", "b"], tmp.path());
    assert!(a.status.success() && b.status.success());
    let ra = report(&tmp.path().join("a"));
    let rb = report(&tmp.path().join("b"));
    assert_eq!(ra.seed, Some(11));
    assert_eq!(ra.scalars, rb.scalars);
    assert_eq!(ra.solve, rb.solve);
}

#[test]
fn usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(!run(&["oracle"], tmp.path()).status.success());
    assert!(!run(&["frobnicate"], tmp.path()).status.success());
    let o = run(&["dump-roundtrip", "missing.bin"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}
