use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use selfdual::io::{
    decode, exit_code, run_config, run_diagnostics, Diagnostic, DiagnosticsConfig, FieldDump, Mode, Overrides, Report,
};
use selfdual::planar::{solve_bps, DEFAULT_MESH, DEFAULT_R_MAX};

#[derive(Parser)]
#[command(name = "selfdual", version, about = "Lattice self-dual abelian Higgs fields on flat tori")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Overrides init.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy at a single epsilon.
    Minimize { config: PathBuf },
    /// Warm-started minimization over physics.schedule.
    Sweep { config: PathBuf },
    /// Gradient-norm minimization for critical points, with optional symmetry.
    Saddle { config: PathBuf },
    /// Radially symmetric planar vortex of degree N.
    Oracle {
        #[arg(long = "N")]
        n: u32,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        rmax: f64,
        #[arg(long, default_value_t = DEFAULT_MESH)]
        mesh: usize,
    },
    /// Diagnostics on a field dump.
    Diagnose {
        dump: PathBuf,
        /// Defaults to the epsilon recorded in the dump.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        all: bool,
        /// Diagnostic names (discrepancy, vortices, decay, concentration,
        /// monotonicity, slices, stationarity, current).
        #[arg(value_delimiter = ',')]
        names: Vec<String>,
    },
    /// Decode and re-encode a dump and compare bytes.
    DumpRoundtrip { file: PathBuf },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn run_mode(path: &Path, mode: Mode, common: &Common) -> ExitCode {
    let ov = Overrides { seed: common.seed, out: common.out.clone() };
    let result = run_config(path, Some(mode), &ov);
    match &result {
        Ok(o) => {
            let s = &o.report.scalars;
            let solve = o.report.solve.as_ref().expect("solve summary");
            println!(
                "{}: converged={} iters={} grad_norm={:e} energy/(2pi)={:.6}",
                mode.name(),
                solve.converged,
                solve.iters,
                solve.grad_norm,
                s.energy_over_2pi.unwrap_or(f64::NAN)
            );
            if let Some(nt) = solve.nontrivial {
                println!("classification: {}", if nt { "nontrivial" } else { "trivial" });
            }
            println!("report: {}", o.out_dir.join("report.json").display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}

fn oracle(n: u32, rmax: f64, mesh: usize, common: &Common) -> ExitCode {
    let p = match solve_bps(n, rmax, mesh) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let (r1, r2) = p.residuals();
    let e = p.energy();
    println!("N={n} energy={e:.10} energy/(2pi N)={:.6}", e / (2.0 * PI * n as f64));
    println!("residuals: {r1:e} {r2:e}");
    println!("tail slope of log(1-f) on [8,15]: {:.4}", p.tail_slope(8.0, 15.0));
    if let Some(dir) = &common.out {
        if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join(format!("profile_N{n}.csv")), p.to_csv())) {
            return fail(e);
        }
    }
    ExitCode::SUCCESS
}

fn diagnose(path: &Path, epsilon: Option<f64>, all: bool, names: &[String], common: &Common) -> ExitCode {
    let dump = match FieldDump::read(path) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let Some(eps) = epsilon.or(dump.header.epsilon) else {
        return fail("no --epsilon given and the dump records none");
    };
    let state = match dump.to_state() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let selected = if all { Ok(Diagnostic::ALL.to_vec()) } else { Diagnostic::parse_list(names) };
    let selected = match selected {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let out = match run_diagnostics(&state, eps, &selected, &DiagnosticsConfig::default()) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let mut report = Report::new("diagnose", &state, eps);
    report.seed = common.seed;
    report.scalars = out.scalars;
    report.skipped = out.skipped;
    if let Some(dir) = &common.out {
        let res = fs::create_dir_all(dir).and_then(|_| {
            for (name, body) in &out.csv {
                fs::write(dir.join(name), body)?;
                report.files.push(name.clone());
            }
            Ok(())
        });
        if let Err(e) = res {
            return fail(e);
        }
        report.files.push("report.json".into());
    }
    let json = match report.to_json() {
        Ok(j) => j,
        Err(e) => return fail(e),
    };
    if let Some(dir) = &common.out {
        if let Err(e) = fs::write(dir.join("report.json"), &json) {
            return fail(e);
        }
    }
    println!("{json}");
    ExitCode::SUCCESS
}

fn dump_roundtrip(path: &Path) -> ExitCode {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let dump = match decode(&bytes) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let again = dump.to_bytes();
    // for states also go through the in-memory field representation
    let same_state = dump.header.content != "state"
        || dump.to_state().is_ok_and(|s| FieldDump::from_state(&s, dump.header.epsilon).to_bytes() == bytes);
    if again == bytes && same_state {
        println!("identical");
        ExitCode::SUCCESS
    } else {
        println!("differs");
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common;
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return fail(e);
        }
    }
    match &cli.command {
        Command::Minimize { config } => run_mode(config, Mode::Minimize, &common),
        Command::Sweep { config } => run_mode(config, Mode::Sweep, &common),
        Command::Saddle { config } => run_mode(config, Mode::Saddle, &common),
        Command::Oracle { n, rmax, mesh } => oracle(*n, *rmax, *mesh, &common),
        Command::Diagnose { dump, epsilon, all, names } => diagnose(dump, *epsilon, *all, names, &common),
        Command::DumpRoundtrip { file } => dump_roundtrip(file),
    }
}
