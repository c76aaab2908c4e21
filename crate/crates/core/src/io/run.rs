//! Config-driven runs: build, seed, solve or sweep, diagnose, write artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functional::{discrepancy, energy_density};
use crate::lattice::{build_state, FieldState, InitSpec};
use crate::planar::seed_from_profile;
use crate::solvers::{epsilon_sweep, find_critical, minimize, SolveResult, SweepRow, TraceRow};

use super::config::{InitKind, RunConfig};
use super::dump::{read_state, write_state, FieldDump};
use super::report::{run_diagnostics, Report, SolveSummary};

/// Environment variable that overrides `output.dir` (a `--out` flag wins over it).
pub const OUT_DIR_ENV: &str = "SELFDUAL_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Minimize,
    Sweep,
    Saddle,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Minimize => "minimize",
            Mode::Sweep => "sweep",
            Mode::Saddle => "saddle",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: Report,
    pub out_dir: PathBuf,
    pub converged: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            2
        }
    }
}

/// 0 on convergence, 2 on non-convergence, 1 when the run could not start or failed.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => 1,
    }
}

pub fn initial_state(cfg: &RunConfig, seed: u64) -> Result<FieldState> {
    let grid = cfg.grid()?;
    let twist = cfg.twist();
    let eps0 = cfg.epsilons()[0];
    match cfg.init.resolved_kind() {
        InitKind::Constant => {
            let [re, im] = cfg.init.value;
            build_state(&grid, &twist, InitSpec::Constant(Complex64::new(re, im)))
        }
        InitKind::Random => build_state(&grid, &twist, InitSpec::Random { seed, amplitude: cfg.init.amplitude }),
        InitKind::Vortices => {
            seed_from_profile(&grid, &twist, &cfg.init.zeros, &cfg.init.charges, cfg.init.core.unwrap_or(eps0))
        }
        InitKind::Dump => {
            let path = cfg.init.path.as_ref().expect("validated");
            let (st, _) = read_state(path)?;
            if st.grid() != &grid || st.twist() != &twist {
                return Err(Error::Config(format!("{} does not match the configured grid and bundle", path.display())));
            }
            Ok(st)
        }
    }
}

fn resolve_out(cfg: &RunConfig, ov: &Overrides) -> PathBuf {
    if let Some(p) = &ov.out {
        return p.clone();
    }
    if let Ok(p) = std::env::var(OUT_DIR_ENV) {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    cfg.output.dir.clone()
}

fn write_file(dir: &Path, name: &str, body: &str, files: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), body)?;
    files.push(name.to_string());
    Ok(())
}

fn trace_csv(trace: &[TraceRow]) -> String {
    let mut s = format!("{}\n", TraceRow::CSV_HEADER);
    for r in trace {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn summary(r: &SolveResult) -> SolveSummary {
    SolveSummary { converged: r.converged, iters: r.iters, grad_norm: r.grad_norm, phi: None, nontrivial: None }
}

/// Run a parsed config. Mode `None` means sweep when a schedule is given, minimize otherwise.
pub fn execute(cfg: &RunConfig, mode: Option<Mode>, ov: &Overrides) -> Result<RunOutcome> {
    cfg.validate()?;
    let mode = mode.unwrap_or(if cfg.physics.schedule.is_some() { Mode::Sweep } else { Mode::Minimize });
    let eps_list = cfg.epsilons();
    if mode != Mode::Sweep && eps_list.len() != 1 {
        return Err(Error::Config(format!("{} needs a single physics.epsilon", mode.name())));
    }
    let seed = ov.seed.unwrap_or(cfg.init.seed);
    let selected = cfg.diagnostics.selected()?;
    let opts = cfg.solver.options();
    let start = initial_state(cfg, seed)?;
    let out_dir = resolve_out(cfg, ov);
    fs::create_dir_all(&out_dir)?;

    let mut files = Vec::new();
    let (final_result, sweep_rows, solve) = match mode {
        Mode::Minimize => {
            let r = minimize(&start, eps_list[0], &opts)?;
            let s = summary(&r);
            (r, Vec::new(), s)
        }
        Mode::Sweep => {
            let results = epsilon_sweep(&start, &eps_list, &opts)?;
            let rows: Vec<SweepRow> = results.iter().map(SweepRow::from_result).collect();
            let mut body = format!("{}\n", SweepRow::CSV_HEADER);
            for row in &rows {
                body.push_str(&row.csv_row());
                body.push('\n');
            }
            write_file(&out_dir, "sweep.csv", &body, &mut files)?;
            if cfg.output.dump_fields {
                for (i, r) in results.iter().enumerate() {
                    let name = format!("sweep_{i}.bin");
                    write_state(&out_dir.join(&name), &r.state, Some(r.epsilon))?;
                    files.push(name);
                }
            }
            let converged = results.iter().all(|r| r.converged);
            let last = results.into_iter().last().expect("non-empty schedule");
            let mut s = summary(&last);
            s.converged = converged;
            (last, rows, s)
        }
        Mode::Saddle => {
            let spec = cfg.solver.symmetry_spec();
            let c = find_critical(&start, eps_list[0], &opts, spec.as_ref())?;
            let mut s = summary(&c.result);
            s.phi = Some(c.phi);
            s.nontrivial = Some(c.nontrivial);
            (c.result, Vec::new(), s)
        }
    };

    let eps = final_result.epsilon;
    let state = &final_result.state;
    if cfg.solver.trace {
        write_file(&out_dir, "trace.csv", &trace_csv(&final_result.trace), &mut files)?;
    }
    let diag = run_diagnostics(state, eps, &selected, &cfg.diagnostics)?;
    for (name, body) in &diag.csv {
        write_file(&out_dir, name, body, &mut files)?;
    }
    if cfg.output.dump_fields {
        write_state(&out_dir.join("final.bin"), state, Some(eps))?;
        FieldDump::from_scalar(state, "energy_density", &energy_density(state, eps)?, Some(eps))
            .write(&out_dir.join("energy_density.bin"))?;
        FieldDump::from_scalar(state, "discrepancy", &discrepancy(state, eps)?, Some(eps))
            .write(&out_dir.join("discrepancy.bin"))?;
        files.extend(["final.bin", "energy_density.bin", "discrepancy.bin"].map(String::from));
    }

    let mut report = Report::new(mode.name(), state, eps);
    report.seed = Some(seed);
    report.solve = Some(solve);
    report.scalars = diag.scalars;
    report.sweep = sweep_rows;
    report.skipped = diag.skipped;
    files.push("report.json".into());
    report.files = files;
    fs::write(out_dir.join("report.json"), report.to_json()?)?;
    let converged = report.solve.as_ref().is_some_and(|s| s.converged);
    Ok(RunOutcome { report, out_dir, converged })
}

pub fn run_config(path: &Path, mode: Option<Mode>, ov: &Overrides) -> Result<RunOutcome> {
    let cfg = RunConfig::load(path)?;
    execute(&cfg, mode, ov)
}
