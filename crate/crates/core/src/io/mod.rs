//! Field dumps, run configuration, reports and config-driven orchestration.

mod config;
mod dump;
mod report;
mod run;

pub use config::{
    BundleConfig, DiagnosticsConfig, GridConfig, InitConfig, InitKind, MethodName, OutputConfig, PhysicsConfig,
    RunConfig, SolverConfig, SymmetryConfig,
};
pub use dump::{decode, encode, read_state, write_state, DumpHeader, FieldDump, FORMAT_VERSION};
pub use report::{
    default_radii, run_diagnostics, Diagnostic, DiagnosticsOutput, GridSummary, Report, Scalars, Skipped,
    SolveSummary, SCHEMA_VERSION,
};
pub use run::{execute, exit_code, initial_state, run_config, Mode, Overrides, RunOutcome, OUT_DIR_ENV};
