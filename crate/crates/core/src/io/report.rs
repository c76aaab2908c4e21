//! Diagnostics runner, CSV artifacts and the versioned JSON report.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    concentration_fraction, decay_fit, extract_vortices, monotonicity_profile, slice_quantization, unit_ball_measure,
    VortexGeometry,
};
use crate::error::{Error, Result};
use crate::functional::{current_j, discrepancy, energy, inner_variation_residual, EnergyBreakdown, VectorField};
use crate::lattice::{total_flux, FieldState};
use crate::solvers::SweepRow;

use super::config::DiagnosticsConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Discrepancy,
    Vortices,
    Decay,
    Concentration,
    Monotonicity,
    Slices,
    Stationarity,
    Current,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 8] = [
        Diagnostic::Discrepancy,
        Diagnostic::Vortices,
        Diagnostic::Decay,
        Diagnostic::Concentration,
        Diagnostic::Monotonicity,
        Diagnostic::Slices,
        Diagnostic::Stationarity,
        Diagnostic::Current,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Diagnostic::Discrepancy => "discrepancy",
            Diagnostic::Vortices => "vortices",
            Diagnostic::Decay => "decay",
            Diagnostic::Concentration => "concentration",
            Diagnostic::Monotonicity => "monotonicity",
            Diagnostic::Slices => "slices",
            Diagnostic::Stationarity => "stationarity",
            Diagnostic::Current => "current",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown diagnostic {name:?}")))
    }

    /// Names in canonical order; `all` selects every diagnostic.
    pub fn parse_list<S: AsRef<str>>(names: &[S]) -> Result<Vec<Self>> {
        if names.iter().any(|n| n.as_ref() == "all") {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = names.iter().map(|n| Self::parse(n.as_ref())).collect::<Result<Vec<_>>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// A diagnostic that was requested but could not be evaluated on this state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scalars {
    pub energy: Option<EnergyBreakdown>,
    pub energy_over_2pi: Option<f64>,
    pub max_abs_u: Option<f64>,
    /// Total flux per coordinate plane, in units of 2π.
    pub flux: Vec<f64>,
    pub max_xi: Option<f64>,
    /// Vortex charges (points in 2D, lines in 3D), sorted.
    pub charges: Option<Vec<i64>>,
    /// Summed plaquette vorticity per coordinate plane.
    pub plane_charges: Option<Vec<i64>>,
    pub unresolved_plaquettes: Option<usize>,
    pub broken_lines: Option<usize>,
    pub decay_rate: Option<f64>,
    pub decay_amplitude: Option<f64>,
    pub decay_residual: Option<f64>,
    pub beta: Option<f64>,
    pub concentration: Option<f64>,
    pub concentration_k: Option<f64>,
    pub monotonicity_violations: Option<usize>,
    /// `Ẽ(r_max) / (2π ω_{n−2})`.
    pub density_quantization: Option<f64>,
    pub slice_median_distance: Option<f64>,
    pub slice_worst_distance: Option<f64>,
    pub stationarity: Option<Vec<f64>>,
    pub stationarity_max: Option<f64>,
    pub current_mass: Option<f64>,
    /// `mass(J) / E`.
    pub current_mass_ratio: Option<f64>,
    /// `(1/2π) ∑ J` per coordinate plane.
    pub current_total: Option<Vec<f64>>,
}

/// Scalars plus CSV artifacts `(file name, contents)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsOutput {
    pub scalars: Scalars,
    pub csv: Vec<(String, String)>,
    pub skipped: Vec<Skipped>,
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Default radii: 16 evenly spaced values on `[3ε, min(L/4, 0.99 L/3)]`.
pub fn default_radii(state: &FieldState, eps: f64) -> Option<Vec<f64>> {
    let lmin = state.grid().lengths().iter().copied().fold(f64::INFINITY, f64::min);
    let lo = 3.0 * eps;
    let hi = (0.25 * lmin).min(0.99 * lmin / 3.0);
    if !(hi > lo) {
        return None;
    }
    Some((0..16).map(|i| lo + (hi - lo) * i as f64 / 15.0).collect())
}

fn default_center(state: &FieldState) -> [f64; 3] {
    let set = extract_vortices(state);
    if let Some(x) = set.locations().first() {
        return *x;
    }
    let u = state.u();
    let s = (0..u.len()).min_by(|&a, &b| u[a].norm_sqr().total_cmp(&u[b].norm_sqr())).unwrap_or(0);
    state.grid().position(s)
}

/// Energy, `max|u|` and fluxes are always reported; `selected` adds the rest.
pub fn run_diagnostics(
    state: &FieldState,
    eps: f64,
    selected: &[Diagnostic],
    opts: &DiagnosticsConfig,
) -> Result<DiagnosticsOutput> {
    let g = state.grid();
    let dim = g.dim();
    let mut out = DiagnosticsOutput::default();
    let e = energy(state, eps)?;
    out.csv.push(("energy.csv".into(), format!("{}\n{}\n", EnergyBreakdown::CSV_HEADER, e.csv_row(eps))));
    let sc = &mut out.scalars;
    sc.energy = Some(e);
    sc.energy_over_2pi = Some(e.total / (2.0 * PI));
    sc.max_abs_u = Some(state.max_abs_u());
    sc.flux = g.planes().into_iter().map(|p| total_flux(state, p) / (2.0 * PI)).collect();

    let mut skip = |d: Diagnostic, err: Error| out.skipped.push(Skipped { name: d.name().into(), reason: err.to_string() });
    let mut csv = Vec::new();
    for &d in selected {
        match d {
            Diagnostic::Discrepancy => sc.max_xi = Some(fold_max(&discrepancy(state, eps)?)),
            Diagnostic::Vortices => {
                let set = extract_vortices(state);
                let mut body = String::from("kind,index,charge,x,y,z\n");
                match &set.geometry {
                    VortexGeometry::Points(p) => {
                        for (i, c) in p.iter().enumerate() {
                            body.push_str(&format!("point,{i},{},{},{},0\n", c.charge, c.position[0], c.position[1]));
                        }
                    }
                    VortexGeometry::Lines(l) => {
                        for (i, line) in l.iter().enumerate() {
                            for v in &line.vertices {
                                body.push_str(&format!("line,{i},{},{},{},{}\n", line.charge, v[0], v[1], v[2]));
                            }
                        }
                    }
                }
                csv.push(("vortices.csv".to_string(), body));
                sc.charges = Some(set.charges());
                sc.plane_charges = Some(set.plane_charges.clone());
                sc.unresolved_plaquettes = Some(set.unresolved_plaquettes);
                sc.broken_lines = Some(set.broken_lines);
            }
            Diagnostic::Decay => match decay_fit(state, eps, opts.beta) {
                Ok(f) => {
                    csv.push(("decay.csv".to_string(), f.to_csv()));
                    sc.decay_rate = Some(f.rate);
                    sc.decay_amplitude = Some(f.amplitude);
                    sc.decay_residual = Some(f.residual);
                    sc.beta = Some(f.beta);
                }
                Err(err) => skip(d, err),
            },
            Diagnostic::Concentration => match concentration_fraction(state, eps, opts.concentration_k) {
                Ok(c) => {
                    sc.concentration = Some(c);
                    sc.concentration_k = Some(opts.concentration_k);
                }
                Err(err) => skip(d, err),
            },
            Diagnostic::Monotonicity => {
                let radii = match opts.radii.clone().or_else(|| default_radii(state, eps)) {
                    Some(r) => r,
                    None => {
                        skip(d, Error::InvalidArgument("no admissible radius range".into()));
                        continue;
                    }
                };
                let center = opts.center.unwrap_or_else(|| default_center(state));
                match monotonicity_profile(state, eps, center, &radii, opts.slack) {
                    Ok(p) => {
                        csv.push(("monotonicity.csv".to_string(), p.to_csv(dim)));
                        sc.monotonicity_violations = Some(p.violations.len());
                        let last = *p.density.last().unwrap();
                        sc.density_quantization = Some(last / (unit_ball_measure(dim - 2) * 2.0 * PI));
                    }
                    Err(err) => skip(d, err),
                }
            }
            Diagnostic::Slices => {
                if dim != 3 {
                    skip(d, Error::InvalidArgument("slice quantization needs a 3-dimensional grid".into()));
                    continue;
                }
                match slice_quantization(state, eps, opts.slice_axis, opts.chi_radius) {
                    Ok(q) => {
                        csv.push(("slices.csv".to_string(), q.to_csv()));
                        sc.slice_median_distance = Some(q.median);
                        sc.slice_worst_distance = Some(q.worst);
                    }
                    Err(err) => skip(d, err),
                }
            }
            Diagnostic::Stationarity => {
                let probes = VectorField::standard_probes(dim);
                let r = probes.iter().map(|p| inner_variation_residual(state, eps, p)).collect::<Result<Vec<_>>>()?;
                let mut body = String::from("probe,residual\n");
                for (i, v) in r.iter().enumerate() {
                    body.push_str(&format!("{i},{v}\n"));
                }
                csv.push(("stationarity.csv".to_string(), body));
                sc.stationarity_max = Some(fold_max(&r));
                sc.stationarity = Some(r);
            }
            Diagnostic::Current => {
                let j = current_j(state, eps)?;
                let totals: Vec<f64> = (0..g.num_planes()).map(|p| j.total(g, p) / (2.0 * PI)).collect();
                let mut body = String::from("plane,total_over_2pi\n");
                for (p, t) in totals.iter().enumerate() {
                    body.push_str(&format!("{p},{t}\n"));
                }
                csv.push(("current.csv".to_string(), body));
                sc.current_mass = Some(j.mass);
                sc.current_mass_ratio = Some(if e.total > 0.0 { j.mass / e.total } else { 0.0 });
                sc.current_total = Some(totals);
            }
        }
    }
    out.csv.extend(csv);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iters: usize,
    pub grad_norm: f64,
    /// `½‖G‖²` (saddle runs).
    pub phi: Option<f64>,
    /// Saddle runs: energy above the trivial threshold.
    pub nontrivial: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub mode: String,
    pub epsilon: f64,
    pub grid: GridSummary,
    pub degrees: Vec<i64>,
    pub seed: Option<u64>,
    pub solve: Option<SolveSummary>,
    pub scalars: Scalars,
    pub sweep: Vec<SweepRow>,
    pub skipped: Vec<Skipped>,
    pub files: Vec<String>,
}

impl Report {
    pub fn new(mode: &str, state: &FieldState, eps: f64) -> Self {
        let g = state.grid();
        Self {
            schema_version: SCHEMA_VERSION,
            mode: mode.to_string(),
            epsilon: eps,
            grid: GridSummary { dim: g.dim(), sizes: g.sizes().to_vec(), lengths: g.lengths().to_vec() },
            degrees: state.twist().degrees().to_vec(),
            seed: None,
            solve: None,
            scalars: Scalars::default(),
            sweep: Vec::new(),
            skipped: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::FormatVersion { found: r.schema_version, expected: SCHEMA_VERSION });
        }
        Ok(r)
    }
}
