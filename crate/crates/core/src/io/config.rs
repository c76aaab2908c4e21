//! TOML run configuration. Every section rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::DEFAULT_BETA;
use crate::error::{Error, Result};
use crate::lattice::{BundleTwist, Grid};
use crate::solvers::{LineSearch, Method, SolverOptions, SymmetryOp, SymmetrySpec};

use super::report::Diagnostic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub bundle: BundleConfig,
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub sizes: Vec<usize>,
    /// Defaults to unit lengths.
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    /// One degree per coordinate plane (`(0,1)` in 2D; `(0,1), (0,2), (1,2)` in 3D).
    /// Empty means the trivial bundle.
    #[serde(default)]
    pub degrees: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Strictly decreasing ε values for a warm-started sweep.
    #[serde(default)]
    pub schedule: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Constant,
    Random,
    Vortices,
    Dump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// Defaults to `vortices` when charges are given, `constant` otherwise.
    #[serde(default)]
    pub kind: Option<InitKind>,
    #[serde(default)]
    pub zeros: Vec<[f64; 2]>,
    #[serde(default)]
    pub charges: Vec<i64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// `[re, im]` of the constant section.
    #[serde(default = "default_value")]
    pub value: [f64; 2],
    /// Core width of superposed vortex seeds; defaults to the first ε.
    #[serde(default)]
    pub core: Option<f64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_amplitude() -> f64 {
    0.1
}

fn default_value() -> [f64; 2] {
    [1.0, 0.0]
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            kind: None,
            zeros: Vec::new(),
            charges: Vec::new(),
            seed: 0,
            amplitude: default_amplitude(),
            value: default_value(),
            core: None,
            path: None,
        }
    }
}

impl InitConfig {
    pub fn resolved_kind(&self) -> InitKind {
        self.kind.unwrap_or(if self.charges.is_empty() { InitKind::Constant } else { InitKind::Vortices })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Lbfgs,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default = "default_memory")]
    pub memory: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_cadence")]
    pub gauge_cadence: usize,
    #[serde(default = "default_true")]
    pub precondition: bool,
    /// Write the per-iteration trace CSV.
    #[serde(default)]
    pub trace: bool,
    /// Generators of the symmetry group imposed by `saddle`.
    #[serde(default)]
    pub symmetry: Vec<SymmetryConfig>,
}

/// A symmetry generator: translation by `shift` sites, optionally with conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    pub shift: Vec<i64>,
    #[serde(default)]
    pub conjugate: bool,
}

impl SymmetryConfig {
    fn op(&self) -> SymmetryOp {
        let mut shift = [0i64; 3];
        for (d, s) in shift.iter_mut().zip(&self.shift) {
            *d = *s;
        }
        SymmetryOp { shift, conjugate: self.conjugate }
    }
}

fn default_method() -> MethodName {
    MethodName::Lbfgs
}

fn default_memory() -> usize {
    10
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_iters() -> usize {
    20_000
}

fn default_cadence() -> usize {
    50
}

fn default_true() -> bool {
    true
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            memory: default_memory(),
            tol: default_tol(),
            max_iters: default_max_iters(),
            gauge_cadence: default_cadence(),
            precondition: true,
            trace: false,
            symmetry: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            method: match self.method {
                MethodName::Lbfgs => Method::Lbfgs { memory: self.memory },
                MethodName::GradientDescent => Method::GradientDescent,
            },
            tol: self.tol,
            max_iters: self.max_iters,
            line_search: LineSearch::default(),
            gauge_cadence: self.gauge_cadence,
            precondition: self.precondition,
            trace: self.trace,
        }
    }

    pub fn symmetry_spec(&self) -> Option<SymmetrySpec> {
        (!self.symmetry.is_empty()).then(|| SymmetrySpec::new(self.symmetry.iter().map(SymmetryConfig::op).collect()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Diagnostic names, or `["all"]`.
    #[serde(default)]
    pub list: Vec<String>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_k")]
    pub concentration_k: f64,
    /// Ball centre for the monotonicity profile; defaults to the first vortex.
    #[serde(default)]
    pub center: Option<[f64; 3]>,
    /// Radii for the monotonicity profile; defaults to 16 values on `[3ε, L/4]`.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub slack: f64,
    #[serde(default = "default_axis")]
    pub slice_axis: usize,
    #[serde(default = "default_chi")]
    pub chi_radius: f64,
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_k() -> f64 {
    10.0
}

fn default_axis() -> usize {
    2
}

fn default_chi() -> f64 {
    0.25
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            list: Vec::new(),
            beta: default_beta(),
            concentration_k: default_k(),
            center: None,
            radii: None,
            slack: 0.0,
            slice_axis: default_axis(),
            chi_radius: default_chi(),
        }
    }
}

impl DiagnosticsConfig {
    pub fn selected(&self) -> Result<Vec<Diagnostic>> {
        Diagnostic::parse_list(&self.list)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub dump_fields: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("run")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), dump_fields: true }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // relative dump paths are taken relative to the config file
        if let (Some(p), Some(parent)) = (cfg.init.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = parent.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        let lengths = self.grid.lengths.clone().unwrap_or_else(|| vec![1.0; self.grid.dim]);
        Grid::new(&self.grid.sizes, &lengths).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn twist(&self) -> BundleTwist {
        if self.bundle.degrees.is_empty() {
            BundleTwist::trivial(self.grid.dim)
        } else {
            BundleTwist::new(self.bundle.degrees.clone())
        }
    }

    /// The ε values in run order (a single entry unless a schedule is given).
    pub fn epsilons(&self) -> Vec<f64> {
        match (&self.physics.schedule, self.physics.epsilon) {
            (Some(s), _) => s.clone(),
            (None, Some(e)) => vec![e],
            (None, None) => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.grid.dim == 2 || self.grid.dim == 3) {
            return cfg(format!("grid.dim must be 2 or 3, got {}", self.grid.dim));
        }
        if self.grid.sizes.len() != self.grid.dim {
            return cfg(format!("grid.sizes needs {} entries", self.grid.dim));
        }
        if let Some(l) = &self.grid.lengths {
            if l.len() != self.grid.dim {
                return cfg(format!("grid.lengths needs {} entries", self.grid.dim));
            }
        }
        let planes = self.grid.dim * (self.grid.dim - 1) / 2;
        if !self.bundle.degrees.is_empty() && self.bundle.degrees.len() != planes {
            return cfg(format!("bundle.degrees needs {planes} entries (one per coordinate plane)"));
        }
        match (&self.physics.epsilon, &self.physics.schedule) {
            (Some(_), Some(_)) => return cfg("physics: give either epsilon or schedule, not both".into()),
            (None, None) => return cfg("physics: epsilon or schedule is required".into()),
            (None, Some(s)) if s.is_empty() => return cfg("physics.schedule is empty".into()),
            _ => {}
        }
        let eps = self.epsilons();
        if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return cfg(format!("epsilon values must be positive, got {eps:?}"));
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return cfg("physics.schedule must be strictly decreasing".into());
        }
        let degree = self.bundle.degrees.first().copied().unwrap_or(0);
        match self.init.resolved_kind() {
            InitKind::Vortices => {
                if self.init.zeros.len() != self.init.charges.len() {
                    return cfg(format!(
                        "init: {} zeros but {} charges",
                        self.init.zeros.len(),
                        self.init.charges.len()
                    ));
                }
                let total: i64 = self.init.charges.iter().sum();
                if total != degree {
                    return Err(Error::DegreeMismatch { charges: total, degree });
                }
            }
            InitKind::Constant => {
                let [re, im] = self.init.value;
                if re.hypot(im) > 0.0 && self.bundle.degrees.iter().any(|&d| d != 0) {
                    return cfg("init: a constant nonzero section needs the trivial bundle".into());
                }
            }
            InitKind::Dump => {
                if self.init.path.is_none() {
                    return cfg("init.kind = \"dump\" needs init.path".into());
                }
            }
            InitKind::Random => {}
        }
        if let Some(c) = self.init.core {
            if !(c.is_finite() && c > 0.0) {
                return cfg(format!("init.core must be positive, got {c}"));
            }
        }
        if self.solver.symmetry.iter().any(|g| g.shift.len() != self.grid.dim) {
            return cfg(format!("solver.symmetry shifts need {} entries", self.grid.dim));
        }
        self.solver.options().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.diagnostics.selected()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nepsilon = 0.2\n";

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.init.resolved_kind(), InitKind::Constant);
        assert_eq!(c.epsilons(), vec![0.2]);
        assert!(c.twist().is_trivial());
        assert_eq!(c.output.dir, PathBuf::from("run"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}[solver]\ntoll = 1e-6\n");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("toll"), "{err}");
        let err = RunConfig::from_toml(&format!("{MINIMAL}[extra]\n")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn charge_degree_mismatch() {
        let text = "[grid]\ndim = 2\nsizes = [16, 16]\n[bundle]\ndegrees = [1]\n[physics]\nepsilon = 0.2\n\
                    [init]\nzeros = [[0.5, 0.5], [0.2, 0.2]]\ncharges = [1, 1]\n";
        let err = RunConfig::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("degree mismatch"), "{err}");
    }

    #[test]
    fn schedule_must_decrease() {
        let text = "[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nschedule = [0.1, 0.2]\n";
        assert!(RunConfig::from_toml(text).is_err());
    }
}
