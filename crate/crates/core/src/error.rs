use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("nontrivial bundle: a constant section with |c| > 0 does not exist when a degree is nonzero (degrees {0:?})")]
    NontrivialBundle(Vec<i64>),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("under-resolved core: epsilon {epsilon} needs transverse spacing <= epsilon/4, grid has {spacing}")]
    UnderResolved { epsilon: f64, spacing: f64 },

    #[error("degree mismatch: charges sum to {charges} but the bundle degree is {degree}")]
    DegreeMismatch { charges: i64, degree: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("boundary-value iteration did not converge (residual {residual:e})")]
    OdeNonConvergence { residual: f64 },

    #[error("symmetry rejected: energy changes by {defect:e} under a group element")]
    SymmetryRejected { defect: f64 },

    #[error("no zero set: no site with |u|^2 <= 1 - beta")]
    NoZeroSet,

    #[error("radius {radius} exceeds the admissible bound {bound}")]
    RadiusTooLarge { radius: f64, bound: f64 },

    #[error("format version mismatch: file has {found}, reader expects {expected}")]
    FormatVersion { found: u32, expected: u32 },

    #[error("malformed field dump: {0}")]
    Dump(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
