use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "matrix size {n} exceeds cap {cap} for alpha = {alpha}, grid_density = {grid_density}"
    )]
    SizeCap {
        n: usize,
        cap: usize,
        alpha: f64,
        grid_density: f64,
    },

    #[error("test function has no second derivative; required by {op}")]
    MissingDerivative { op: &'static str },

    #[error("non-finite value in {what}: {detail}")]
    NonFinite { what: &'static str, detail: String },

    #[error("supremum estimate did not stabilize: successive ratio {ratio:.4} > 1.05")]
    NotStabilized { ratio: f64 },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("eigensolver failure for {n}x{n} matrix: {detail}")]
    Eigen { n: usize, detail: String },

    #[error("eigenvalue {value} outside domain of test function (limit {limit})")]
    EigenvalueOutOfDomain { value: f64, limit: f64 },

    #[error("region error: {0}")]
    Region(String),

    #[error("f(0) = {f0} is nonzero; pass shift_f0 to subtract it")]
    NonzeroAtZero { f0: f64 },

    #[error("scaling-limit model mismatch: {0}")]
    ModelMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
