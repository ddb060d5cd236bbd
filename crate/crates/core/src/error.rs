use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("point {modulus} is not inside the disk (limit {limit})")]
    OutsideDisk { modulus: f64, limit: f64 },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("support overflow: {0} has unbounded support and no truncation degree was supplied")]
    SupportOverflow(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("window {0} touches the truncation edge")]
    WindowEdge(String),

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),

    #[error("unbound symbol name `{0}`")]
    Unbound(String),

    #[error("truncation N={given} too small, need at least {required}")]
    InsufficientTruncation { given: usize, required: usize },

    #[error("rank-one sum is not zero (Frobenius norm {0:e})")]
    NonZeroRankOneSum(f64),

    #[error("no admissible matrix: residual functional bounded below by {margin:e} on the box")]
    Infeasible { margin: f64 },

    #[error("family is full rank")]
    FullRank,

    #[error("family is zero")]
    ZeroFamily,

    #[error("word parity does not match the requested map: {0}")]
    Parity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("optimizer did not converge: best value {best:e}, gap {gap:e}")]
    OptimizerNonConvergence { best: f64, gap: f64 },

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
