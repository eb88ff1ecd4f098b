use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("too few journals to form quartiles ({0} < 4)")]
    TooFewJournals(usize),

    #[error("non-integrable at origin under truncation tolerance (b = {b}, truncated mass fraction {fraction:.3e})")]
    NonIntegrable { b: f64, fraction: f64 },

    #[error("cdf table needs at least 256 grid points, got {0}")]
    GridTooCoarse(usize),

    #[error("negative or non-finite variance {0}")]
    InvalidVariance(f64),

    #[error("reviewer scored with no assignment")]
    ZeroLoad,

    #[error("cannot draw {wanted} distinct reviewers from a pool of {available}")]
    NotEnoughReviewers { wanted: usize, available: usize },

    #[error("cannot aggregate an empty score list")]
    EmptyScores,

    #[error("metrics need at least one reviewer")]
    NoReviewers,

    #[error("rank correlation is undefined for a constant series (degenerate)")]
    DegenerateCorrelation,

    #[error("issue {0} is not present in the run")]
    MissingIssue(u32),

    #[error("correlation series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("sweep grid value {param} = {value} gives an invalid config: {}", .violations.join("; "))]
    InvalidGridPoint {
        param: String,
        value: f64,
        violations: Vec<String>,
    },

    #[error("unknown figure id {0:?}; valid ids: {1}")]
    UnknownFigure(String, String),

    #[error("missing input file {}", .0.display())]
    MissingInput(PathBuf),

    #[error("config parse error in {}: {msg}", .path.display())]
    ConfigParse { path: PathBuf, msg: String },

    #[error("malformed CSV {}: {msg}", .path.display())]
    MalformedCsv { path: PathBuf, msg: String },

    #[error("io error at {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
