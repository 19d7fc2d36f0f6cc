use num_complex::Complex64;
use thiserror::Error;

use crate::search::SearchResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("Matrix Market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported Matrix Market field `{0}`")]
    UnsupportedField(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is singular (zero pivot in column {col})")]
    SingularMatrix { col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "shifted matrix is singular at quadrature node {index} (z = {z}); \
         an eigenvalue sits on a node, perturb the radius slightly"
    )]
    NodeSingular { index: usize, z: Complex64 },

    #[error("every quadrature node produced a singular shifted matrix; the pencil is probably not regular")]
    AllNodesSingular,

    #[error("mu = {mu} coincides with quadrature node {index}")]
    NodeCollision { index: usize, mu: Complex64 },

    #[error("dense working form needs n = {n} but the cap is {cap}; sparse factorization is not supported")]
    TooLarge { n: usize, cap: usize },

    #[error("eigenvalue iteration did not converge ({found} of {n} eigenvalues found)")]
    NumericalFailure {
        n: usize,
        found: usize,
        partial: Vec<Complex64>,
    },

    #[error("search did not terminate within {rounds} rounds (s1 = {})", partial.s1)]
    MaxRoundsExceeded { rounds: usize, partial: Box<SearchResult> },

    #[error("projected B is numerically singular (condition estimate {cond:.3e} > {cap:.1e})")]
    IllConditionedProjection { cond: f64, cap: f64 },

    #[error("residual undefined: A x = B x = 0")]
    DegenerateVector,
}
