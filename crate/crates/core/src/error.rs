use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the validated envelope: {0}")]
    Domain(String),

    #[error("|H1_{order}(z)| is numerically zero at z = {z}")]
    NearHankelZero { order: u32, z: Complex64 },

    #[error("H1_{order}(z) overflows at z = {z}")]
    Overflow { order: u32, z: Complex64 },

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("DtN coefficient failed for n = {n}, k = {k}: {source}")]
    Dtn {
        n: u32,
        k: Complex64,
        #[source]
        source: Box<Error>,
    },

    #[error("eigensolver: {0}")]
    Solver(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Geometry(_) | Error::Parse { .. } | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
