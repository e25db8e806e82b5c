use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the grid, solver, and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid domain mask: {0}")]
    InvalidMask(String),

    #[error("field length {got} does not match grid with {expected} points")]
    FieldLength { expected: usize, got: usize },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) is outside the grid box")]
    OutOfBounds { x: f64, y: f64 },

    #[error("point ({x}, {y}) is not inside the domain")]
    NotInside { x: f64, y: f64 },

    #[error("point ({x}, {y}) is unreachable (infinite value)")]
    Unreachable { x: f64, y: f64 },

    #[error("degenerate upwind stencil at gridpoint ({i}, {j})")]
    DegenerateStencil { i: usize, j: usize },

    #[error("no admissible root at gridpoint ({i}, {j})")]
    NoAdmissibleRoot { i: usize, j: usize },

    #[error("sweeping did not converge after {sweeps} sweeps (last change {last_change:e})")]
    NoConvergence { sweeps: usize, last_change: f64 },

    #[error("solve {index} failed: {source}")]
    Indexed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_index(self, index: usize) -> Error {
        Error::Indexed {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
