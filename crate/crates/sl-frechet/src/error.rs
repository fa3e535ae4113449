use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: bad grid parameters, malformed expressions,
    /// boundary data out of range, mismatched grids.
    #[error("bad input: {0}")]
    BadInput(String),

    /// The IVP integrator exceeded the blow-up cap; the grid is too
    /// coarse or the spectral parameter is far outside the usable range.
    #[error("integrator overflow at x = {x:.6}: |z| exceeded {cap:.1e}")]
    Overflow { x: f64, cap: f64 },

    /// The eigenvalue search could not bracket the requested index.
    #[error("eigenvalue solver failed: {0}")]
    SolverFailure(String),

    /// Two routes to the same quantity disagree beyond tolerance.
    #[error("route disagreement: {what} differ by {gap:.3e} (tolerance {tol:.3e})")]
    RouteDisagreement { what: String, gap: f64, tol: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadInput(_) | Error::Io(_) => 2,
            Error::Overflow { .. } | Error::SolverFailure(_) => 3,
            Error::RouteDisagreement { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::BadInput(_) => "bad_input",
            Error::Overflow { .. } => "overflow",
            Error::SolverFailure(_) => "solver_failure",
            Error::RouteDisagreement { .. } => "route_disagreement",
            Error::Io(_) => "io",
        }
    }
}
