use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degenerate boundary: |grad g| = {grad_norm:.3e} below floor {floor:.3e}")]
    DegenerateBoundary { grad_norm: f64, floor: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("matrix inversion failed: {0}")]
    SingularMatrix(String),

    #[error("trajectory left the integration box; drift does not confine")]
    NonAttraction,

    #[error("no root of M(lambda) = lambda on the grid; horizon too small or assumption violated")]
    NoRoot,

    #[error("multiple roots of M(lambda) = lambda detected ({0} sign changes); unsupported")]
    MultipleRoots(usize),

    #[error("boundary minimizer is not unique: values within {tol:.1e} at separation {separation:.3}")]
    AmbiguousMinimizer { tol: f64, separation: f64 },

    #[error("step budget of {budget} exceeded after reaching t = {t:.3e}")]
    BudgetExceeded { budget: u64, t: f64 },

    #[error("all samples censored; nothing to compare")]
    AllCensored,

    #[error("degenerate normal derivative at x*: |dv1/dn| = {0:.3e}")]
    DegenerateNormalDerivative(f64),

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
