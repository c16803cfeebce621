//! Action functionals, the quasipotential, boundary minima and the roots of
//! M(lambda) = lambda.

pub mod boundary;
pub mod functional;
pub mod gmam;
pub mod path;
pub mod roots;

pub use boundary::{boundary_min, boundary_min_with, Ambiguity, BoundaryMinOptions, BoundaryMinimum};
pub use functional::{action_of_path, geometric_action, geometric_action_gradient};
pub use gmam::{quasipotential, quasipotential_with, GmamOptions, QuasipotentialResult};
pub use path::{GeometricPath, TimedPath};
pub use roots::{
    default_lambda_grid, exit_point, exit_point_with, solve_m, solve_m_with, ExitPointResult,
    ProfilePoint, RootResult,
};
