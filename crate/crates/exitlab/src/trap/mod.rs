//! The harmonic boundary problem governing exit through an outer boundary
//! when the drift vanishes between the two boundaries.

pub mod grid;
pub mod problem;
pub mod solver;

pub use grid::{AnnularGrid, Boundary, Link};
pub use problem::{
    exit_law_through_outer, solve_dirichlet_annulus, solve_on_grid, solve_trap, DirichletSolution,
    GammaArcs, TrapProblem, TrapSolution,
};
