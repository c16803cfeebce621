//! The non-standard harmonic boundary problem on an annular region: harmonic
//! in the annulus, indicator data on the outer boundary, an unknown constant
//! on the inner boundary, and zero normal derivative at a distinguished point.
//!
//! Linearity reduces it to two standard Dirichlet solves. With v0 (inner 0,
//! outer indicator) and v1 (inner 1, outer 0), the combination u = v0 + c v1
//! is constant on the inner boundary for every c, and the scalar
//! c = -dv0/dn / dv1/dn at the distinguished point enforces the vanishing
//! normal derivative there.

use crate::error::{Error, Result};
use crate::model::DomainDescriptor;
use crate::trap::grid::{AnnularGrid, Boundary};
use crate::trap::solver::{bicgstab, SolveStats};
use nalgebra::DVector;
use serde::Serialize;

const LINEAR_TOL: f64 = 1e-12;

/// Union of left-closed angle intervals on the outer boundary.
#[derive(Debug, Clone, Serialize)]
pub struct GammaArcs {
    /// (start, end) angle pairs; wrap-around intervals have start > end.
    pub arcs: Vec<(f64, f64)>,
}

impl GammaArcs {
    pub fn new(arcs: Vec<(f64, f64)>) -> Self {
        let tau = std::f64::consts::TAU;
        GammaArcs {
            arcs: arcs
                .into_iter()
                .map(|(a, b)| (a.rem_euclid(tau), b.rem_euclid(tau)))
                .collect(),
        }
    }

    pub fn full() -> Self {
        GammaArcs { arcs: vec![(0.0, std::f64::consts::TAU)] }
    }

    pub fn empty() -> Self {
        GammaArcs { arcs: Vec::new() }
    }

    /// Left-closed membership: points exactly on a start angle belong to the
    /// arc, points exactly on an end angle do not.
    pub fn contains(&self, angle: f64) -> bool {
        let tau = std::f64::consts::TAU;
        let t = angle.rem_euclid(tau);
        self.arcs.iter().any(|&(a, b)| {
            if (b - a).abs() >= tau || (a == 0.0 && b == 0.0 && !self.arcs.is_empty() && b == a) {
                // degenerate handled below; full circle stored as (0, tau)
                a <= t
            } else if a <= b {
                a <= t && t < b
            } else {
                t >= a || t < b
            }
        })
    }

    pub fn indicator(&self, angle: f64) -> f64 {
        if self.contains(angle) {
            1.0
        } else {
            0.0
        }
    }

    /// Complement within [0, 2pi), preserving the left-closed convention.
    pub fn complement(&self) -> GammaArcs {
        let tau = std::f64::consts::TAU;
        if self.arcs.is_empty() {
            return GammaArcs::full();
        }
        // unfold wrap-around arcs, sort, merge, invert
        let mut segs: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in &self.arcs {
            if (b - a).abs() >= tau {
                return GammaArcs::empty();
            }
            if a <= b {
                segs.push((a, b));
            } else {
                segs.push((a, tau));
                segs.push((0.0, b));
            }
        }
        segs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in segs {
            match merged.last_mut() {
                Some((_, e)) if a <= *e => *e = e.max(b),
                _ => merged.push((a, b)),
            }
        }
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for (a, b) in &merged {
            if *a > cursor {
                out.push((cursor, *a));
            }
            cursor = cursor.max(*b);
        }
        if cursor < tau {
            out.push((cursor, tau));
        }
        GammaArcs { arcs: out }
    }
}

/// Problem geometry: nested domains, target arcs, distinguished point.
#[derive(Clone)]
pub struct TrapProblem {
    pub inner: DomainDescriptor,
    pub outer: DomainDescriptor,
    pub gamma: GammaArcs,
    pub x_star: DVector<f64>,
}

impl TrapProblem {
    pub fn new(
        inner: DomainDescriptor,
        outer: DomainDescriptor,
        gamma: GammaArcs,
        x_star: Vec<f64>,
    ) -> Result<Self> {
        let x_star = DVector::from_vec(x_star);
        if inner.dim() != 2 || outer.dim() != 2 {
            return Err(Error::InvalidInput("trap problems are 2-d".into()));
        }
        // closure containment, sampled along the inner boundary
        for i in 0..256 {
            let theta = std::f64::consts::TAU * i as f64 / 256.0;
            let (x, _) = inner.boundary_point(theta)?;
            if outer.g(&x) >= 0.0 {
                return Err(Error::InvalidInput(
                    "inner closure must sit strictly inside the outer domain".into(),
                ));
            }
        }
        if inner.g(&x_star).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "x* must lie on the inner boundary; |g| = {:.3e}",
                inner.g(&x_star).abs()
            )));
        }
        Ok(TrapProblem { inner, outer, gamma, x_star })
    }
}

/// One Dirichlet solve on the annular grid.
pub struct DirichletSolution {
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

/// Solves -Laplace u = 0 with constant inner data and angle-dependent outer
/// data on a fresh grid of the given resolution.
pub fn solve_dirichlet_annulus(
    inner: &DomainDescriptor,
    outer: &DomainDescriptor,
    resolution: usize,
    inner_value: f64,
    outer_data: &dyn Fn(f64) -> f64,
) -> Result<(AnnularGrid, DirichletSolution)> {
    let grid = AnnularGrid::build(inner, outer, resolution)?;
    let solution = solve_on_grid(&grid, inner_value, outer_data)?;
    Ok((grid, solution))
}

pub fn solve_on_grid(
    grid: &AnnularGrid,
    inner_value: f64,
    outer_data: &dyn Fn(f64) -> f64,
) -> Result<DirichletSolution> {
    let (matrix, pulls) = grid.assemble();
    let mut rhs = vec![0.0; grid.n_unknowns()];
    for (u, pull) in pulls.iter().enumerate() {
        for (coef, boundary) in pull {
            let value = match boundary {
                Boundary::Inner => inner_value,
                Boundary::Outer { angle } => outer_data(*angle),
            };
            rhs[u] += coef * value;
        }
    }
    let (values, stats) = bicgstab(&matrix, &rhs, LINEAR_TOL, 200_000)?;
    if stats.residual_inf > 1e-8 * (1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
        return Err(Error::SolverDiverged {
            residual: stats.residual_inf,
            iterations: stats.iterations,
        });
    }
    Ok(DirichletSolution { values, stats })
}

/// Discrete solution of the non-standard problem.
pub struct TrapSolution {
    pub grid: AnnularGrid,
    /// u = v0 + c v1 on the unknowns.
    pub u: Vec<f64>,
    /// The constant trace of u on the inner boundary.
    pub c: f64,
    pub v0_stats: SolveStats,
    pub v1_stats: SolveStats,
    /// Normal derivative of the assembled u at x*, re-measured after assembly.
    pub normal_derivative_at_x_star: f64,
    pub resolution: usize,
}

impl TrapSolution {
    pub fn u_at(&self, x: &DVector<f64>) -> Result<f64> {
        self.grid.interpolate(&self.u, x)
    }

    pub fn min_max(&self) -> (f64, f64) {
        let min = self.u.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }
}

/// One-sided second-order normal derivative at x* along the outward inner
/// normal, from the known boundary value f0 and two interpolated samples.
fn normal_derivative(
    grid: &AnnularGrid,
    values: &[f64],
    x_star: &DVector<f64>,
    normal: &DVector<f64>,
    f0: f64,
) -> Result<f64> {
    let s = 2.0 * grid.hx.max(grid.hy);
    let f1 = grid.interpolate(values, &(x_star + normal * s))?;
    let f2 = grid.interpolate(values, &(x_star + normal * (2.0 * s)))?;
    Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * s))
}

pub fn solve_trap(problem: &TrapProblem, resolution: usize) -> Result<TrapSolution> {
    let grid = AnnularGrid::build(&problem.inner, &problem.outer, resolution)?;
    let gamma = problem.gamma.clone();
    let v0 = solve_on_grid(&grid, 0.0, &|angle| gamma.indicator(angle))?;
    let v1 = solve_on_grid(&grid, 1.0, &|_| 0.0)?;

    let normal = problem.inner.normal(&problem.x_star)?;
    let d0 = normal_derivative(&grid, &v0.values, &problem.x_star, &normal, 0.0)?;
    let d1 = normal_derivative(&grid, &v1.values, &problem.x_star, &normal, 1.0)?;
    if d1.abs() < 1e-10 {
        return Err(Error::DegenerateNormalDerivative(d1.abs()));
    }
    let c = -d0 / d1;

    let u: Vec<f64> = v0.values.iter().zip(&v1.values).map(|(a, b)| a + c * b).collect();
    let recheck = normal_derivative(&grid, &u, &problem.x_star, &normal, c)?;

    Ok(TrapSolution {
        grid,
        u,
        c,
        v0_stats: v0.stats,
        v1_stats: v1.stats,
        normal_derivative_at_x_star: recheck,
        resolution,
    })
}

/// Limiting probability of exiting through the gamma arcs: the harmonic value
/// at x for starts in the annulus, the constant c for starts inside the inner
/// domain, and the boundary data on the outer boundary itself.
pub fn exit_law_through_outer(
    problem: &TrapProblem,
    solution: &TrapSolution,
    x: &DVector<f64>,
) -> Result<f64> {
    let g_outer = problem.outer.g(x);
    if g_outer > 1e-12 {
        return Err(Error::InvalidInput("point lies outside the closed outer domain".into()));
    }
    if g_outer.abs() <= 1e-12 {
        return Ok(problem.gamma.indicator(problem.outer.param_of(x)?));
    }
    if problem.inner.g(x) <= 0.0 {
        return Ok(solution.c);
    }
    solution.u_at(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainDescriptor;

    fn disks() -> (DomainDescriptor, DomainDescriptor) {
        (
            DomainDescriptor::ball(vec![0.0, 0.0], 1.0),
            DomainDescriptor::ball(vec![0.0, 0.0], 2.0),
        )
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        let (inner, outer) = disks();
        let (_, sol) = solve_dirichlet_annulus(&inner, &outer, 64, 1.0, &|_| 1.0).unwrap();
        for &v in &sol.values {
            assert!((v - 1.0).abs() < 1e-8);
        }
        let (_, zero) = solve_dirichlet_annulus(&inner, &outer, 64, 0.0, &|_| 0.0).unwrap();
        for &v in &zero.values {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn radial_log_solution_on_concentric_disks() {
        // inner 1, outer 0: u(r) = ln(2/r)/ln 2
        let (inner, outer) = disks();
        let (grid, sol) = solve_dirichlet_annulus(&inner, &outer, 128, 1.0, &|_| 0.0).unwrap();
        let mut worst = 0.0f64;
        for (u, &(i, j)) in sol.values.iter().zip(&grid.unknowns) {
            let p = grid.node(i, j);
            let r = p.norm();
            let exact = (2.0 / r).ln() / 2f64.ln();
            worst = worst.max((u - exact).abs());
        }
        assert!(worst < 1e-3, "max error {}", worst);
    }

    #[test]
    fn full_gamma_gives_u_one_and_c_one() {
        let (inner, outer) = disks();
        let problem =
            TrapProblem::new(inner, outer, GammaArcs::full(), vec![1.0, 0.0]).unwrap();
        let sol = solve_trap(&problem, 64).unwrap();
        assert!((sol.c - 1.0).abs() < 1e-6, "c = {}", sol.c);
        let (min, max) = sol.min_max();
        assert!(min > 1.0 - 1e-6 && max < 1.0 + 1e-6);
    }

    #[test]
    fn empty_gamma_gives_zero() {
        let (inner, outer) = disks();
        let problem =
            TrapProblem::new(inner, outer, GammaArcs::empty(), vec![1.0, 0.0]).unwrap();
        let sol = solve_trap(&problem, 64).unwrap();
        assert!(sol.c.abs() < 1e-8, "c = {}", sol.c);
        let (min, max) = sol.min_max();
        assert!(min.abs() < 1e-8 && max.abs() < 1e-8);
    }

    #[test]
    fn gamma_membership_is_left_closed() {
        let g = GammaArcs::new(vec![(0.0, std::f64::consts::PI)]);
        assert!(g.contains(0.0));
        assert!(g.contains(1.0));
        assert!(!g.contains(std::f64::consts::PI));
        assert!(!g.contains(-0.1));
        let c = g.complement();
        assert!(!c.contains(0.0));
        assert!(c.contains(std::f64::consts::PI));
        assert!(c.contains(5.0));
    }

    #[test]
    fn wraparound_arcs() {
        let g = GammaArcs::new(vec![(5.5, 0.5)]);
        assert!(g.contains(5.6));
        assert!(g.contains(0.2));
        assert!(!g.contains(1.0));
        let c = g.complement();
        assert!(c.contains(1.0));
        assert!(!c.contains(0.2));
    }

    #[test]
    fn x_star_must_sit_on_the_inner_boundary() {
        let (inner, outer) = disks();
        assert!(TrapProblem::new(inner, outer, GammaArcs::full(), vec![1.1, 0.0]).is_err());
    }
}
