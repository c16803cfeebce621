//! Embedded-boundary grid on the annular region between two nested domains.
//!
//! Nodes live on a staggered lattice (no node sits on the coordinate axes),
//! classified as in-region when outside the closed inner domain and inside
//! the outer one. Links that cross a boundary store the crossing fraction and
//! which boundary was hit; the Shortley-Weller stencil turns those into
//! matrix coefficients and boundary-value pulls on the right-hand side.

use crate::error::{Error, Result};
use crate::model::DomainDescriptor;
use crate::trap::solver::SparseMatrix;
use nalgebra::DVector;

const THETA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Inner,
    /// Outer boundary crossing, with the angle parameter of the hit point.
    Outer { angle: f64 },
}

#[derive(Debug, Clone, Copy)]
pub enum Link {
    Interior(usize),
    /// Boundary hit at fraction theta (0, 1] of the grid spacing.
    Cut { theta: f64, boundary: Boundary },
}

pub struct AnnularGrid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    x0: f64,
    y0: f64,
    /// grid index -> unknown index
    index_of: Vec<Option<usize>>,
    /// unknown index -> (i, j)
    pub unknowns: Vec<(usize, usize)>,
    /// per unknown: E, W, N, S links
    pub links: Vec<[Link; 4]>,
}

impl AnnularGrid {
    pub fn node(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_vec(vec![self.x0 + (i as f64 + 0.5) * self.hx, self.y0 + (j as f64 + 0.5) * self.hy])
    }

    pub fn unknown_at(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        self.index_of[j * self.nx + i]
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    /// Builds the grid for the region outside `inner` and inside `outer`.
    pub fn build(inner: &DomainDescriptor, outer: &DomainDescriptor, resolution: usize) -> Result<Self> {
        if resolution < 64 {
            return Err(Error::InvalidInput("grid resolution must be at least 64".into()));
        }
        let half = outer.bounding_radius() * 1.02;
        let (nx, ny) = (resolution, resolution);
        let hx = 2.0 * half / nx as f64;
        let hy = 2.0 * half / ny as f64;
        let (x0, y0) = (-half, -half);

        let in_region = |x: &DVector<f64>| inner.g(x) > 0.0 && outer.g(x) < 0.0;

        let mut index_of = vec![None; nx * ny];
        let mut unknowns = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let x = DVector::from_vec(vec![
                    x0 + (i as f64 + 0.5) * hx,
                    y0 + (j as f64 + 0.5) * hy,
                ]);
                if in_region(&x) {
                    index_of[j * nx + i] = Some(unknowns.len());
                    unknowns.push((i, j));
                }
            }
        }
        if unknowns.is_empty() {
            return Err(Error::Geometry("annular region contains no grid nodes".into()));
        }

        let mut grid = AnnularGrid {
            nx,
            ny,
            hx,
            hy,
            x0,
            y0,
            index_of,
            unknowns: unknowns.clone(),
            links: Vec::with_capacity(unknowns.len()),
        };

        let offsets: [(isize, isize, f64); 4] =
            [(1, 0, hx), (-1, 0, hx), (0, 1, hy), (0, -1, hy)];
        let mut links = Vec::with_capacity(unknowns.len());
        for &(i, j) in &unknowns {
            let p = grid.node(i, j);
            let mut node_links = [Link::Interior(usize::MAX); 4];
            for (dir, &(di, dj, h)) in offsets.iter().enumerate() {
                let ni = i as isize + di;
                let nj = j as isize + dj;
                let neighbor_idx = if ni >= 0 && nj >= 0 {
                    grid.unknown_at(ni as usize, nj as usize)
                } else {
                    None
                };
                node_links[dir] = match neighbor_idx {
                    Some(u) => Link::Interior(u),
                    None => {
                        let q = DVector::from_vec(vec![
                            p[0] + di as f64 * h,
                            p[1] + dj as f64 * h,
                        ]);
                        cut_link(inner, outer, &p, &q)?
                    }
                };
            }
            links.push(node_links);
        }
        grid.links = links;
        Ok(grid)
    }

    /// Shortley-Weller matrix of -Laplace on the unknowns; boundary pulls are
    /// returned as per-unknown lists for assembling right-hand sides.
    pub fn assemble(&self) -> (SparseMatrix, Vec<Vec<(f64, Boundary)>>) {
        let n = self.n_unknowns();
        let mut row_ptr = vec![0usize];
        let mut cols: Vec<u32> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut pulls: Vec<Vec<(f64, Boundary)>> = vec![Vec::new(); n];

        for (u, links) in self.links.iter().enumerate() {
            let theta = |l: &Link| match l {
                Link::Interior(_) => 1.0,
                Link::Cut { theta, .. } => theta.max(THETA_FLOOR),
            };
            let (te, tw) = (theta(&links[0]), theta(&links[1]));
            let (tn, ts) = (theta(&links[2]), theta(&links[3]));
            let cx = 2.0 / (self.hx * self.hx);
            let cy = 2.0 / (self.hy * self.hy);
            let diag = cx / (te * tw) + cy / (tn * ts);
            let coef = [
                cx / (te * (te + tw)),
                cx / (tw * (te + tw)),
                cy / (tn * (tn + ts)),
                cy / (ts * (tn + ts)),
            ];

            let mut row: Vec<(u32, f64)> = vec![(u as u32, diag)];
            for (dir, link) in links.iter().enumerate() {
                match link {
                    Link::Interior(v) => row.push((*v as u32, -coef[dir])),
                    Link::Cut { boundary, .. } => pulls[u].push((coef[dir], *boundary)),
                }
            }
            row.sort_by_key(|(c, _)| *c);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        (SparseMatrix { n, row_ptr, cols, vals }, pulls)
    }

    /// Bilinear interpolation of an unknowns-vector at an arbitrary point.
    /// Falls back to inverse-distance weighting over in-region corners when a
    /// stencil corner is outside the region.
    pub fn interpolate(&self, values: &[f64], x: &DVector<f64>) -> Result<f64> {
        let fx = (x[0] - self.x0) / self.hx - 0.5;
        let fy = (x[1] - self.y0) / self.hy - 0.5;
        let i0 = fx.floor();
        let j0 = fy.floor();
        let wx = fx - i0;
        let wy = fy - j0;
        if i0 < 0.0 || j0 < 0.0 {
            return Err(Error::Geometry("interpolation point outside the grid".into()));
        }
        let (i0, j0) = (i0 as usize, j0 as usize);
        let corners = [
            (i0, j0, (1.0 - wx) * (1.0 - wy)),
            (i0 + 1, j0, wx * (1.0 - wy)),
            (i0, j0 + 1, (1.0 - wx) * wy),
            (i0 + 1, j0 + 1, wx * wy),
        ];
        if corners.iter().all(|&(i, j, _)| self.unknown_at(i, j).is_some()) {
            return Ok(corners
                .iter()
                .map(|&(i, j, w)| w * values[self.unknown_at(i, j).unwrap()])
                .sum());
        }
        // fallback: inverse-distance over whatever corners are available
        let mut num = 0.0;
        let mut den = 0.0;
        for &(i, j, _) in &corners {
            if let Some(u) = self.unknown_at(i, j) {
                let p = self.node(i, j);
                let d = (x - &p).norm().max(1e-12);
                num += values[u] / d;
                den += 1.0 / d;
            }
        }
        if den == 0.0 {
            return Err(Error::Geometry("no in-region nodes near interpolation point".into()));
        }
        Ok(num / den)
    }
}

/// Locates the boundary crossing on the segment [p, q] (p in region, q not)
/// and classifies which boundary was hit.
fn cut_link(
    inner: &DomainDescriptor,
    outer: &DomainDescriptor,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<Link> {
    // region indicator phi < 0 inside the annulus
    let phi = |x: &DVector<f64>| (-inner.g(x)).max(outer.g(x));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if phi(p) >= 0.0 {
        return Err(Error::Geometry("cut link must start inside the region".into()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let x = p + (q - p) * mid;
        if phi(&x) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let x = p + (q - p) * theta;
    let boundary = if inner.g(&x).abs() < outer.g(&x).abs() {
        Boundary::Inner
    } else {
        Boundary::Outer { angle: outer.param_of(&x)? }
    };
    Ok(Link::Cut { theta: theta.max(THETA_FLOOR), boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainDescriptor;

    #[test]
    fn grid_classifies_annulus_between_disks() {
        let inner = DomainDescriptor::ball(vec![0.0, 0.0], 1.0);
        let outer = DomainDescriptor::ball(vec![0.0, 0.0], 2.0);
        let grid = AnnularGrid::build(&inner, &outer, 64).unwrap();
        // area ratio: pi(4 - 1) / (4.08)^2 of the bounding square
        let frac = grid.n_unknowns() as f64 / (64.0 * 64.0);
        let expect = std::f64::consts::PI * 3.0 / (4.08f64 * 4.08);
        assert!((frac - expect).abs() < 0.02, "fraction {} vs {}", frac, expect);
        // every unknown has four sane links
        for links in &grid.links {
            for l in links {
                if let Link::Cut { theta, .. } = l {
                    assert!(*theta > 0.0 && *theta <= 1.0);
                }
            }
        }
    }

    #[test]
    fn no_node_sits_on_the_axes() {
        let inner = DomainDescriptor::ball(vec![0.0, 0.0], 1.0);
        let outer = DomainDescriptor::ball(vec![0.0, 0.0], 2.0);
        let grid = AnnularGrid::build(&inner, &outer, 128).unwrap();
        for &(i, j) in &grid.unknowns {
            let p = grid.node(i, j);
            assert!(p[0].abs() > 1e-9 && p[1].abs() > 1e-9);
        }
    }
}
