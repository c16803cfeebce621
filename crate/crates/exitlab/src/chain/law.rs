//! Exact law of the staircase stopping time.
//!
//! The pair (chain state, lambda) leaves the alive region when lambda passes
//! the current state's deadline. Sorting the distinct deadlines splits
//! [0, max deadline] into intervals; on each interval the generator restricted
//! to alive states governs the survival vector, mass flowing into expired
//! states is absorbed continuously, and each deadline deposits an atom equal
//! to the probability of sitting in the expiring state at that moment.

use crate::chain::expm::{expm_apply, expm_integral};
use crate::error::{Error, Result};
use crate::model::ChainSpec;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

const TIE_TOL: f64 = 1e-12;

/// Point mass of the law, possibly aggregating several tied states.
#[derive(Debug, Clone, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
    /// (state, mass) contributions, one per expiring state.
    pub per_state: Vec<(usize, f64)>,
}

/// One inter-deadline interval of the law.
#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// States still alive on this interval.
    pub alive: Vec<usize>,
    /// CDF at `start` (right-continuous; includes an atom at `start`).
    pub cdf_start: f64,
    /// Continuous mass absorbed on (start, end).
    pub absorbed: f64,
    /// Continuous mass by receiving (= exit) state.
    pub absorbed_by_state: Vec<(usize, f64)>,
    /// Exact CDF snapshots on [start, end]; the last entry is the left limit
    /// at `end`, before any atom there.
    pub grid: Vec<(f64, f64)>,
}

/// Exact mixed law of (sigma, exit state).
#[derive(Debug, Clone, Serialize)]
pub struct SigmaLaw {
    /// Per-state deadlines after tie merging.
    pub deadlines: Vec<f64>,
    pub atoms: Vec<Atom>,
    pub segments: Vec<Segment>,
    pub exit_state_probs: Vec<f64>,
    pub support: (f64, f64),
    /// Atoms plus integrated density; 1 up to roundoff.
    pub total_mass: f64,
    pub merged_ties: bool,
}

/// Snapshots per interval for CDF interpolation; keeps the interpolation
/// error below 1e-6 for unit-scale rates.
pub const DEFAULT_GRID_POINTS: usize = 256;

pub fn sigma_law(chain: &ChainSpec, deadlines: &[f64]) -> Result<SigmaLaw> {
    sigma_law_with_grid(chain, deadlines, DEFAULT_GRID_POINTS)
}

pub fn sigma_law_with_grid(
    chain: &ChainSpec,
    deadlines: &[f64],
    grid_points: usize,
) -> Result<SigmaLaw> {
    chain.validate()?;
    let s = chain.n_states();
    if deadlines.len() != s {
        return Err(Error::InvalidInput("need one deadline per state".into()));
    }
    if deadlines.iter().any(|m| !m.is_finite() || *m <= 0.0) {
        return Err(Error::InvalidInput("deadlines must be positive and finite".into()));
    }

    // Cluster deadlines within the tie tolerance; every state in a cluster
    // shares the representative location.
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| deadlines[a].total_cmp(&deadlines[b]));
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut merged_ties = false;
    for &k in &order {
        match clusters.last_mut() {
            Some((loc, members)) if (deadlines[k] - *loc).abs() <= TIE_TOL => {
                members.push(k);
                merged_ties = true;
            }
            _ => clusters.push((deadlines[k], vec![k])),
        }
    }
    let mut merged = vec![0.0; s];
    for (loc, members) in &clusters {
        for &k in members {
            merged[k] = *loc;
        }
    }

    let q = chain.generator_matrix();
    let mut alive: Vec<usize> = (0..s).collect();
    let mut v_alive = DVector::from_vec(chain.initial.clone());
    let mut atoms = Vec::new();
    let mut segments = Vec::new();
    let mut exit_probs = vec![0.0; s];
    let mut cdf_running = 0.0;
    let mut prev = 0.0;

    for (loc, members) in &clusters {
        let n_alive = alive.len();
        let len = loc - prev;
        // transposed sub-generator: d/dlambda v = L v with leakage into dead states
        let l_sub = DMatrix::from_fn(n_alive, n_alive, |i, j| q[(alive[j], alive[i])]);
        let v_end = expm_apply(&l_sub, len, &v_alive);
        let v_int = expm_integral(&l_sub, len) * &v_alive;

        // continuous absorption into already-dead states
        let mut absorbed_by_state = Vec::new();
        let mut absorbed = 0.0;
        for j in 0..s {
            if alive.contains(&j) {
                continue;
            }
            let mass: f64 = (0..n_alive).map(|a| v_int[a] * q[(alive[a], j)]).sum();
            if mass != 0.0 {
                exit_probs[j] += mass;
                absorbed += mass;
                absorbed_by_state.push((j, mass));
            }
        }

        // exact CDF snapshots: F(lambda) = 1 - total surviving mass
        let survived_elsewhere = 1.0 - cdf_running - v_alive.sum();
        let mut grid = Vec::with_capacity(grid_points.max(2));
        let steps = grid_points.max(2) - 1;
        for g in 0..=steps {
            let t = len * g as f64 / steps as f64;
            let v_t = if g == 0 {
                v_alive.clone()
            } else if g == steps {
                v_end.clone()
            } else {
                expm_apply(&l_sub, t, &v_alive)
            };
            let f = 1.0 - v_t.sum() - survived_elsewhere;
            grid.push((prev + t, f));
        }

        segments.push(Segment {
            start: prev,
            end: *loc,
            alive: alive.clone(),
            cdf_start: cdf_running,
            absorbed,
            absorbed_by_state,
            grid,
        });
        cdf_running += absorbed;

        // atom: expiring states deposit their remaining mass
        let mut per_state = Vec::new();
        let mut mass = 0.0;
        for &k in members {
            let idx = alive.iter().position(|&a| a == k).expect("expiring state is alive");
            let m_k = v_end[idx];
            exit_probs[k] += m_k;
            mass += m_k;
            per_state.push((k, m_k));
        }
        atoms.push(Atom { location: *loc, mass, per_state });
        cdf_running += mass;

        // shrink the alive set
        let keep: Vec<usize> = (0..n_alive).filter(|&i| !members.contains(&alive[i])).collect();
        v_alive = DVector::from_fn(keep.len(), |i, _| v_end[keep[i]]);
        alive = keep.iter().map(|&i| alive[i]).collect();
        prev = *loc;
    }

    let total_mass: f64 =
        atoms.iter().map(|a| a.mass).sum::<f64>() + segments.iter().map(|s| s.absorbed).sum::<f64>();
    let support = (clusters.first().unwrap().0, clusters.last().unwrap().0);

    Ok(SigmaLaw {
        deadlines: merged,
        atoms,
        segments,
        exit_state_probs: exit_probs,
        support,
        total_mass,
        merged_ties,
    })
}

impl SigmaLaw {
    /// Right-continuous CDF. Exact at segment endpoints and atoms; linear
    /// interpolation of exact snapshots in between (error <= 1e-6 at the
    /// default grid for unit-scale rates).
    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda < self.segments[0].start {
            return 0.0;
        }
        if lambda >= self.support.1 {
            return 1.0;
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.end <= lambda)
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        let grid = &seg.grid;
        let j = grid.partition_point(|&(x, _)| x <= lambda);
        if j == 0 {
            return grid[0].1;
        }
        if j >= grid.len() {
            return grid[grid.len() - 1].1;
        }
        let (x0, f0) = grid[j - 1];
        let (x1, f1) = grid[j];
        if x1 <= x0 {
            return f0;
        }
        f0 + (f1 - f0) * (lambda - x0) / (x1 - x0)
    }

    /// Left limit of the CDF.
    pub fn cdf_left(&self, lambda: f64) -> f64 {
        self.cdf(lambda) - self.atom_mass_at(lambda)
    }

    pub fn atom_mass_at(&self, lambda: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.location == lambda)
            .map(|a| a.mass)
            .unwrap_or(0.0)
    }

    /// Flattened (lambda, cdf) overlay across all segments plus the final 1.
    pub fn cdf_overlay(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for seg in &self.segments {
            out.extend(seg.grid.iter().copied());
        }
        out.push((self.support.1, 1.0));
        out
    }
}
