//! The root equation M(lambda) = lambda and the exit point it selects.

use crate::action::boundary::{boundary_min_with, BoundaryMinOptions, BoundaryMinimum};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

const ROOT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub m_value: f64,
    pub param: f64,
    pub point: Vec<f64>,
    pub ambiguous: bool,
}

/// Root of M(lambda) = lambda for one state together with the boundary
/// minimizer at the root and the sampled profile.
#[derive(Debug, Clone, Serialize)]
pub struct RootResult {
    pub state: usize,
    pub root: f64,
    pub minimizer_param: f64,
    pub minimizer: Vec<f64>,
    pub profile: Vec<ProfilePoint>,
    pub ambiguous_at_root: bool,
}

impl RootResult {
    pub fn minimizer_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.minimizer.clone())
    }
}

pub fn default_lambda_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
}

pub fn solve_m(model: &ModelSpec, state: usize, lambda_grid: &[f64]) -> Result<RootResult> {
    solve_m_with(model, state, lambda_grid, &BoundaryMinOptions::default())
}

pub fn solve_m_with(
    model: &ModelSpec,
    state: usize,
    lambda_grid: &[f64],
    opts: &BoundaryMinOptions,
) -> Result<RootResult> {
    if lambda_grid.len() < 2 {
        return Err(Error::InvalidInput("lambda grid needs at least two points".into()));
    }
    for w in lambda_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput("lambda grid must be strictly increasing".into()));
        }
    }
    if lambda_grid[0] < 0.0 || *lambda_grid.last().unwrap() > model.horizon {
        return Err(Error::InvalidInput("lambda grid must sit inside [0, horizon]".into()));
    }

    let minima: Vec<BoundaryMinimum> = lambda_grid
        .par_iter()
        .map(|&lambda| boundary_min_with(model, lambda, state, opts))
        .collect::<Result<_>>()?;

    let profile: Vec<ProfilePoint> = lambda_grid
        .iter()
        .zip(&minima)
        .map(|(&lambda, m)| ProfilePoint {
            lambda,
            m_value: m.value,
            param: m.param,
            point: m.point.clone(),
            ambiguous: m.ambiguity.is_some(),
        })
        .collect();

    if minima[0].value - lambda_grid[0] <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "M at the grid start must exceed lambda; got M = {:.4} at lambda = {:.4}",
            minima[0].value, lambda_grid[0]
        )));
    }

    // exactly one sign change of f = M - lambda
    let f: Vec<f64> = profile.iter().map(|p| p.m_value - p.lambda).collect();
    let mut brackets = Vec::new();
    for i in 0..f.len() - 1 {
        if f[i] > 0.0 && f[i + 1] <= 0.0 || f[i] < 0.0 && f[i + 1] >= 0.0 {
            brackets.push(i);
        }
    }
    match brackets.len() {
        0 => return Err(Error::NoRoot),
        1 => {}
        k => return Err(Error::MultipleRoots(k)),
    }

    let i = brackets[0];
    let (mut lo, mut hi) = (lambda_grid[i], lambda_grid[i + 1]);
    let mut f_lo = f[i];
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let m_mid = boundary_min_with(model, mid, state, opts)?;
        let f_mid = m_mid.value - mid;
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let at_root = boundary_min_with(model, root, state, opts)?;

    Ok(RootResult {
        state,
        root,
        minimizer_param: at_root.param,
        minimizer: at_root.point.clone(),
        profile,
        ambiguous_at_root: at_root.ambiguity.is_some(),
    })
}

/// Exit point for one state: the unique boundary minimizer at the root,
/// plus the minimizer trajectory on a small window around the root to expose
/// its continuity. Errors when the minimizer is ambiguous at the root.
#[derive(Debug, Clone, Serialize)]
pub struct ExitPointResult {
    pub state: usize,
    pub point: Vec<f64>,
    pub param: f64,
    /// (lambda, minimizer) on a window around the root.
    pub window: Vec<(f64, Vec<f64>)>,
}

impl ExitPointResult {
    pub fn point_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.point.clone())
    }
}

pub fn exit_point(model: &ModelSpec, root: &RootResult) -> Result<ExitPointResult> {
    exit_point_with(model, root, &BoundaryMinOptions::default())
}

pub fn exit_point_with(
    model: &ModelSpec,
    root: &RootResult,
    opts: &BoundaryMinOptions,
) -> Result<ExitPointResult> {
    let at_root = boundary_min_with(model, root.root, root.state, opts)?;
    if let Some(amb) = &at_root.ambiguity {
        return Err(Error::AmbiguousMinimizer {
            tol: opts.tie_value_tol,
            separation: amb.separation,
        });
    }
    let mut window = Vec::new();
    for offset in [-0.04, -0.02, 0.0, 0.02, 0.04] {
        let lambda = root.root + offset;
        if lambda <= 0.0 || lambda >= model.horizon {
            continue;
        }
        let m = boundary_min_with(model, lambda, root.state, opts)?;
        window.push((lambda, m.point.clone()));
    }
    Ok(ExitPointResult {
        state: root.state,
        point: at_root.point.clone(),
        param: at_root.param,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    /// Scalar bisection oracle for 0.6 exp(-lambda) = lambda, to 1e-10.
    fn radial_decay_root_oracle() -> f64 {
        let f = |l: f64| 0.6 * (-l).exp() - l;
        let (mut a, mut b) = (0.0f64, 1.0f64);
        assert!(f(a) > 0.0 && f(b) < 0.0);
        while b - a > 1e-10 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn constant_profile_root_is_fixed_point() {
        // M == 0.32: the root of M(lambda) = lambda is 0.32
        let (model, _) = presets::offcenter_m032();
        let grid = default_lambda_grid(model.horizon, 16);
        let r = solve_m(&model, 0, &grid).unwrap();
        assert!((r.root - 0.32).abs() < 2e-3, "root = {}", r.root);
        assert!(!r.ambiguous_at_root);
    }

    #[test]
    fn radial_decay_root_matches_scalar_oracle() {
        let oracle = radial_decay_root_oracle();
        assert!((oracle - 0.4016).abs() < 1e-3, "oracle sanity: {}", oracle);
        let (model, _) = presets::radial_decay_unit_disk();
        let grid = default_lambda_grid(model.horizon, 16);
        let r = solve_m(&model, 0, &grid).unwrap();
        assert!((r.root - oracle).abs() < 1e-3, "root = {} vs oracle {}", r.root, oracle);
    }

    #[test]
    fn grid_above_diagonal_reports_no_root() {
        // M == 0.32 but the grid stops at 0.25: no sign change
        let (model, _) = presets::offcenter_m032();
        let grid = default_lambda_grid(0.25, 8);
        match solve_m(&model, 0, &grid) {
            Err(Error::NoRoot) => {}
            other => panic!("expected NoRoot, got {:?}", other.map(|r| r.root)),
        }
    }

    #[test]
    fn exit_point_unique_for_offcenter_model() {
        let (model, _) = presets::offcenter_m032();
        let grid = default_lambda_grid(model.horizon, 16);
        let r = solve_m(&model, 0, &grid).unwrap();
        let xp = exit_point(&model, &r).unwrap();
        assert!((xp.point[0] - 1.0).abs() < 1e-2 && xp.point[1].abs() < 5e-2);
        // minimizer is constant in lambda here, so the window is flat
        for (_, p) in &xp.window {
            assert!((p[0] - xp.point[0]).abs() < 2e-2);
        }
    }

    #[test]
    fn symmetric_model_errors_on_exit_point() {
        let (model, _) = presets::frozen_unit();
        let grid = default_lambda_grid(1.5, 16);
        let r = solve_m(&model, 0, &grid).unwrap();
        assert!((r.root - 1.0).abs() < 2e-2);
        match exit_point(&model, &r) {
            Err(Error::AmbiguousMinimizer { .. }) => {}
            other => panic!("expected ambiguity error, got {:?}", other.map(|e| e.point)),
        }
    }

    #[test]
    fn ellipse_short_axis_pair_is_ambiguous() {
        // V = 0.5 |x|^2 on the ellipse x^2/4 + y^2 = 1: minima at (0, +-1)
        use crate::model::{CoefficientRegistry, ModelConfig};
        let cfg: ModelConfig = serde_json::from_value(serde_json::json!({
            "dimension": 2,
            "states": 1,
            "drift": {"kind": "quadratic_well", "ax": 1.0, "ay": 1.0, "scale": 0.5},
            "sigma": "identity",
            "domain": {"kind": "ellipse", "semi_x": 2.0, "semi_y": 1.0, "center": [0.0, 0.0]},
            "O": [0.0, 0.0],
            "c": 0.2,
            "r": 0.4,
            "Q": [0.0],
            "pi0": [1.0],
            "Lambda": 0.9,
            "drift_bound": 2.0
        }))
        .unwrap();
        let model = CoefficientRegistry::default().build(&cfg).unwrap();

        // dense-scan oracle on the analytic V confirms the two minimizers
        let mut best = f64::INFINITY;
        for i in 0..2048 {
            let theta = std::f64::consts::TAU * i as f64 / 2048.0;
            let (x, _) = model.domain.boundary_point(theta).unwrap();
            best = best.min(0.5 * x.norm_squared());
        }
        assert!((best - 0.5).abs() < 1e-6);

        let grid = default_lambda_grid(model.horizon, 12);
        let r = solve_m(&model, 0, &grid).unwrap();
        assert!((r.root - 0.5).abs() < 2e-3);
        assert!(matches!(
            exit_point(&model, &r),
            Err(Error::AmbiguousMinimizer { .. })
        ));
    }
}
