//! Boundary minimization of the quasipotential: coarse parameter scan
//! followed by golden-section refinement, with a diagnostic for near-ties.

use crate::action::gmam::{quasipotential_with, GmamOptions};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct BoundaryMinOptions {
    pub n_coarse: usize,
    pub golden_iterations: usize,
    pub gmam: GmamOptions,
    /// Values within this of the minimum count as ties.
    pub tie_value_tol: f64,
    /// Ties separated by more than this chord distance raise the ambiguity flag.
    pub tie_separation: f64,
}

impl Default for BoundaryMinOptions {
    fn default() -> Self {
        BoundaryMinOptions {
            n_coarse: 64,
            golden_iterations: 32,
            gmam: GmamOptions::default(),
            tie_value_tol: 1e-3,
            tie_separation: 0.05,
        }
    }
}

/// A competing near-minimal boundary point far from the minimizer.
#[derive(Debug, Clone, Serialize)]
pub struct Ambiguity {
    pub competitor_param: f64,
    pub competitor_value: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryMinimum {
    /// M, the boundary minimum of the quasipotential.
    pub value: f64,
    pub param: f64,
    pub point: Vec<f64>,
    /// Present when the single-minimizer assumption looks at risk.
    pub ambiguity: Option<Ambiguity>,
}

impl BoundaryMinimum {
    pub fn point_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.point.clone())
    }
}

pub fn boundary_min(model: &ModelSpec, lambda: f64, state: usize) -> Result<BoundaryMinimum> {
    boundary_min_with(model, lambda, state, &BoundaryMinOptions::default())
}

pub fn boundary_min_with(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    opts: &BoundaryMinOptions,
) -> Result<BoundaryMinimum> {
    if !model.domain.has_parametrization() {
        return Err(Error::Geometry(
            "boundary minimization needs a parametrized boundary (d = 2)".into(),
        ));
    }
    let n = opts.n_coarse.max(8);
    let value_at = |theta: f64| -> Result<f64> {
        let (x, _) = model.domain.boundary_point(theta)?;
        Ok(quasipotential_with(model, &x, lambda, state, &opts.gmam)?.value)
    };

    let coarse: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let theta = std::f64::consts::TAU * i as f64 / n as f64;
            value_at(theta).map(|v| (theta, v))
        })
        .collect::<Result<_>>()?;

    let (best_idx, &(best_theta, best_value)) = coarse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty scan");

    // golden-section refinement on the bracket around the best coarse sample
    let spacing = std::f64::consts::TAU / n as f64;
    let (mut a, mut b) = (best_theta - spacing, best_theta + spacing);
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let (mut x1, mut x2) = (a + phi * (b - a), b - phi * (b - a));
    let (mut f1, mut f2) = (value_at(x1)?, value_at(x2)?);
    for _ in 0..opts.golden_iterations {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + phi * (b - a);
            f1 = value_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - phi * (b - a);
            f2 = value_at(x2)?;
        }
    }
    let (mut theta_min, mut value_min) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if best_value < value_min {
        theta_min = best_theta;
        value_min = best_value;
    }
    theta_min = theta_min.rem_euclid(std::f64::consts::TAU);
    let (point, _) = model.domain.boundary_point(theta_min)?;

    if value_min <= 0.0 {
        return Err(Error::Numerical(format!(
            "boundary minimum of the quasipotential is {:.3e}, expected positive",
            value_min
        )));
    }

    // Near-tie diagnostic over the coarse scan. Only cyclic local minima of
    // the profile count as competitors: a flat but unique minimum basin must
    // not trip the flag, a genuinely separate basin must.
    let mut ambiguity: Option<Ambiguity> = None;
    for (i, &(theta, v)) in coarse.iter().enumerate() {
        if i == best_idx {
            continue;
        }
        let prev = coarse[(i + n - 1) % n].1;
        let next = coarse[(i + 1) % n].1;
        if v > prev || v > next {
            continue;
        }
        if v <= value_min + opts.tie_value_tol {
            let (xi, _) = model.domain.boundary_point(theta)?;
            let separation = (&xi - &point).norm();
            if separation > opts.tie_separation {
                let better = ambiguity
                    .as_ref()
                    .map(|amb| v < amb.competitor_value)
                    .unwrap_or(true);
                if better {
                    ambiguity = Some(Ambiguity {
                        competitor_param: theta,
                        competitor_value: v,
                        separation,
                    });
                }
            }
        }
    }

    Ok(BoundaryMinimum {
        value: value_min,
        param: theta_min,
        point: point.iter().copied().collect(),
        ambiguity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn symmetric_model_flags_ambiguity() {
        // rotationally symmetric: V constant on the boundary, minimizer not unique
        let (model, _) = presets::frozen_unit();
        let m = boundary_min(&model, 0.0, 0).unwrap();
        assert!((m.value - 1.0).abs() < 0.02, "M = {}", m.value);
        assert!(m.ambiguity.is_some(), "rotational symmetry must trip the tie check");
    }

    #[test]
    fn offcenter_minimum_at_nearest_boundary_point() {
        let (model, _) = presets::offcenter_m032();
        let m = boundary_min(&model, 0.0, 0).unwrap();
        assert!((m.value - 0.32).abs() < 3e-3, "M = {}", m.value);
        assert!((m.point[0] - 1.0).abs() < 1e-2 && m.point[1].abs() < 5e-2, "x = {:?}", m.point);
        assert!(m.ambiguity.is_none());
    }

    #[test]
    fn dense_scan_oracle_agrees_on_offcenter_model() {
        // oracle: V = 0.5 |x - O|^2 on the boundary, minimized by dense scan
        let (model, _) = presets::offcenter_m032();
        let mut best = f64::INFINITY;
        let mut best_theta = 0.0;
        for i in 0..4096 {
            let theta = std::f64::consts::TAU * i as f64 / 4096.0;
            let (x, _) = model.domain.boundary_point(theta).unwrap();
            let d = &x - &model.equilibrium;
            let v = 0.5 * d.norm_squared();
            if v < best {
                best = v;
                best_theta = theta;
            }
        }
        assert!((best - 0.32).abs() < 1e-6);
        let m = boundary_min(&model, 0.0, 0).unwrap();
        let gap = (m.param - best_theta).abs().min(std::f64::consts::TAU - (m.param - best_theta).abs());
        assert!(gap < 0.02, "param {} vs oracle {}", m.param, best_theta);
    }
}
