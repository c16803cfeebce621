//! Composition of the per-state root solves with the exact stopping-time law.

use crate::action::{
    default_lambda_grid, exit_point_with, solve_m_with, BoundaryMinOptions, ExitPointResult,
    RootResult,
};
use crate::chain::{sigma_law, SigmaLaw};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct PredictOptions {
    pub lambda_grid_points: usize,
    pub boundary: BoundaryMinOptions,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions { lambda_grid_points: 32, boundary: BoundaryMinOptions::default() }
    }
}

/// Deterministic prediction for one model: per-state deadlines and exit
/// points, the law of the stopping time, and the induced exit-point law.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub roots: Vec<RootResult>,
    pub exit_points: Vec<ExitPointResult>,
    pub law: SigmaLaw,
    /// Per state: predicted exit location and its probability mass.
    pub exit_point_law: Vec<(Vec<f64>, f64)>,
}

impl Prediction {
    pub fn deadlines(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.root).collect()
    }
}

pub fn predict(model: &ModelSpec) -> Result<Prediction> {
    predict_with(model, &PredictOptions::default())
}

pub fn predict_with(model: &ModelSpec, opts: &PredictOptions) -> Result<Prediction> {
    let grid = default_lambda_grid(model.horizon, opts.lambda_grid_points.max(2));
    let mut roots = Vec::with_capacity(model.n_states);
    let mut exit_points = Vec::with_capacity(model.n_states);
    for state in 0..model.n_states {
        let root = solve_m_with(model, state, &grid, &opts.boundary)?;
        let xp = exit_point_with(model, &root, &opts.boundary)?;
        roots.push(root);
        exit_points.push(xp);
    }
    let deadlines: Vec<f64> = roots.iter().map(|r| r.root).collect();
    let law = sigma_law(&model.chain, &deadlines)?;
    if (law.total_mass - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "stopping-time law mass {:.12} is not 1",
            law.total_mass
        )));
    }
    let exit_point_law: Vec<(Vec<f64>, f64)> = exit_points
        .iter()
        .map(|xp| (xp.point.clone(), law.exit_state_probs[xp.state]))
        .collect();
    Ok(Prediction { roots, exit_points, law, exit_point_law })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn single_state_prediction_is_one_atom_at_the_root() {
        let (model, _) = presets::offcenter_m032();
        let p = predict(&model).unwrap();
        assert_eq!(p.roots.len(), 1);
        assert!((p.roots[0].root - 0.32).abs() < 2e-3);
        assert!((p.exit_points[0].point[0] - 1.0).abs() < 1e-2);
        assert_eq!(p.law.atoms.len(), 1);
        assert!((p.law.atoms[0].mass - 1.0).abs() < 1e-12);
        let mass: f64 = p.exit_point_law.iter().map(|(_, m)| m).sum();
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn symmetric_model_propagates_ambiguity_error() {
        let (model, _) = presets::frozen_unit();
        assert!(matches!(
            predict(&model),
            Err(Error::AmbiguousMinimizer { .. })
        ));
    }

    #[test]
    fn predict_is_deterministic() {
        let (model, _) = presets::offcenter_m032();
        let a = predict(&model).unwrap();
        let b = predict(&model).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
