//! Shipped example models used by tests and as CLI starting points.

use crate::error::Result;
use crate::model::config::{CoefficientRegistry, ModelConfig};
use crate::model::spec::ModelSpec;
use serde_json::json;

fn build(cfg: serde_json::Value) -> Result<(ModelSpec, ModelConfig)> {
    let cfg: ModelConfig = serde_json::from_value(cfg)?;
    let model = CoefficientRegistry::default().build(&cfg)?;
    Ok((model, cfg))
}

/// Single state, b = -0.6 exp(-lambda) x on the unit disk. The root of
/// M(lambda) = lambda sits near 0.4016.
pub fn radial_decay_unit_disk() -> (ModelSpec, ModelConfig) {
    build(json!({
        "dimension": 2,
        "states": 1,
        "drift": {"kind": "radial_decay", "beta0": 0.6, "rate": 1.0},
        "sigma": "identity",
        "domain": {"kind": "ball", "radius": 1.0, "center": [0.0, 0.0]},
        "O": [0.0, 0.0],
        "c": 0.2,
        "r": 0.5,
        "Q": [0.0],
        "pi0": [1.0],
        "Lambda": 1.0,
        "ellipticity": [1.0, 1.0],
        "drift_bound": 1.0
    }))
    .expect("preset must build")
}

/// Single state, b = -0.5 (x - (0.2, 0)) on the unit disk: M = 0.32 constant
/// in lambda, unique exit point (1, 0).
pub fn offcenter_m032() -> (ModelSpec, ModelConfig) {
    build(json!({
        "dimension": 2,
        "states": 1,
        "drift": {"kind": "quadratic_well", "ax": 1.0, "ay": 1.0, "scale": 0.5},
        "sigma": "identity",
        "domain": {"kind": "ball", "radius": 1.0, "center": [0.0, 0.0]},
        "O": [0.2, 0.0],
        "c": 0.3,
        "r": 0.4,
        "Q": [0.0],
        "pi0": [1.0],
        "Lambda": 0.9,
        "ellipticity": [1.0, 1.0],
        "drift_bound": 1.0
    }))
    .expect("preset must build")
}

/// Single state with the boundary minimum calibrated to 0.5; exit at (1, 0).
pub fn offcenter_m05() -> (ModelSpec, ModelConfig) {
    build(json!({
        "dimension": 2,
        "states": 1,
        "drift": {"kind": "quadratic_well", "ax": 1.0, "ay": 1.0, "boundary_min_target": 0.5},
        "sigma": "identity",
        "domain": {"kind": "ball", "radius": 1.0, "center": [0.2, 0.0]},
        "O": [0.2, 0.0],
        "c": 0.3,
        "r": 0.4,
        "Q": [0.0],
        "pi0": [1.0],
        "Lambda": 0.8,
        "ellipticity": [1.0, 1.0],
        "drift_bound": 2.0
    }))
    .expect("preset must build")
}

/// Rotationally symmetric reference: b = -x on the unit disk, M = 1.
/// Used for frozen-coefficient asymptotics; the exit point is not unique.
pub fn frozen_unit() -> (ModelSpec, ModelConfig) {
    build(json!({
        "dimension": 2,
        "states": 1,
        "drift": {"kind": "radial_decay", "beta0": 1.0, "rate": 0.0},
        "sigma": "identity",
        "domain": {"kind": "ball", "radius": 1.0, "center": [0.0, 0.0]},
        "O": [0.0, 0.0],
        "c": 0.5,
        "r": 0.5,
        "Q": [0.0],
        "pi0": [1.0],
        "Lambda": 1.6,
        "ellipticity": [1.0, 1.0],
        "drift_bound": 1.5
    }))
    .expect("preset must build")
}

/// Two-state modulated model engineered for boundary minima (0.3, 0.6).
///
/// State 1 confines weakly in x and strongly in y, exiting near theta = 0.16;
/// state 2 is the mirror through y = x, exiting near theta = 1.4. The common
/// equilibrium (0.15, 0.15) breaks both reflection symmetries so each state
/// has a unique, well-separated boundary minimizer.
pub fn two_state_modulated() -> (ModelSpec, ModelConfig) {
    build(json!({
        "dimension": 2,
        "states": 2,
        "drift": {
            "kind": "quadratic_well",
            "ax": [1.0, 10.0],
            "ay": [10.0, 1.0],
            "boundary_min_target": [0.3, 0.6]
        },
        "sigma": "identity",
        "domain": {"kind": "ball", "radius": 1.0, "center": [0.0, 0.0]},
        "O": [0.15, 0.15],
        "c": 0.25,
        "r": 0.35,
        "Q": [-1.0, 1.0, 1.0, -1.0],
        "pi0": [1.0, 0.0],
        "Lambda": 1.0,
        "ellipticity": [1.0, 1.0],
        "drift_bound": 15.0
    }))
    .expect("preset must build")
}

/// Every shipped model by name; used by tests that sweep the catalogue.
pub fn all_presets() -> Vec<(&'static str, ModelSpec, ModelConfig)> {
    let mut out = Vec::new();
    for (name, (m, c)) in [
        ("radial_decay_unit_disk", radial_decay_unit_disk()),
        ("offcenter_m032", offcenter_m032()),
        ("offcenter_m05", offcenter_m05()),
        ("frozen_unit", frozen_unit()),
        ("two_state_modulated", two_state_modulated()),
    ] {
        out.push((name, m, c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::checks;

    #[test]
    fn all_presets_pass_assumption_checks() {
        for (name, model, _) in all_presets() {
            let inward = checks::check_inward_drift(&model, 200, 50).unwrap();
            assert!(inward.pass, "{}: inward drift worst {:.4}", name, inward.worst);
            let conf = checks::check_equilibrium_confinement(&model, 200).unwrap();
            assert!(conf.pass, "{}: confinement slack {:.3e}", name, conf.worst);
            let attract =
                checks::check_attraction_time(&model, 25, &[0.0, 0.5 * model.horizon, model.horizon])
                    .unwrap();
            assert!(attract.pass, "{}: entry time {:.3}", name, attract.worst);
        }
    }

    #[test]
    fn drift_vanishes_at_equilibrium_for_all_presets() {
        for (name, model, _) in all_presets() {
            model
                .check_equilibrium_zero(100)
                .unwrap_or_else(|e| panic!("{}: {}", name, e));
        }
    }
}
