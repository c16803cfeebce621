//! JSON model configuration and the coefficient registry.
//!
//! Configurations name built-in coefficient families (`radial_decay`,
//! `quadratic_well`, `identity`); custom coefficients are registered in code
//! under a name the config refers to. State-dependent parameters accept either
//! a scalar (broadcast) or one value per state.

use crate::error::{Error, Result};
use crate::model::chain_spec::ChainSpec;
use crate::model::domain::{DomainConfig, DomainDescriptor};
use crate::model::spec::{DriftFn, ModelSpec, SigmaFn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dimension: usize,
    pub states: usize,
    pub drift: Value,
    pub sigma: Value,
    pub domain: DomainConfig,
    #[serde(rename = "O")]
    pub equilibrium: Vec<f64>,
    pub c: f64,
    pub r: f64,
    /// Generator, row-major, length states^2.
    #[serde(rename = "Q")]
    pub generator: Vec<f64>,
    pub pi0: Vec<f64>,
    #[serde(rename = "Lambda")]
    pub horizon: f64,
    #[serde(default)]
    pub ellipticity: Option<(f64, f64)>,
    #[serde(default)]
    pub drift_bound: Option<f64>,
    #[serde(default)]
    pub lipschitz_bound: Option<f64>,
}

impl ModelConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Context handed to coefficient builders.
pub struct CoeffContext {
    pub dim: usize,
    pub n_states: usize,
    pub equilibrium: DVector<f64>,
    pub domain: DomainDescriptor,
}

pub type DriftBuilder = Arc<dyn Fn(&Value, &CoeffContext) -> Result<DriftFn> + Send + Sync>;
pub type SigmaBuilder = Arc<dyn Fn(&Value, &CoeffContext) -> Result<SigmaFn> + Send + Sync>;

/// Named coefficient families available to configuration files.
pub struct CoefficientRegistry {
    drifts: BTreeMap<String, DriftBuilder>,
    sigmas: BTreeMap<String, SigmaBuilder>,
}

impl Default for CoefficientRegistry {
    fn default() -> Self {
        let mut reg = CoefficientRegistry { drifts: BTreeMap::new(), sigmas: BTreeMap::new() };
        reg.register_drift("radial_decay", Arc::new(build_radial_decay));
        reg.register_drift("quadratic_well", Arc::new(build_quadratic_well));
        reg.register_sigma("identity", Arc::new(build_identity_sigma));
        reg
    }
}

impl CoefficientRegistry {
    pub fn register_drift(&mut self, name: &str, builder: DriftBuilder) {
        self.drifts.insert(name.to_string(), builder);
    }

    pub fn register_sigma(&mut self, name: &str, builder: SigmaBuilder) {
        self.sigmas.insert(name.to_string(), builder);
    }

    pub fn build(&self, cfg: &ModelConfig) -> Result<ModelSpec> {
        let domain = DomainDescriptor::from_config(&cfg.domain)?;
        if domain.dim() != cfg.dimension {
            return Err(Error::InvalidInput("domain dimension disagrees with the model".into()));
        }
        let ctx = CoeffContext {
            dim: cfg.dimension,
            n_states: cfg.states,
            equilibrium: DVector::from_vec(cfg.equilibrium.clone()),
            domain: domain.clone(),
        };
        let drift = self.build_drift(&cfg.drift, &ctx)?;
        let sigma = self.build_sigma(&cfg.sigma, &ctx)?;
        let diffusion_is_constant = matches!(kind_of(&cfg.sigma).as_deref(), Ok("identity"));
        let chain = ChainSpec::from_row_major(&cfg.generator, cfg.states, cfg.pi0.clone())?;
        let model = ModelSpec {
            dim: cfg.dimension,
            n_states: cfg.states,
            drift,
            sigma,
            domain,
            equilibrium: DVector::from_vec(cfg.equilibrium.clone()),
            confinement_c: cfg.c,
            confinement_r: cfg.r,
            chain,
            horizon: cfg.horizon,
            ellipticity: cfg.ellipticity.unwrap_or((1e-6, 1e6)),
            drift_bound: cfg.drift_bound.unwrap_or(100.0),
            lipschitz_bound: cfg.lipschitz_bound,
            diffusion_is_constant,
        };
        model.validate()?;
        Ok(model)
    }

    fn build_drift(&self, spec: &Value, ctx: &CoeffContext) -> Result<DriftFn> {
        let kind = kind_of(spec)?;
        let builder = self
            .drifts
            .get(&kind)
            .ok_or_else(|| Error::InvalidInput(format!("unknown drift kind '{}'", kind)))?;
        builder(spec, ctx)
    }

    fn build_sigma(&self, spec: &Value, ctx: &CoeffContext) -> Result<SigmaFn> {
        let kind = kind_of(spec)?;
        let builder = self
            .sigmas
            .get(&kind)
            .ok_or_else(|| Error::InvalidInput(format!("unknown sigma kind '{}'", kind)))?;
        builder(spec, ctx)
    }
}

fn kind_of(spec: &Value) -> Result<String> {
    match spec {
        Value::String(s) => Ok(s.clone()),
        Value::Object(map) => map
            .get("kind")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Error::InvalidInput("coefficient spec needs a 'kind' field".into())),
        _ => Err(Error::InvalidInput("coefficient spec must be a string or object".into())),
    }
}

/// Scalar-or-array parameter, broadcast to one value per state.
fn per_state(spec: &Value, field: &str, n: usize, default: Option<f64>) -> Result<Vec<f64>> {
    let v = match spec.get(field) {
        None => {
            return default
                .map(|d| vec![d; n])
                .ok_or_else(|| Error::InvalidInput(format!("missing field '{}'", field)))
        }
        Some(v) => v,
    };
    match v {
        Value::Number(x) => Ok(vec![x.as_f64().unwrap(); n]),
        Value::Array(items) => {
            let vals: Option<Vec<f64>> = items.iter().map(Value::as_f64).collect();
            let vals = vals.ok_or_else(|| Error::InvalidInput(format!("non-numeric '{}'", field)))?;
            if vals.len() == n {
                Ok(vals)
            } else if vals.len() == 1 {
                Ok(vec![vals[0]; n])
            } else {
                Err(Error::InvalidInput(format!(
                    "field '{}' has {} entries for {} states",
                    field,
                    vals.len(),
                    n
                )))
            }
        }
        _ => Err(Error::InvalidInput(format!("field '{}' must be a number or array", field))),
    }
}

/// b(x, lambda, k) = -beta0_k exp(-rate_k lambda) (x - O).
fn build_radial_decay(spec: &Value, ctx: &CoeffContext) -> Result<DriftFn> {
    let beta0 = per_state(spec, "beta0", ctx.n_states, None)?;
    let rate = per_state(spec, "rate", ctx.n_states, Some(0.0))?;
    let center = ctx.equilibrium.clone();
    Ok(Arc::new(move |x, lambda, k| {
        let beta = beta0[k] * (-rate[k] * lambda).exp();
        (x - &center) * (-beta)
    }))
}

/// Gradient drift of an anisotropic quadratic well:
/// b = -scale_k exp(-rate_k lambda) diag(axes_k) (x - O).
///
/// When `boundary_min_target` is present instead of `scale`, the scale is
/// calibrated so that the boundary minimum of the lambda-0 quasipotential
/// scale_k (x-O)^T diag(axes_k) (x-O) equals the target (identity noise).
fn build_quadratic_well(spec: &Value, ctx: &CoeffContext) -> Result<DriftFn> {
    if ctx.dim != 2 {
        return Err(Error::InvalidInput("quadratic_well is 2-d".into()));
    }
    let ax = per_state(spec, "ax", ctx.n_states, Some(1.0))?;
    let ay = per_state(spec, "ay", ctx.n_states, Some(1.0))?;
    let rate = per_state(spec, "rate", ctx.n_states, Some(0.0))?;
    let scale = if spec.get("boundary_min_target").is_some() {
        let targets = per_state(spec, "boundary_min_target", ctx.n_states, None)?;
        let mut scales = Vec::with_capacity(ctx.n_states);
        for k in 0..ctx.n_states {
            let f_min = boundary_quadratic_min(&ctx.domain, &ctx.equilibrium, ax[k], ay[k])?;
            if f_min <= 0.0 {
                return Err(Error::InvalidInput("equilibrium sits on the boundary".into()));
            }
            scales.push(targets[k] / f_min);
        }
        scales
    } else {
        per_state(spec, "scale", ctx.n_states, None)?
    };
    let center = ctx.equilibrium.clone();
    Ok(Arc::new(move |x, lambda, k| {
        let decay = (-rate[k] * lambda).exp();
        let d = x - &center;
        DVector::from_vec(vec![
            -scale[k] * decay * ax[k] * d[0],
            -scale[k] * decay * ay[k] * d[1],
        ])
    }))
}

/// Dense scan plus golden-section refinement of
/// theta -> (x(theta)-O)^T diag(ax, ay) (x(theta)-O) over the boundary.
fn boundary_quadratic_min(
    domain: &DomainDescriptor,
    center: &DVector<f64>,
    ax: f64,
    ay: f64,
) -> Result<f64> {
    let f = |theta: f64| -> f64 {
        let (x, _) = domain.boundary_point(theta).expect("parametric boundary");
        let d = &x - center;
        ax * d[0] * d[0] + ay * d[1] * d[1]
    };
    let n = 256;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let v = f(std::f64::consts::TAU * i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let step = std::f64::consts::TAU / n as f64;
    let (mut a, mut b) = (best_i as f64 * step - step, best_i as f64 * step + step);
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let (mut x1, mut x2) = (a + phi * (b - a), b - phi * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - phi * (b - a);
            f2 = f(x2);
        }
    }
    Ok(f1.min(f2))
}

/// sigma = scale * I, so a = scale^2 I.
fn build_identity_sigma(spec: &Value, ctx: &CoeffContext) -> Result<SigmaFn> {
    let scale = match spec {
        Value::String(_) => 1.0,
        _ => spec.get("scale").and_then(Value::as_f64).unwrap_or(1.0),
    };
    let dim = ctx.dim;
    Ok(Arc::new(move |_x, _lambda, _k| DMatrix::identity(dim, dim) * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn radial_decay_config_builds() {
        let cfg: ModelConfig = serde_json::from_value(json!({
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
            "Lambda": 1.0
        }))
        .unwrap();
        let model = CoefficientRegistry::default().build(&cfg).unwrap();
        let x = DVector::from_vec(vec![0.5, 0.0]);
        let b = model.drift_at(&x, 1.0, 0);
        let expect = -0.6 * (-1.0f64).exp() * 0.5;
        assert!((b[0] - expect).abs() < 1e-14);
        assert!(b[1].abs() < 1e-14);
    }

    #[test]
    fn quadratic_well_calibrates_boundary_minimum() {
        let cfg: ModelConfig = serde_json::from_value(json!({
            "dimension": 2,
            "states": 1,
            "drift": {"kind": "quadratic_well", "ax": 1.0, "ay": 1.0, "boundary_min_target": 0.32},
            "sigma": "identity",
            "domain": {"kind": "ball", "radius": 1.0, "center": [0.0, 0.0]},
            "O": [0.2, 0.0],
            "c": 0.3,
            "r": 0.4,
            "Q": [0.0],
            "pi0": [1.0],
            "Lambda": 0.9
        }))
        .unwrap();
        let model = CoefficientRegistry::default().build(&cfg).unwrap();
        // nearest boundary point is (1, 0) at distance 0.8; scale = 0.32/0.64 = 0.5
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let b = model.drift_at(&x, 0.0, 0);
        assert!((b[0] + 0.5 * 0.8).abs() < 1e-9, "b = {:?}", b);
    }
}
