//! Numerical validation of the standing drift assumptions: inward drift on
//! the boundary, quadratic confinement near the equilibrium, and uniform
//! attraction of the frozen flows.

use crate::error::{Error, Result};
use crate::model::spec::ModelSpec;
use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

/// Outcome of one sampled assumption check.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub name: String,
    /// Worst sampled value of the tested quantity.
    pub worst: f64,
    /// Threshold the worst value was compared against.
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
}

/// Max over sampled boundary points, lambda values and states of <b, n>;
/// passes iff the maximum stays below -c.
pub fn check_inward_drift(
    model: &ModelSpec,
    n_boundary_samples: usize,
    n_lambda_samples: usize,
) -> Result<AssumptionReport> {
    if n_boundary_samples == 0 || n_lambda_samples == 0 {
        return Err(Error::InvalidInput("sample counts must be at least 1".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut samples = 0usize;
    for i in 0..n_boundary_samples {
        let theta = std::f64::consts::TAU * i as f64 / n_boundary_samples as f64;
        let (x, n) = model.domain.boundary_point(theta)?;
        for j in 0..n_lambda_samples {
            let lambda = model.horizon * j as f64 / (n_lambda_samples.max(2) - 1) as f64;
            for k in 0..model.n_states {
                let b = model.drift_at(&x, lambda, k);
                worst = worst.max(b.dot(&n));
                samples += 1;
            }
        }
    }
    Ok(AssumptionReport {
        name: "inward_drift".into(),
        worst,
        threshold: -model.confinement_c,
        pass: worst <= -model.confinement_c,
        samples,
    })
}

/// Samples x uniformly in the r-ball around O and checks
/// <b(x), x - O> <= -c |x - O|^2 everywhere sampled. The report's `worst`
/// is the max of <b, x-O> + c |x-O|^2 (nonpositive iff the assumption holds).
pub fn check_equilibrium_confinement(model: &ModelSpec, n_samples: usize) -> Result<AssumptionReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("sample counts must be at least 1".into()));
    }
    let mut rng = crate::seeds::trajectory_rng(0x5eed, 1, crate::seeds::Stream::Chain);
    let mut worst = f64::NEG_INFINITY;
    let d = model.dim;
    for _ in 0..n_samples {
        // Uniform in the ball: Gaussian direction, radius ~ r * U^(1/d).
        let mut dir = DVector::from_fn(d, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        let norm = dir.norm();
        if norm < 1e-12 {
            continue;
        }
        dir /= norm;
        let radius = model.confinement_r * rng.gen::<f64>().powf(1.0 / d as f64);
        let x = &model.equilibrium + dir * radius;
        let lambda = rng.gen_range(0.0..model.horizon);
        let k = rng.gen_range(0..model.n_states);
        let offset = &x - &model.equilibrium;
        let b = model.drift_at(&x, lambda, k);
        let slack = b.dot(&offset) + model.confinement_c * offset.norm_squared();
        worst = worst.max(slack);
    }
    Ok(AssumptionReport {
        name: "equilibrium_confinement".into(),
        worst,
        threshold: 0.0,
        pass: worst <= 1e-9,
        samples: n_samples,
    })
}

/// Integrates the frozen flows x' = b(x, lambda, k) from a grid of starting
/// points in the closed domain and requires entry into the r-ball around O
/// before time 1/c.
pub fn check_attraction_time(
    model: &ModelSpec,
    n_initial: usize,
    lambda_grid: &[f64],
) -> Result<AssumptionReport> {
    if n_initial == 0 || lambda_grid.is_empty() {
        return Err(Error::InvalidInput("need at least one start and one lambda".into()));
    }
    let deadline = 1.0 / model.confinement_c;
    let box_radius = 2.0 * model.domain.bounding_radius() + 1.0;
    let starts = starting_grid(model, n_initial);
    let mut worst = 0.0f64;
    let mut samples = 0usize;
    for x0 in &starts {
        for &lambda in lambda_grid {
            for k in 0..model.n_states {
                let entry = flow_entry_time(model, x0, lambda, k, deadline * 4.0, box_radius)?;
                worst = worst.max(entry);
                samples += 1;
            }
        }
    }
    Ok(AssumptionReport {
        name: "attraction_time".into(),
        worst,
        threshold: deadline,
        pass: worst < deadline,
        samples,
    })
}

/// RK4 integration of the frozen flow until the r-ball is entered.
/// Returns the entry time; errors if the trajectory leaves the bounding box.
fn flow_entry_time(
    model: &ModelSpec,
    x0: &DVector<f64>,
    lambda: f64,
    state: usize,
    t_max: f64,
    box_radius: f64,
) -> Result<f64> {
    let r = model.confinement_r;
    let mut x = x0.clone();
    let mut t = 0.0;
    let dt = 1e-3 / model.confinement_c.min(1.0);
    if (&x - &model.equilibrium).norm() <= r {
        return Ok(0.0);
    }
    while t < t_max {
        let k1 = model.drift_at(&x, lambda, state);
        let k2 = model.drift_at(&(&x + &k1 * (dt / 2.0)), lambda, state);
        let k3 = model.drift_at(&(&x + &k2 * (dt / 2.0)), lambda, state);
        let k4 = model.drift_at(&(&x + &k3 * dt), lambda, state);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t += dt;
        if x.norm() > box_radius {
            return Err(Error::NonAttraction);
        }
        if (&x - &model.equilibrium).norm() <= r {
            return Ok(t);
        }
    }
    Err(Error::NonAttraction)
}

/// Deterministic grid of points covering the closed domain.
fn starting_grid(model: &ModelSpec, n: usize) -> Vec<DVector<f64>> {
    let r = model.domain.bounding_radius();
    let per_axis = (n as f64).powf(1.0 / model.dim as f64).ceil() as usize;
    let mut pts = Vec::new();
    let mut idx = vec![0usize; model.dim];
    loop {
        let x = DVector::from_fn(model.dim, |i, _| {
            -r + 2.0 * r * (idx[i] as f64 + 0.5) / per_axis as f64
        });
        if model.domain.g(&x) <= 0.0 {
            pts.push(x);
        }
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] < per_axis {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == model.dim {
                // include boundary starts as well
                for i in 0..8.min(n) {
                    let theta = std::f64::consts::TAU * i as f64 / 8.0;
                    if let Ok((x, _)) = model.domain.boundary_point(theta) {
                        pts.push(x);
                    }
                }
                return pts;
            }
        }
    }
}

/// Boundary point and outward unit normal at a parameter value.
pub fn boundary_point(
    domain: &crate::model::domain::DomainDescriptor,
    param: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    domain.boundary_point(param)
}
