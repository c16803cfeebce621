//! Action functionals for frozen coefficients.
//!
//! The timed form is the midpoint discretization of
//! (1/2) int (phi' - b)^T a^{-1} (phi' - b) dt; the geometric form is the
//! free-time rewrite int (|y'|_a |b|_a - <y', b>_a) ds, invariant under
//! reparametrization of the curve.

use crate::action::path::{GeometricPath, TimedPath};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use nalgebra::{DMatrix, DVector};

/// Spatial step for coefficient derivatives inside the analytic gradient.
const COEFF_FD_STEP: f64 = 1e-5;
/// Below this weighted drift norm the |b|_a factor is treated as zero.
const DRIFT_NORM_FLOOR: f64 = 1e-12;

struct Coeffs {
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
}

fn coeffs(model: &ModelSpec, x: &DVector<f64>, lambda: f64, state: usize) -> Result<Coeffs> {
    Ok(Coeffs {
        a_inv: model.diffusion_inverse(x, lambda, state)?,
        b: model.drift_at(x, lambda, state),
    })
}

/// Midpoint-rule action of a time-labelled path with coefficients frozen at
/// (lambda, state). Zero exactly on discretized flow lines of x' = b.
pub fn action_of_path(model: &ModelSpec, path: &TimedPath, lambda: f64, state: usize) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..path.points.len() - 1 {
        let dt = path.times[i + 1] - path.times[i];
        let mid = (&path.points[i] + &path.points[i + 1]) * 0.5;
        let c = coeffs(model, &mid, lambda, state)?;
        let v = (&path.points[i + 1] - &path.points[i]) / dt;
        let dev = v - c.b;
        total += 0.5 * dt * dev.dot(&(&c.a_inv * &dev));
    }
    Ok(total.max(0.0))
}

/// Free-time geometric action of a curve with coefficients frozen at
/// (lambda, state). Nonnegative by the Cauchy-Schwarz inequality; zero only
/// along flow lines traversed in the drift direction.
pub fn geometric_action(
    model: &ModelSpec,
    path: &GeometricPath,
    lambda: f64,
    state: usize,
) -> Result<f64> {
    if path.n_points() < 3 {
        return Err(Error::InvalidInput("geometric action needs at least 3 points".into()));
    }
    let mut total = 0.0;
    for w in path.points.windows(2) {
        let delta = &w[1] - &w[0];
        let mid = (&w[0] + &w[1]) * 0.5;
        let c = coeffs(model, &mid, lambda, state)?;
        let len_a = delta.dot(&(&c.a_inv * &delta)).max(0.0).sqrt();
        let drift_a = c.b.dot(&(&c.a_inv * &c.b)).max(0.0).sqrt();
        let cross = delta.dot(&(&c.a_inv * &c.b));
        total += len_a * drift_a - cross;
    }
    Ok(total.max(0.0))
}

/// Analytic gradient of the discretized geometric action with respect to the
/// path points. Spatial derivatives of the black-box coefficients come from
/// central differences with step `COEFF_FD_STEP`; everything else is chain
/// rule. Endpoint entries are zero (endpoints are fixed in the descent).
pub fn geometric_action_gradient(
    model: &ModelSpec,
    path: &GeometricPath,
    lambda: f64,
    state: usize,
) -> Result<Vec<DVector<f64>>> {
    let n = path.n_points();
    let d = path.points[0].len();
    let mut grad = vec![DVector::zeros(d); n];
    for i in 0..n - 1 {
        let p = &path.points[i];
        let q = &path.points[i + 1];
        let delta = q - p;
        let mid = (p + q) * 0.5;
        let c = coeffs(model, &mid, lambda, state)?;

        let a_delta = &c.a_inv * &delta;
        let a_b = &c.a_inv * &c.b;
        let len_a = delta.dot(&a_delta).max(0.0).sqrt();
        let drift_a = c.b.dot(&a_b).max(0.0).sqrt();

        // d/dDelta [ |Delta|_a |b|_a - <Delta, b>_a ]
        let d_delta = if len_a > DRIFT_NORM_FLOOR {
            &a_delta * (drift_a / len_a) - &a_b
        } else {
            -a_b.clone()
        };

        // d/dm via coefficient derivatives
        let mut d_mid = DVector::zeros(d);
        for l in 0..d {
            let mut hi = mid.clone();
            let mut lo = mid.clone();
            let h = COEFF_FD_STEP * (1.0 + mid[l].abs());
            hi[l] += h;
            lo[l] -= h;
            let da = (model.diffusion_matrix(&hi, lambda, state)
                - model.diffusion_matrix(&lo, lambda, state))
                / (2.0 * h);
            let db = (model.drift_at(&hi, lambda, state) - model.drift_at(&lo, lambda, state))
                / (2.0 * h);
            // derivative of the inverse: dA = -A da A
            let d_ainv = -(&c.a_inv * &da * &c.a_inv);

            let d_len = if len_a > DRIFT_NORM_FLOOR {
                delta.dot(&(&d_ainv * &delta)) / (2.0 * len_a)
            } else {
                0.0
            };
            let d_drift = if drift_a > DRIFT_NORM_FLOOR {
                (c.b.dot(&(&d_ainv * &c.b)) + 2.0 * db.dot(&a_b)) / (2.0 * drift_a)
            } else {
                0.0
            };
            let d_cross = delta.dot(&(&d_ainv * &c.b)) + delta.dot(&(&c.a_inv * &db));
            d_mid[l] = d_len * drift_a + len_a * d_drift - d_cross;
        }

        grad[i] += &d_mid * 0.5 - &d_delta;
        grad[i + 1] += &d_mid * 0.5 + &d_delta;
    }
    let last = n - 1;
    grad[0].fill(0.0);
    grad[last].fill(0.0);
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use nalgebra::DVector;

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn constant_path_at_equilibrium_has_zero_action() {
        let (model, _) = presets::frozen_unit();
        // phi == O on [0, 1]; integrand vanishes because b(O) = 0
        let path = TimedPath::sample(0.0, 1.0, 50, |_| v2(0.0, 0.0)).unwrap();
        let s = action_of_path(&model, &path, 0.3, 0).unwrap();
        assert!(s.abs() < 1e-14);
    }

    #[test]
    fn flow_line_has_vanishing_action() {
        // b = -x, phi(t) = x0 e^{-t}: the zero-cost relaxation path
        let (model, _) = presets::frozen_unit();
        let x0 = v2(0.8, 0.3);
        let path = TimedPath::sample(0.0, 1.0, 400, |t| &x0 * (-t).exp()).unwrap();
        let s = action_of_path(&model, &path, 0.0, 0).unwrap();
        assert!(s < 1e-6, "action on flow line = {}", s);
    }

    #[test]
    fn outward_exponential_matches_quadrature_oracle() {
        // b = -x, phi(t) = x0 e^{+t}, x0 = (0.1, 0), T = ln 10.
        // Oracle: S = int 2 |phi|^2 dt = |x0|^2 (e^{2T} - 1) computed by
        // Simpson quadrature, frozen to 0.99.
        let t_end = 10f64.ln();
        let n = 200_000;
        let h = t_end / n as f64;
        let f = |t: f64| 2.0 * (0.1 * t.exp()).powi(2);
        let mut oracle = f(0.0) + f(t_end);
        for i in 1..n {
            oracle += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        oracle *= h / 3.0;
        assert!((oracle - 0.99).abs() < 1e-10, "quadrature oracle {}", oracle);

        let (model, _) = presets::frozen_unit();
        let path = TimedPath::sample(0.0, t_end, 4000, |t| v2(0.1 * t.exp(), 0.0)).unwrap();
        let s = action_of_path(&model, &path, 0.0, 0).unwrap();
        assert!((s - 0.99).abs() < 5e-4, "action = {}", s);
    }

    #[test]
    fn geometric_action_outward_radial_matches_beta_r_squared() {
        // b = -0.5 x: cost of the radial segment O -> (1,0) is beta R^2 = 0.5
        let (model, _) = presets::offcenter_m032();
        // offcenter model has O = (0.2, 0); use the radial segment from O
        let a = v2(0.2, 0.0);
        let b = v2(1.0, 0.0);
        let path = GeometricPath::segment(&a, &b, 256).unwrap();
        let s = geometric_action(&model, &path, 0.0, 0).unwrap();
        // oracle: 2 int_0^R beta s ds = beta R^2 with R = 0.8, beta = 0.5
        let expect = 0.5 * 0.8 * 0.8;
        assert!((s - expect).abs() < 1e-6, "geometric action {}", s);
    }

    #[test]
    fn geometric_action_rejects_short_paths() {
        let (model, _) = presets::frozen_unit();
        let path = GeometricPath::new(vec![v2(0.0, 0.0), v2(1.0, 0.0)]).unwrap();
        assert!(geometric_action(&model, &path, 0.0, 0).is_err());
    }

    #[test]
    fn geometric_action_is_rediscretization_invariant() {
        let (model, _) = presets::frozen_unit();
        // curved test path: quarter arc from O outward
        let pts: Vec<DVector<f64>> = (0..=64)
            .map(|i| {
                let t = i as f64 / 64.0;
                v2(t * (1.3 * t).cos(), t * (1.3 * t).sin())
            })
            .collect();
        let p64 = GeometricPath::new(pts).unwrap();
        let p128 = p64.reparametrized(128);
        let s64 = geometric_action(&model, &p64, 0.0, 0).unwrap();
        let s128 = geometric_action(&model, &p128, 0.0, 0).unwrap();
        assert!(
            (s64 - s128).abs() / s64.abs().max(1e-12) < 1e-3,
            "s64 = {}, s128 = {}",
            s64,
            s128
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::Rng;
        let (model, _) = presets::two_state_modulated();
        let mut rng = crate::seeds::trajectory_rng(11, 0, crate::seeds::Stream::Chain);
        for case in 0..20 {
            let state = case % 2;
            let lambda = rng.gen_range(0.0..0.9);
            let x_end = v2(rng.gen_range(0.3..0.9), rng.gen_range(-0.5..0.5));
            let mut path = GeometricPath::segment(&model.equilibrium.clone(), &x_end, 12).unwrap();
            // random smooth perturbation of the interior
            for i in 1..12 {
                path.points[i][0] += 0.05 * rng.gen_range(-1.0..1.0);
                path.points[i][1] += 0.05 * rng.gen_range(-1.0..1.0);
            }
            let grad = geometric_action_gradient(&model, &path, lambda, state).unwrap();
            let mut num = vec![v2(0.0, 0.0); path.n_points()];
            let h = 1e-6;
            for i in 1..path.n_points() - 1 {
                for l in 0..2 {
                    let mut hi = path.clone();
                    let mut lo = path.clone();
                    hi.points[i][l] += h;
                    lo.points[i][l] -= h;
                    let shi = geometric_action(&model, &hi, lambda, state).unwrap();
                    let slo = geometric_action(&model, &lo, lambda, state).unwrap();
                    num[i][l] = (shi - slo) / (2.0 * h);
                }
            }
            let dot: f64 = (1..path.n_points() - 1).map(|i| (&grad[i] - &num[i]).norm_squared()).sum();
            let norm: f64 = (1..path.n_points() - 1).map(|i| num[i].norm_squared()).sum();
            let rel = (dot / norm.max(1e-30)).sqrt();
            assert!(rel < 1e-5, "case {}: gradient mismatch {:.3e}", case, rel);
        }
    }
}
