//! Monte Carlo estimates of sup-norm tube probabilities for the frozen
//! process, with the large-deviation slope extracted by regressing ln P
//! against -1/eps^2.

use crate::action::TimedPath;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::seeds::{self, Stream};
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct TubePoint {
    pub epsilon: f64,
    pub hits: u64,
    pub n: u64,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// eps^2 ln p_hat; absent when no trajectory stayed in the tube.
    pub eps2_ln_p: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TubeEstimate {
    pub points: Vec<TubePoint>,
    /// Least-squares slope of ln p against -1/eps^2 over available points;
    /// the large-deviation exponent estimate.
    pub slope: Option<f64>,
}

/// Estimates P(sup_t |Y_t - phi(t)| < delta) for each epsilon by direct
/// Monte Carlo of the frozen process started at phi(0). Integration steps
/// split exactly at the path's node times; a trajectory is abandoned the
/// moment it leaves the tube.
pub fn tube_logprob_estimate(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    phi: &TimedPath,
    delta: f64,
    eps_list: &[f64],
    n: usize,
    step: f64,
    seed: u64,
) -> Result<TubeEstimate> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one trajectory".into()));
    }
    if delta <= 0.0 {
        return Err(Error::InvalidInput("tube radius must be positive".into()));
    }
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("need at least one epsilon".into()));
    }
    // mirror of the bounded-cost precondition: T + action must be finite
    let action = crate::action::action_of_path(model, phi, lambda, state)?;
    if !(phi.duration() + action).is_finite() {
        return Err(Error::InvalidInput("path duration plus action must be finite".into()));
    }

    let mut points = Vec::with_capacity(eps_list.len());
    for (eps_idx, &epsilon) in eps_list.iter().enumerate() {
        let run_seed = seeds::derive(seed, &[0x70be, eps_idx as u64]);
        let hits: u64 = (0..n as u64)
            .into_par_iter()
            .map(|i| u64::from(follows_tube(model, lambda, state, phi, delta, epsilon, step, run_seed, i)))
            .sum();
        let p_hat = hits as f64 / n as f64;
        let (wilson_low, wilson_high) = wilson_interval(hits, n as u64);
        points.push(TubePoint {
            epsilon,
            hits,
            n: n as u64,
            p_hat,
            wilson_low,
            wilson_high,
            eps2_ln_p: (hits > 0).then(|| epsilon * epsilon * p_hat.ln()),
        });
    }

    // regression of ln p on x = -1/eps^2; slope estimates the tube exponent
    let avail: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.hits > 0)
        .map(|p| (-1.0 / (p.epsilon * p.epsilon), p.p_hat.ln()))
        .collect();
    let slope = if avail.len() >= 2 {
        let xm = avail.iter().map(|(x, _)| x).sum::<f64>() / avail.len() as f64;
        let ym = avail.iter().map(|(_, y)| y).sum::<f64>() / avail.len() as f64;
        let num: f64 = avail.iter().map(|(x, y)| (x - xm) * (y - ym)).sum();
        let den: f64 = avail.iter().map(|(x, _)| (x - xm) * (x - xm)).sum();
        (den > 0.0).then(|| num / den)
    } else {
        None
    };

    Ok(TubeEstimate { points, slope })
}

#[allow(clippy::too_many_arguments)]
fn follows_tube(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    phi: &TimedPath,
    delta: f64,
    epsilon: f64,
    step: f64,
    run_seed: u64,
    index: u64,
) -> bool {
    let mut rng = seeds::trajectory_rng(run_seed, index, Stream::Wiener);
    let d = model.dim;
    let mut y = phi.points[0].clone();
    let t_end = *phi.times.last().unwrap();
    let mut t = phi.times[0];
    let mut node = 1usize;
    loop {
        if (&y - phi.at(t)).norm() >= delta {
            return false;
        }
        if t >= t_end {
            return true;
        }
        let mut t_next = (t + step).min(t_end);
        if node < phi.times.len() && phi.times[node] <= t_next {
            t_next = phi.times[node];
            node += 1;
        }
        let dt = t_next - t;
        if dt > 0.0 {
            let b = model.drift_at(&y, lambda, state);
            let s = (model.sigma)(&y, lambda, state);
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            y += &b * dt + (&s * z) * (epsilon * dt.sqrt());
        }
        t = t_next;
    }
}

/// 95% Wilson score interval.
fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    let z = 1.959963984540054_f64;
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn zero_action_tube_probability_rises_toward_one() {
        // phi == O from x0 = O: action 0, so the tube fills up as eps shrinks
        let (model, _) = presets::frozen_unit();
        let phi = TimedPath::sample(0.0, 1.0, 20, |_| v2(0.0, 0.0)).unwrap();
        let est = tube_logprob_estimate(
            &model,
            0.0,
            0,
            &phi,
            0.35,
            &[0.4, 0.3, 0.2],
            4000,
            0.01,
            42,
        )
        .unwrap();
        let p: Vec<f64> = est.points.iter().map(|p| p.p_hat).collect();
        assert!(p[0] < p[1] && p[1] < p[2], "monotone trend {:?}", p);
        assert!(p[2] > 0.75, "toward certainty at small eps: {:?}", p);
    }

    #[test]
    fn wide_tube_is_certain() {
        let (model, _) = presets::frozen_unit();
        let phi = TimedPath::sample(0.0, 0.5, 10, |t| v2(0.1 * t.exp(), 0.0)).unwrap();
        // delta larger than the domain diameter
        let est =
            tube_logprob_estimate(&model, 0.0, 0, &phi, 3.0, &[0.4, 0.3], 500, 0.01, 9).unwrap();
        for p in &est.points {
            assert_eq!(p.hits, p.n);
            assert_eq!(p.p_hat, 1.0);
        }
    }

    #[test]
    fn zero_hits_marks_estimate_unavailable() {
        let (model, _) = presets::frozen_unit();
        // unreachable tube: target path teleports far outside the dynamics
        let phi = TimedPath::sample(0.0, 0.5, 10, |t| v2(5.0 * t + 0.1, 0.0)).unwrap();
        let est =
            tube_logprob_estimate(&model, 0.0, 0, &phi, 0.05, &[0.3], 200, 0.01, 1).unwrap();
        assert_eq!(est.points[0].hits, 0);
        assert!(est.points[0].eps2_ln_p.is_none());
        assert!(est.slope.is_none());
    }

    #[test]
    fn wilson_interval_basics() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        let (lo0, hi0) = wilson_interval(0, 100);
        assert!(lo0.abs() < 1e-12);
        assert!(hi0 > 0.0 && hi0 < 0.06);
    }
}
