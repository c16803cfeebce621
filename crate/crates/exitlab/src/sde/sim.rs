//! Euler-Maruyama simulation of the modulated diffusion with first-exit
//! detection.
//!
//! The scheme runs in physical time t with a fixed step; the slow time
//! lambda = eps^2 ln t is recomputed every step. Chain jumps, observation
//! times and the censoring horizon split steps exactly, so coefficients stay
//! right-continuous at jumps and recorded positions sit at the requested
//! times. Exit is detected by a sign change of the level-set function and
//! located by linear interpolation; there is no Brownian-bridge correction,
//! which leaves a small O(h) bias toward later exits.

use crate::chain::ChainPath;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::seeds::{self, Stream};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Simulation parameters for one experiment.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub epsilon: f64,
    /// Euler step in process time.
    pub step: f64,
    pub x0: Vec<f64>,
    /// Censoring horizon in lambda units.
    pub horizon: f64,
    /// Optional lambda values at which the position is recorded.
    pub observe: Vec<f64>,
    /// Radius used for the near-O and distance-to-boundary observation flags.
    pub eta: f64,
    pub seed: u64,
    pub max_steps: u64,
}

impl SimConfig {
    pub fn new(epsilon: f64, step: f64, x0: Vec<f64>, horizon: f64, seed: u64) -> Self {
        SimConfig {
            epsilon,
            step,
            x0,
            horizon,
            observe: Vec::new(),
            eta: 0.2,
            seed,
            max_steps: 1_000_000_000,
        }
    }

    fn validate(&self, model: &ModelSpec) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidInput("epsilon must lie in (0, 1]".into()));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidInput("step must be positive".into()));
        }
        if self.x0.len() != model.dim {
            return Err(Error::InvalidInput("x0 dimension mismatch".into()));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        if self.observe.iter().any(|&l| l <= 0.0 || l >= self.horizon) {
            return Err(Error::InvalidInput("observation times must lie in (0, horizon)".into()));
        }
        Ok(())
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitSample {
    pub index: u64,
    /// Derived per-trajectory tag, recorded for reproducibility.
    pub seed: u64,
    pub censored: bool,
    /// First time the boundary was reached (censor time when censored).
    pub tau: f64,
    /// eps^2 ln tau, capped at the horizon when censored.
    pub lambda_hat: f64,
    /// Exit point, or the position at the censor time.
    pub exit_point: Vec<f64>,
    /// Chain state at exit (0-based).
    pub exit_state: usize,
    pub steps: u64,
}

/// Snapshot of the trajectory at one requested lambda value.
#[derive(Debug, Clone, Serialize)]
pub struct Observation {
    pub lambda_obs: f64,
    pub position: Vec<f64>,
    /// |X - O| < eta at the observation time.
    pub near_o: bool,
    /// Distance to the boundary at least eta (the shrunk domain).
    pub in_d_eta: bool,
    /// The trajectory had already left the domain by the observation time.
    pub exited: bool,
}

enum Event {
    Jump(usize),
    Observe(usize),
}

struct Timeline {
    /// (process time, event) sorted by time.
    events: Vec<(f64, Event)>,
    censor_time: f64,
}

fn timeline(cfg: &SimConfig, chain_path: Option<&ChainPath>, t_start: f64) -> Timeline {
    let eps2 = cfg.epsilon * cfg.epsilon;
    let censor_time = (cfg.horizon / eps2).exp();
    let mut events: Vec<(f64, Event)> = Vec::new();
    if let Some(path) = chain_path {
        for (i, &lambda) in path.jump_times.iter().enumerate() {
            let t = (lambda / eps2).exp();
            if t > t_start && t < censor_time {
                events.push((t, Event::Jump(path.states[i + 1])));
            }
        }
    }
    for (i, &lambda) in cfg.observe.iter().enumerate() {
        let t = (lambda / eps2).exp();
        if t > t_start && t < censor_time {
            events.push((t, Event::Observe(i)));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    Timeline { events, censor_time }
}

/// Coefficient source for the generic loop.
enum Coefficients<'a> {
    /// Slow time lambda(t) = eps^2 ln t with the supplied staircase.
    Modulated(&'a ChainPath),
    /// Both lambda and the state frozen.
    Frozen { lambda: f64, state: usize },
}

fn run_trajectory(
    model: &ModelSpec,
    cfg: &SimConfig,
    coeffs: Coefficients,
    rng: &mut ChaCha8Rng,
    t_start: f64,
    index: u64,
) -> Result<(ExitSample, Vec<Observation>)> {
    cfg.validate(model)?;
    let eps2 = cfg.epsilon * cfg.epsilon;
    let d = model.dim;
    let mut x = DVector::from_vec(cfg.x0.clone());
    let mut state = match &coeffs {
        Coefficients::Modulated(path) => path.states[0],
        Coefficients::Frozen { state, .. } => *state,
    };
    let tag = seeds::trajectory_tag(cfg.seed, index);
    let mut observations: Vec<Observation> = Vec::new();

    let tl = timeline(cfg, if let Coefficients::Modulated(p) = &coeffs { Some(p) } else { None }, t_start);
    let mut next_event = 0usize;
    let mut t = t_start;
    let mut g = model.domain.g(&x);
    let mut steps: u64 = 0;

    let observe_here = |x: &DVector<f64>, lambda_obs: f64, exited: bool| -> Result<Observation> {
        let near_o = (x - &model.equilibrium).norm() < cfg.eta;
        let in_d_eta = model.domain.distance_to_boundary(x)? >= cfg.eta;
        Ok(Observation {
            lambda_obs,
            position: x.iter().copied().collect(),
            near_o,
            in_d_eta: in_d_eta && !exited,
            exited,
        })
    };

    // starting on or outside the boundary exits immediately
    if g >= 0.0 {
        let lambda_hat = if t > 0.0 { eps2 * t.ln() } else { f64::NEG_INFINITY };
        for (i, &l) in cfg.observe.iter().enumerate() {
            let _ = i;
            observations.push(observe_here(&x, l, true)?);
        }
        return Ok((
            ExitSample {
                index,
                seed: tag,
                censored: false,
                tau: t,
                lambda_hat: lambda_hat.max(0.0),
                exit_point: x.iter().copied().collect(),
                exit_state: state,
                steps: 0,
            },
            observations,
        ));
    }

    loop {
        if steps >= cfg.max_steps {
            return Err(Error::BudgetExceeded { budget: cfg.max_steps, t });
        }
        // next stop: step end, next event, or censor time
        let mut t_next = (t + cfg.step).min(tl.censor_time);
        let mut event_here: Option<&(f64, Event)> = None;
        if next_event < tl.events.len() && tl.events[next_event].0 <= t_next {
            event_here = Some(&tl.events[next_event]);
            t_next = tl.events[next_event].0;
        }
        let dt = t_next - t;
        if dt > 0.0 {
            let lambda = match &coeffs {
                Coefficients::Modulated(_) => (eps2 * t.ln()).clamp(0.0, cfg.horizon),
                Coefficients::Frozen { lambda, .. } => *lambda,
            };
            let b = model.drift_at(&x, lambda, state);
            let s = (model.sigma)(&x, lambda, state);
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            let x_new = &x + &b * dt + (&s * z) * (cfg.epsilon * dt.sqrt());
            let g_new = model.domain.g(&x_new);
            steps += 1;
            if g_new >= 0.0 {
                // linear interpolation to the crossing
                let frac = if g_new > g { (-g) / (g_new - g) } else { 1.0 };
                let tau = t + frac * dt;
                let exit_x = &x + (&x_new - &x) * frac;
                let lambda_hat = eps2 * tau.max(f64::MIN_POSITIVE).ln();
                // remaining observations report "already exited"
                while next_event < tl.events.len() {
                    if let (_, Event::Observe(i)) = tl.events[next_event] {
                        observations.push(observe_here(&exit_x, cfg.observe[i], true)?);
                    }
                    next_event += 1;
                }
                return Ok((
                    ExitSample {
                        index,
                        seed: tag,
                        censored: false,
                        tau,
                        lambda_hat,
                        exit_point: exit_x.iter().copied().collect(),
                        exit_state: state,
                        steps,
                    },
                    observations,
                ));
            }
            x = x_new;
            g = g_new;
            t = t_next;
        } else {
            t = t_next;
        }

        if let Some((_, ev)) = event_here {
            match ev {
                Event::Jump(new_state) => state = *new_state,
                Event::Observe(i) => observations.push(observe_here(&x, cfg.observe[*i], false)?),
            }
            next_event += 1;
        }

        if t >= tl.censor_time {
            return Ok((
                ExitSample {
                    index,
                    seed: tag,
                    censored: true,
                    tau: tl.censor_time,
                    lambda_hat: cfg.horizon,
                    exit_point: x.iter().copied().collect(),
                    exit_state: state,
                    steps,
                },
                observations,
            ));
        }
    }
}

/// Full modulated simulation: samples the chain path on its own stream, maps
/// jump times to process time and integrates from t = 1.
pub fn simulate_exit_full(model: &ModelSpec, cfg: &SimConfig) -> Result<ExitSample> {
    simulate_exit_full_indexed(model, cfg, 0).map(|(s, _)| s)
}

pub fn simulate_exit_full_indexed(
    model: &ModelSpec,
    cfg: &SimConfig,
    index: u64,
) -> Result<(ExitSample, Vec<Observation>)> {
    let mut chain_rng = seeds::trajectory_rng(cfg.seed, index, Stream::Chain);
    let chain_path =
        crate::chain::sample_chain_path_with(&model.chain, cfg.horizon, &mut chain_rng);
    let mut wiener = seeds::trajectory_rng(cfg.seed, index, Stream::Wiener);
    run_trajectory(model, cfg, Coefficients::Modulated(&chain_path), &mut wiener, 1.0, index)
}

/// Modulated simulation with a supplied staircase; the Wiener stream is the
/// same one the full simulator would use for this (seed, index).
pub fn simulate_exit_fixed_z(model: &ModelSpec, z: &ChainPath, cfg: &SimConfig) -> Result<ExitSample> {
    simulate_exit_fixed_z_indexed(model, z, cfg, 0).map(|(s, _)| s)
}

pub fn simulate_exit_fixed_z_indexed(
    model: &ModelSpec,
    z: &ChainPath,
    cfg: &SimConfig,
    index: u64,
) -> Result<(ExitSample, Vec<Observation>)> {
    let mut wiener = seeds::trajectory_rng(cfg.seed, index, Stream::Wiener);
    run_trajectory(model, cfg, Coefficients::Modulated(z), &mut wiener, 1.0, index)
}

/// Frozen-coefficient simulation Y at (lambda, state), starting at t = 0.
pub fn simulate_exit_frozen(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    cfg: &SimConfig,
) -> Result<ExitSample> {
    simulate_exit_frozen_indexed(model, lambda, state, cfg, 0).map(|(s, _)| s)
}

pub fn simulate_exit_frozen_indexed(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    cfg: &SimConfig,
    index: u64,
) -> Result<(ExitSample, Vec<Observation>)> {
    let mut wiener = seeds::trajectory_rng(cfg.seed, index, Stream::Wiener);
    run_trajectory(model, cfg, Coefficients::Frozen { lambda, state }, &mut wiener, 0.0, index)
}

/// Full simulation recording positions at the configured observation times.
pub fn observe_positions(model: &ModelSpec, cfg: &SimConfig) -> Result<Vec<Observation>> {
    simulate_exit_full_indexed(model, cfg, 0).map(|(_, obs)| obs)
}

/// Frozen-coefficient variant of `observe_positions`.
pub fn observe_positions_frozen(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    cfg: &SimConfig,
) -> Result<Vec<Observation>> {
    simulate_exit_frozen_indexed(model, lambda, state, cfg, 0).map(|(_, obs)| obs)
}

/// n independent full trajectories, parallel, aggregated in index order.
pub fn sample_exits_full(model: &ModelSpec, cfg: &SimConfig, n: usize) -> Result<Vec<ExitSample>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_exit_full_indexed(model, cfg, i).map(|(s, _)| s))
        .collect()
}

/// n independent frozen trajectories.
pub fn sample_exits_frozen(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    cfg: &SimConfig,
    n: usize,
) -> Result<Vec<ExitSample>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_exit_frozen_indexed(model, lambda, state, cfg, i).map(|(s, _)| s))
        .collect()
}

/// n independent full trajectories with observations.
pub fn observe_ensemble(
    model: &ModelSpec,
    cfg: &SimConfig,
    n: usize,
) -> Result<Vec<(ExitSample, Vec<Observation>)>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_exit_full_indexed(model, cfg, i))
        .collect()
}

/// n independent frozen trajectories with observations.
pub fn observe_ensemble_frozen(
    model: &ModelSpec,
    lambda: f64,
    state: usize,
    cfg: &SimConfig,
    n: usize,
) -> Result<Vec<(ExitSample, Vec<Observation>)>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_exit_frozen_indexed(model, lambda, state, cfg, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    fn cfg(eps: f64, seed: u64) -> SimConfig {
        SimConfig::new(eps, 0.01, vec![0.1, 0.0], 1.6, seed)
    }

    #[test]
    fn identical_seed_gives_bitwise_identical_samples() {
        let (model, _) = presets::frozen_unit();
        let a = simulate_exit_frozen(&model, 0.0, 0, &cfg(0.4, 7)).unwrap();
        let b = simulate_exit_frozen(&model, 0.0, 0, &cfg(0.4, 7)).unwrap();
        assert_eq!(a, b);
        let c = simulate_exit_frozen(&model, 0.0, 0, &cfg(0.4, 8)).unwrap();
        assert_ne!(a.tau.to_bits(), c.tau.to_bits());
    }

    #[test]
    fn chain_path_is_independent_of_wiener_stream() {
        use crate::seeds::{trajectory_rng, Stream};
        // the chain stream alone reproduces the path the full simulator uses
        let (model, _) = presets::two_state_modulated();
        let c = SimConfig::new(0.4, 0.01, vec![0.15, 0.15], 1.0, 99);
        let mut chain_rng = trajectory_rng(c.seed, 5, Stream::Chain);
        let expected =
            crate::chain::sample_chain_path_with(&model.chain, c.horizon, &mut chain_rng);
        // consuming the wiener stream differently cannot change the chain draw
        let mut chain_rng2 = trajectory_rng(c.seed, 5, Stream::Chain);
        let mut wiener = trajectory_rng(c.seed, 5, Stream::Wiener);
        use rand::RngCore;
        for _ in 0..1000 {
            wiener.next_u64();
        }
        let again = crate::chain::sample_chain_path_with(&model.chain, c.horizon, &mut chain_rng2);
        assert_eq!(expected, again);
    }

    #[test]
    fn full_equals_fixed_z_for_jump_free_chain() {
        // Q = 0 chain never jumps, so the full simulator conditioned on the
        // constant path must match fixed-z bitwise at the same seed
        let (model, _) = presets::offcenter_m032();
        let c = cfg(0.45, 21);
        let full = simulate_exit_full(&model, &c).unwrap();
        let z = crate::chain::ChainPath::constant(0, c.horizon);
        let fixed = simulate_exit_fixed_z(&model, &z, &c).unwrap();
        assert_eq!(full, fixed);
    }

    #[test]
    fn jump_at_censor_horizon_changes_nothing() {
        let (model, _) = presets::two_state_modulated();
        let c = SimConfig::new(0.5, 0.01, vec![0.15, 0.15], 0.4, 3);
        let z_plain = crate::chain::ChainPath::constant(0, c.horizon);
        // the jump lands exactly on the censor horizon, after every step
        let z_late =
            crate::chain::ChainPath::new(vec![c.horizon], vec![0, 1], c.horizon).unwrap();
        for seed in 0..20 {
            let mut c2 = c.clone();
            c2.seed = seed;
            let a = simulate_exit_fixed_z(&model, &z_plain, &c2).unwrap();
            let b = simulate_exit_fixed_z(&model, &z_late, &c2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn start_on_boundary_exits_immediately() {
        let (model, _) = presets::frozen_unit();
        let mut c = cfg(0.4, 11);
        c.x0 = vec![1.0, 0.0];
        let s = simulate_exit_frozen(&model, 0.0, 0, &c).unwrap();
        assert_eq!(s.tau, 0.0);
        assert_eq!(s.exit_point, vec![1.0, 0.0]);
        assert!(!s.censored);
    }

    #[test]
    fn tiny_horizon_censors() {
        let (model, _) = presets::frozen_unit();
        let mut c = cfg(0.28, 5);
        c.horizon = 0.05; // exp(0.05/eps^2) is tiny compared to exit scale
        let s = simulate_exit_frozen(&model, 0.0, 0, &c).unwrap();
        assert!(s.censored);
        assert_eq!(s.lambda_hat, 0.05);
    }

    #[test]
    fn huge_noise_exits_fast_and_uncensored() {
        let (model, _) = presets::frozen_unit();
        // eps at the top of the legal range still dominates this drift
        let mut c = cfg(1.0, 17);
        c.horizon = 3.0;
        for i in 0..50 {
            c.seed = 1000 + i;
            let s = simulate_exit_frozen(&model, 0.0, 0, &c).unwrap();
            assert!(!s.censored);
            assert!(s.tau < 50.0, "tau = {}", s.tau);
        }
    }

    #[test]
    fn exit_points_sit_on_the_boundary() {
        let (model, _) = presets::offcenter_m032();
        let c = SimConfig::new(0.45, 0.01, vec![0.2, 0.0], 0.9, 13);
        let samples = sample_exits_full(&model, &c, 200).unwrap();
        let tol = 10.0 * c.step * model.drift_bound;
        for s in samples.iter().filter(|s| !s.censored) {
            let x = DVector::from_vec(s.exit_point.clone());
            assert!(model.domain.g(&x).abs() <= tol, "g = {}", model.domain.g(&x));
            assert!(s.tau >= 1.0, "full simulator starts at t = 1");
            assert!(s.lambda_hat <= c.horizon + 1e-12);
        }
    }

    #[test]
    fn ensemble_order_is_deterministic() {
        let (model, _) = presets::offcenter_m032();
        let c = SimConfig::new(0.5, 0.01, vec![0.2, 0.0], 0.9, 77);
        let a = sample_exits_full(&model, &c, 64).unwrap();
        let b = sample_exits_full(&model, &c, 64).unwrap();
        assert_eq!(a, b);
        for (i, s) in a.iter().enumerate() {
            assert_eq!(s.index, i as u64);
        }
    }
}
