//! Chain trajectories, the staircase stopping time of a fixed trajectory,
//! and Monte Carlo sampling of the stopping time.

use crate::error::{Error, Result};
use crate::model::ChainSpec;
use crate::seeds::{self, Stream};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Right-continuous staircase: state `states[i]` holds on
/// [jump_times[i-1], jump_times[i]) with jump_times[-1] = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainPath {
    /// Strictly increasing jump times in (0, horizon].
    pub jump_times: Vec<f64>,
    /// Visited states, one longer than jump_times; consecutive entries differ.
    pub states: Vec<usize>,
    pub horizon: f64,
}

impl ChainPath {
    pub fn constant(state: usize, horizon: f64) -> Self {
        ChainPath { jump_times: Vec::new(), states: vec![state], horizon }
    }

    pub fn new(jump_times: Vec<f64>, states: Vec<usize>, horizon: f64) -> Result<Self> {
        if states.is_empty() || states.len() != jump_times.len() + 1 {
            return Err(Error::InvalidInput("need one more state than jump times".into()));
        }
        for w in jump_times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("jump times must be strictly increasing".into()));
            }
        }
        if jump_times.first().is_some_and(|&t| t <= 0.0)
            || jump_times.last().is_some_and(|&t| t > horizon)
        {
            return Err(Error::InvalidInput("jump times must lie in (0, horizon]".into()));
        }
        for w in states.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput("consecutive states must differ".into()));
            }
        }
        Ok(ChainPath { jump_times, states, horizon })
    }

    /// State at lambda (right-continuous).
    pub fn state_at(&self, lambda: f64) -> usize {
        let idx = self.jump_times.partition_point(|&t| t <= lambda);
        self.states[idx]
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }
}

/// Exact Gillespie sampling of the chain up to the horizon. Deterministic
/// given the seed; the initial state comes from the chain's initial law.
pub fn sample_chain_path(chain: &ChainSpec, horizon: f64, seed: u64) -> ChainPath {
    let mut rng = seeds::trajectory_rng(seed, 0, Stream::Chain);
    sample_chain_path_with(chain, horizon, &mut rng)
}

/// Gillespie sampling from a caller-supplied generator stream.
pub fn sample_chain_path_with<R: Rng>(chain: &ChainSpec, horizon: f64, rng: &mut R) -> ChainPath {
    let mut state = sample_initial(chain, rng);
    let mut t = 0.0;
    let mut jump_times = Vec::new();
    let mut states = vec![state];
    loop {
        let rate = chain.exit_rate(state);
        if rate <= 0.0 {
            break; // absorbing: infinite holding time
        }
        let hold = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln() / rate;
        t += hold;
        if t > horizon {
            break;
        }
        // jump distribution Q_kj / (-Q_kk)
        let u: f64 = rng.gen::<f64>() * rate;
        let mut acc = 0.0;
        let mut next = state;
        for j in 0..chain.n_states() {
            if j == state {
                continue;
            }
            acc += chain.generator[state][j];
            if u < acc {
                next = j;
                break;
            }
        }
        if next == state {
            // numerical edge: u landed past the accumulated rates
            next = (0..chain.n_states()).rev().find(|&j| j != state && chain.generator[state][j] > 0.0).unwrap_or(state);
            if next == state {
                break;
            }
        }
        jump_times.push(t);
        states.push(next);
        state = next;
    }
    ChainPath { jump_times, states, horizon }
}

fn sample_initial<R: Rng>(chain: &ChainSpec, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in chain.initial.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    chain.n_states() - 1
}

/// Stopping time of a fixed staircase against per-state deadlines:
/// sigma = inf { lambda >= 0 : lambda >= m[state at lambda] }.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaOfPath {
    pub sigma: f64,
    /// State at sigma (right-continuous).
    pub exit_state: usize,
    /// Set when some jump lands exactly on a deadline (measure-zero event).
    pub jump_on_deadline: bool,
}

pub fn sigma_of_path(path: &ChainPath, deadlines: &[f64]) -> Result<SigmaOfPath> {
    if deadlines.len() < path.states.iter().copied().max().unwrap_or(0) + 1 {
        return Err(Error::InvalidInput("need one deadline per state".into()));
    }
    if deadlines.iter().any(|&m| m <= 0.0 || m >= path.horizon) {
        return Err(Error::InvalidInput("deadlines must lie in (0, horizon)".into()));
    }
    let jump_on_deadline = path
        .jump_times
        .iter()
        .any(|t| deadlines.iter().any(|m| m == t));
    for i in 0..path.states.len() {
        let a = if i == 0 { 0.0 } else { path.jump_times[i - 1] };
        let b = if i < path.jump_times.len() { path.jump_times[i] } else { path.horizon };
        let k = path.states[i];
        // Right-continuity: a jump landing exactly on its new state's deadline
        // exits at the jump; a deadline equal to the segment's right end does
        // not trigger inside this segment.
        if deadlines[k] < b {
            return Ok(SigmaOfPath { sigma: deadlines[k].max(a), exit_state: k, jump_on_deadline });
        }
    }
    // Unreachable when all deadlines are below the horizon: the last segment
    // extends to the horizon, so its deadline always triggers.
    Err(Error::Numerical("staircase never left the alive region".into()))
}

/// One Monte Carlo sample of (sigma, exit state).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaSample {
    pub sigma: f64,
    pub exit_state: usize,
}

/// n independent samples of (sigma, exit state), deterministic in the seed
/// and aggregated in trajectory order.
pub fn sample_sigma_mc(
    chain: &ChainSpec,
    deadlines: &[f64],
    horizon: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<SigmaSample>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    if deadlines.len() != chain.n_states() {
        return Err(Error::InvalidInput("need one deadline per state".into()));
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds::trajectory_rng(seed, i, Stream::Chain);
            let path = sample_chain_path_with(chain, horizon, &mut rng);
            let s = sigma_of_path(&path, deadlines)?;
            Ok(SigmaSample { sigma: s.sigma, exit_state: s.exit_state })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> ChainSpec {
        ChainSpec::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_generator_never_jumps() {
        let chain = ChainSpec::single_state();
        let path = sample_chain_path(&chain, 1.0, 42);
        assert_eq!(path.n_jumps(), 0);
        assert_eq!(path.states, vec![0]);
    }

    #[test]
    fn sampling_is_reproducible_and_poisson_mean_matches() {
        let chain = two_state();
        let a = sample_chain_path(&chain, 1.0, 7);
        let b = sample_chain_path(&chain, 1.0, 7);
        assert_eq!(a, b);

        // jump counts over many seeds: Poisson(1) mean within +- 0.02
        let n = 100_000;
        let total: usize = (0..n).map(|s| sample_chain_path(&chain, 1.0, s as u64).n_jumps()).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean jumps {}", mean);
    }

    #[test]
    fn delta_initial_on_second_state() {
        let chain =
            ChainSpec::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], vec![0.0, 1.0]).unwrap();
        for seed in 0..50 {
            assert_eq!(sample_chain_path(&chain, 1.0, seed).states[0], 1);
        }
    }

    #[test]
    fn sigma_of_constant_path_is_the_deadline() {
        let path = ChainPath::constant(0, 1.0);
        let s = sigma_of_path(&path, &[0.5]).unwrap();
        assert_eq!(s.sigma, 0.5);
        assert_eq!(s.exit_state, 0);
    }

    #[test]
    fn jump_into_expired_state_exits_at_jump_time() {
        // deadlines (0.5, 0.05); jump 1 -> 2 at 0.1: state 2's deadline passed
        let path = ChainPath::new(vec![0.1], vec![0, 1], 1.0).unwrap();
        let s = sigma_of_path(&path, &[0.5, 0.05]).unwrap();
        assert!((s.sigma - 0.1).abs() < 1e-15);
        assert_eq!(s.exit_state, 1);
    }

    #[test]
    fn deadline_reached_in_second_state() {
        // deadlines (0.3, 0.6); jump 1 -> 2 at 0.2, no further jumps
        let path = ChainPath::new(vec![0.2], vec![0, 1], 1.0).unwrap();
        let s = sigma_of_path(&path, &[0.3, 0.6]).unwrap();
        assert!((s.sigma - 0.6).abs() < 1e-15);
        assert_eq!(s.exit_state, 1);
    }

    #[test]
    fn sigma_stays_within_deadline_envelope() {
        let chain = two_state();
        let deadlines = [0.3, 0.6];
        for seed in 0..500 {
            let path = sample_chain_path(&chain, 1.0, seed);
            let s = sigma_of_path(&path, &deadlines).unwrap();
            assert!(s.sigma >= 0.3 - 1e-15 && s.sigma <= 0.6 + 1e-15);
        }
    }

    #[test]
    fn mc_requires_positive_sample_count() {
        let chain = two_state();
        assert!(sample_sigma_mc(&chain, &[0.3, 0.6], 1.0, 0, 7).is_err());
    }

    #[test]
    fn single_state_mc_collapses_to_atom() {
        let chain = ChainSpec::single_state();
        let samples = sample_sigma_mc(&chain, &[0.5], 1.0, 200, 3).unwrap();
        assert!(samples.iter().all(|s| s.sigma == 0.5 && s.exit_state == 0));
    }
}
