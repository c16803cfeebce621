//! Monte Carlo simulation of the modulated diffusion, the fixed-staircase
//! variant, and frozen-coefficient processes, with first-exit detection.

pub mod sim;
pub mod tube;

pub use sim::{
    observe_ensemble, observe_ensemble_frozen, observe_positions, observe_positions_frozen,
    sample_exits_frozen, sample_exits_full, simulate_exit_fixed_z, simulate_exit_frozen,
    simulate_exit_full, ExitSample, Observation, SimConfig,
};
pub use tube::{tube_logprob_estimate, TubeEstimate, TubePoint};
