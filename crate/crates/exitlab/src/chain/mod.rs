//! Chain trajectories, the staircase stopping time, and its exact law.

pub mod expm;
pub mod law;
pub mod path;

pub use law::{sigma_law, sigma_law_with_grid, Atom, Segment, SigmaLaw};
pub use path::{
    sample_chain_path, sample_chain_path_with, sample_sigma_mc, sigma_of_path, ChainPath,
    SigmaOfPath, SigmaSample,
};
