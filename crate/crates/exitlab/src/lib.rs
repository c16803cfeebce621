//! exitlab: a numerical laboratory for exit problems of small random
//! perturbations of slowly changing dynamical systems.
//!
//! The crate computes quasipotentials by geometric minimum-action descent,
//! solves the root equation M(lambda) = lambda per chain state, derives the
//! exact law of the staircase stopping time, runs Euler-Maruyama exit Monte
//! Carlo for the modulated diffusion, and solves the harmonic boundary
//! problem that governs exit through an outer boundary when the drift
//! vanishes in between.

pub mod action;
pub mod chain;
pub mod cli;
pub mod error;
pub mod harness;
pub mod model;
pub mod sde;
pub mod seeds;
pub mod trap;

pub use error::{Error, Result};
