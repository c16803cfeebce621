//! Problem instances and numerical validation of the standing assumptions.

pub mod chain_spec;
pub mod checks;
pub mod config;
pub mod domain;
pub mod presets;
pub mod spec;

pub use chain_spec::ChainSpec;
pub use checks::{boundary_point, check_attraction_time, check_equilibrium_confinement, check_inward_drift, AssumptionReport};
pub use config::{CoefficientRegistry, ModelConfig};
pub use domain::{DomainConfig, DomainDescriptor};
pub use spec::{DriftFn, ModelSpec, SigmaFn};
