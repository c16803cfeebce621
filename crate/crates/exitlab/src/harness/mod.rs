//! End-to-end experiments: predictions, Monte Carlo comparisons, distances,
//! trends, and plot data.

pub mod ks;
pub mod plots;
pub mod predict;
pub mod stats;
pub mod study;

pub use ks::{ks_between_samples, ks_distance};
pub use plots::{emit_plot_data, overlay_csv, overlay_svg};
pub use predict::{predict, predict_with, PredictOptions, Prediction};
pub use stats::{exit_point_stats, ExitPointStats, StateHits};
pub use study::{
    run_against_prediction, run_convergence_study, ComparisonReport, EpsReport, ExitRow,
    ReplicationOutcome, StudyOptions, Verdict,
};
