//! End-to-end convergence studies: prediction, Monte Carlo across an epsilon
//! grid with replications, distances, hit rates and trend verdicts.

use crate::error::{Error, Result};
use crate::harness::ks::ks_distance;
use crate::harness::predict::{predict_with, PredictOptions, Prediction};
use crate::harness::stats::exit_point_stats;
use crate::model::ModelSpec;
use crate::sde::{sample_exits_full, SimConfig};
use crate::seeds;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct StudyOptions {
    /// Epsilon grid, sorted descending.
    pub eps_grid: Vec<f64>,
    /// Trajectories per (epsilon, replication).
    pub n: usize,
    /// Exit-point hit radius.
    pub eta: f64,
    pub seed: u64,
    pub replications: usize,
    /// Euler step.
    pub step: f64,
    /// Start point; defaults to the equilibrium.
    pub x0: Option<Vec<f64>>,
    pub predict: PredictOptions,
}

impl StudyOptions {
    pub fn new(eps_grid: Vec<f64>, n: usize, eta: f64, seed: u64) -> Self {
        StudyOptions {
            eps_grid,
            n,
            eta,
            seed,
            replications: 5,
            step: 0.01,
            x0: None,
            predict: PredictOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub ks: f64,
    pub hit_rate: f64,
    pub censored: usize,
    pub n_uncensored: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsReport {
    pub epsilon: f64,
    pub replications: Vec<ReplicationOutcome>,
    pub ks_median: f64,
    pub hit_median: f64,
    pub censored_total: usize,
    /// Set when a replication ran out of step budget; the entry is partial.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// Too few samples for the trend to mean anything.
    LowPower,
    /// Not enough grid points to define a trend.
    Undefined,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub eta: f64,
    pub n: usize,
    pub seed: u64,
    pub eps: Vec<EpsReport>,
    pub ks_trend: Verdict,
    pub hit_trend: Verdict,
    pub all_pass: bool,
    /// Pooled uncensored rescaled exit times per epsilon, for CDF overlays.
    pub pooled_lambda_hat: Vec<Vec<f64>>,
    /// Raw per-sample exit rows for reporting.
    pub exit_rows: Vec<ExitRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitRow {
    pub epsilon: f64,
    pub replication: usize,
    pub index: u64,
    pub censored: bool,
    pub lambda_hat: f64,
    pub exit_point: Vec<f64>,
    pub exit_state: usize,
    pub nearest_state: usize,
    pub hit: bool,
}

/// Runs the full pipeline for one model. The prediction is computed once;
/// every (epsilon, replication) pair gets its own derived seed.
pub fn run_convergence_study(
    model: &ModelSpec,
    opts: &StudyOptions,
) -> Result<(Prediction, ComparisonReport)> {
    if opts.eps_grid.is_empty() {
        return Err(Error::InvalidInput("epsilon grid must not be empty".into()));
    }
    for w in opts.eps_grid.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidInput("epsilon grid must be sorted descending".into()));
        }
    }
    if opts.n == 0 || opts.replications == 0 {
        return Err(Error::InvalidInput("need n >= 1 and at least one replication".into()));
    }
    let prediction = predict_with(model, &opts.predict)?;
    let report = run_against_prediction(model, &prediction, opts)?;
    Ok((prediction, report))
}

/// Same study against an existing prediction.
pub fn run_against_prediction(
    model: &ModelSpec,
    prediction: &Prediction,
    opts: &StudyOptions,
) -> Result<ComparisonReport> {
    let x0 = opts.x0.clone().unwrap_or_else(|| model.equilibrium.iter().copied().collect());
    let targets: Vec<nalgebra::DVector<f64>> =
        prediction.exit_points.iter().map(|xp| xp.point_vector()).collect();

    let mut eps_reports = Vec::with_capacity(opts.eps_grid.len());
    let mut pooled = Vec::with_capacity(opts.eps_grid.len());
    let mut exit_rows = Vec::new();

    for (eps_idx, &epsilon) in opts.eps_grid.iter().enumerate() {
        let mut outcomes = Vec::new();
        let mut pool = Vec::new();
        let mut censored_total = 0usize;
        let mut budget_exhausted = false;
        for rep in 0..opts.replications {
            let run_seed = seeds::derive(opts.seed, &[0x57d, eps_idx as u64, rep as u64]);
            let mut cfg = SimConfig::new(epsilon, opts.step, x0.clone(), model.horizon, run_seed);
            cfg.eta = opts.eta;
            let samples = match sample_exits_full(model, &cfg, opts.n) {
                Ok(s) => s,
                Err(Error::BudgetExceeded { .. }) => {
                    budget_exhausted = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let uncensored: Vec<f64> = samples
                .iter()
                .filter(|s| !s.censored)
                .map(|s| s.lambda_hat)
                .collect();
            let censored = samples.len() - uncensored.len();
            censored_total += censored;
            let ks = ks_distance(&uncensored, &prediction.law)?;
            let stats = exit_point_stats(&samples, prediction, opts.eta)?;
            for s in &samples {
                let x = nalgebra::DVector::from_vec(s.exit_point.clone());
                let nearest = (0..targets.len())
                    .min_by(|&a, &b| {
                        (&x - &targets[a]).norm().total_cmp(&(&x - &targets[b]).norm())
                    })
                    .unwrap_or(0);
                let hit = !s.censored && (&x - &targets[s.exit_state]).norm() <= opts.eta;
                exit_rows.push(ExitRow {
                    epsilon,
                    replication: rep,
                    index: s.index,
                    censored: s.censored,
                    lambda_hat: s.lambda_hat,
                    exit_point: s.exit_point.clone(),
                    exit_state: s.exit_state,
                    nearest_state: nearest,
                    hit,
                });
            }
            pool.extend(uncensored);
            outcomes.push(ReplicationOutcome {
                replication: rep,
                ks,
                hit_rate: stats.overall_hit_rate,
                censored,
                n_uncensored: stats.n_uncensored,
            });
        }
        let ks_median = median(outcomes.iter().map(|o| o.ks));
        let hit_median = median(outcomes.iter().map(|o| o.hit_rate));
        eps_reports.push(EpsReport {
            epsilon,
            replications: outcomes,
            ks_median,
            hit_median,
            censored_total,
            budget_exhausted,
        });
        pooled.push(pool);
    }

    let complete: Vec<&EpsReport> =
        eps_reports.iter().filter(|e| !e.budget_exhausted).collect();
    let (ks_trend, hit_trend) = if complete.len() < 2 {
        (Verdict::Undefined, Verdict::Undefined)
    } else if opts.n < 30 {
        (Verdict::LowPower, Verdict::LowPower)
    } else {
        let ks_ok = complete.windows(2).all(|w| w[1].ks_median <= w[0].ks_median + 1e-12);
        let hit_ok = complete.windows(2).all(|w| w[1].hit_median >= w[0].hit_median - 1e-12);
        (
            if ks_ok { Verdict::Pass } else { Verdict::Fail },
            if hit_ok { Verdict::Pass } else { Verdict::Fail },
        )
    };
    let all_pass = ks_trend == Verdict::Pass && hit_trend == Verdict::Pass;

    Ok(ComparisonReport {
        eta: opts.eta,
        n: opts.n,
        seed: opts.seed,
        eps: eps_reports,
        ks_trend,
        hit_trend,
        all_pass,
        pooled_lambda_hat: pooled,
        exit_rows,
    })
}

fn median<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn single_replication_single_eps_yields_undefined_trends() {
        let (model, _) = presets::offcenter_m032();
        let mut opts = StudyOptions::new(vec![0.5], 40, 0.2, 9);
        opts.replications = 2;
        let (_, report) = run_convergence_study(&model, &opts).unwrap();
        assert_eq!(report.ks_trend, Verdict::Undefined);
        assert_eq!(report.hit_trend, Verdict::Undefined);
        assert!(!report.all_pass);
    }

    #[test]
    fn tiny_n_marks_low_power() {
        let (model, _) = presets::offcenter_m032();
        let mut opts = StudyOptions::new(vec![0.6, 0.5], 1, 0.2, 9);
        opts.replications = 1;
        let (_, report) = run_convergence_study(&model, &opts).unwrap();
        assert_eq!(report.ks_trend, Verdict::LowPower);
    }

    #[test]
    fn zero_rate_chain_targets_single_atom_law() {
        // metamorphic: scaling all rates to zero collapses the pipeline's
        // target law to the single atom at the initial state's deadline
        let (model, _) = presets::offcenter_m032();
        let mut opts = StudyOptions::new(vec![0.5, 0.4], 250, 0.25, 31);
        opts.replications = 2;
        let (prediction, report) = run_convergence_study(&model, &opts).unwrap();
        assert_eq!(prediction.law.atoms.len(), 1);
        assert!((prediction.law.atoms[0].location - prediction.roots[0].root).abs() < 1e-12);
        // smaller eps concentrates the rescaled exit times near the atom
        let last = report.eps.last().unwrap();
        assert!(last.ks_median < 0.5, "ks {}", last.ks_median);
    }
}
