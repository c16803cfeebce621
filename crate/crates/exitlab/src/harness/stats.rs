//! Exit-point statistics against a prediction.

use crate::error::{Error, Result};
use crate::harness::predict::Prediction;
use crate::sde::ExitSample;
use nalgebra::DVector;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct StateHits {
    pub state: usize,
    pub n: usize,
    pub hits: usize,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitPointStats {
    pub per_state: Vec<StateHits>,
    pub n_uncensored: usize,
    /// Fraction of uncensored exits within eta of the exit point predicted
    /// for the chain state recorded at exit.
    pub overall_hit_rate: f64,
    /// confusion[i][j]: exits in chain state i whose nearest predicted exit
    /// point belongs to state j.
    pub confusion: Vec<Vec<usize>>,
    /// Agreement between the chain state at exit and the nearest-point label.
    pub agreement_rate: f64,
}

pub fn exit_point_stats(
    samples: &[ExitSample],
    prediction: &Prediction,
    eta: f64,
) -> Result<ExitPointStats> {
    if eta <= 0.0 {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    let s = prediction.exit_points.len();
    let targets: Vec<DVector<f64>> =
        prediction.exit_points.iter().map(|xp| xp.point_vector()).collect();
    let mut per_state: Vec<StateHits> = (0..s)
        .map(|state| StateHits { state, n: 0, hits: 0, hit_rate: 0.0 })
        .collect();
    let mut confusion = vec![vec![0usize; s]; s];
    let mut agree = 0usize;
    let mut n_uncensored = 0usize;
    let mut hits_total = 0usize;

    for sample in samples.iter().filter(|s| !s.censored) {
        n_uncensored += 1;
        let x = DVector::from_vec(sample.exit_point.clone());
        let k = sample.exit_state;
        let dist_own = (&x - &targets[k]).norm();
        per_state[k].n += 1;
        if dist_own <= eta {
            per_state[k].hits += 1;
            hits_total += 1;
        }
        let nearest = (0..s)
            .min_by(|&a, &b| {
                (&x - &targets[a]).norm().total_cmp(&(&x - &targets[b]).norm())
            })
            .unwrap();
        confusion[k][nearest] += 1;
        if nearest == k {
            agree += 1;
        }
    }

    for sh in &mut per_state {
        sh.hit_rate = if sh.n > 0 { sh.hits as f64 / sh.n as f64 } else { 0.0 };
    }
    Ok(ExitPointStats {
        per_state,
        n_uncensored,
        overall_hit_rate: if n_uncensored > 0 { hits_total as f64 / n_uncensored as f64 } else { 0.0 },
        confusion,
        agreement_rate: if n_uncensored > 0 { agree as f64 / n_uncensored as f64 } else { 0.0 },
    })
}
