//! Markov chain generator and initial distribution.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

const ROW_SUM_TOL: f64 = 1e-12;

/// Generator of the continuous-time chain on states {0, .., s-1}, rates in
/// 1/lambda units, together with the initial distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSpec {
    /// s x s generator, row-major. Off-diagonal entries are jump rates.
    pub generator: Vec<Vec<f64>>,
    /// Initial distribution over states.
    pub initial: Vec<f64>,
}

impl ChainSpec {
    pub fn new(generator: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let spec = ChainSpec { generator, initial };
        spec.validate()?;
        Ok(spec)
    }

    /// Single absorbing state; the degenerate one-state chain.
    pub fn single_state() -> Self {
        ChainSpec { generator: vec![vec![0.0]], initial: vec![1.0] }
    }

    /// Unit mass on one state with the given generator.
    pub fn with_delta_initial(generator: Vec<Vec<f64>>, state: usize) -> Result<Self> {
        let s = generator.len();
        let mut initial = vec![0.0; s];
        initial[state] = 1.0;
        ChainSpec::new(generator, initial)
    }

    pub fn from_row_major(flat: &[f64], states: usize, initial: Vec<f64>) -> Result<Self> {
        if flat.len() != states * states {
            return Err(Error::InvalidInput(format!(
                "generator needs {} entries for {} states, got {}",
                states * states,
                states,
                flat.len()
            )));
        }
        let generator = (0..states)
            .map(|i| flat[i * states..(i + 1) * states].to_vec())
            .collect();
        ChainSpec::new(generator, initial)
    }

    pub fn n_states(&self) -> usize {
        self.generator.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.generator.len();
        if s == 0 {
            return Err(Error::InvalidInput("chain needs at least one state".into()));
        }
        for (i, row) in self.generator.iter().enumerate() {
            if row.len() != s {
                return Err(Error::InvalidInput(format!("generator row {} has length {}", i, row.len())));
            }
            let mut sum = 0.0;
            for (j, &q) in row.iter().enumerate() {
                if i != j && q < 0.0 {
                    return Err(Error::InvalidInput(format!("negative rate Q[{}][{}] = {}", i, j, q)));
                }
                sum += q;
            }
            if sum.abs() > ROW_SUM_TOL {
                return Err(Error::InvalidInput(format!("generator row {} sums to {:.3e}", i, sum)));
            }
        }
        if self.initial.len() != s {
            return Err(Error::InvalidInput("initial distribution length mismatch".into()));
        }
        let total: f64 = self.initial.iter().sum();
        if self.initial.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "initial distribution must be nonnegative and sum to 1, got sum {:.15}",
                total
            )));
        }
        Ok(())
    }

    pub fn generator_matrix(&self) -> DMatrix<f64> {
        let s = self.n_states();
        DMatrix::from_fn(s, s, |i, j| self.generator[i][j])
    }

    /// Total jump rate out of a state.
    pub fn exit_rate(&self, state: usize) -> f64 {
        -self.generator[state][state]
    }

    /// Applies a relabeling `perm` (new index = perm[old index]) to the chain.
    pub fn relabeled(&self, perm: &[usize]) -> ChainSpec {
        let s = self.n_states();
        let mut generator = vec![vec![0.0; s]; s];
        let mut initial = vec![0.0; s];
        for i in 0..s {
            for j in 0..s {
                generator[perm[i]][perm[j]] = self.generator[i][j];
            }
            initial[perm[i]] = self.initial[i];
        }
        ChainSpec { generator, initial }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_rates_and_rows() {
        assert!(ChainSpec::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], vec![1.0, 0.0]).is_ok());
        assert!(ChainSpec::new(vec![vec![-1.0, 0.5], vec![1.0, -1.0]], vec![1.0, 0.0]).is_err());
        assert!(ChainSpec::new(vec![vec![-1.0, 1.0], vec![-1.0, 1.0]], vec![1.0, 0.0]).is_err());
        assert!(ChainSpec::new(vec![vec![0.0]], vec![0.9]).is_err());
    }
}
