//! Full problem instances: coefficients, domain, equilibrium, chain, horizon.

use crate::error::{Error, Result};
use crate::model::chain_spec::ChainSpec;
use crate::model::domain::DomainDescriptor;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Drift evaluator b(x, lambda, k); k is a 0-based state index.
pub type DriftFn = Arc<dyn Fn(&DVector<f64>, f64, usize) -> DVector<f64> + Send + Sync>;
/// Diffusion evaluator sigma(x, lambda, k), a d x d matrix.
pub type SigmaFn = Arc<dyn Fn(&DVector<f64>, f64, usize) -> DMatrix<f64> + Send + Sync>;

/// One problem instance. Immutable after construction and safe to share
/// across parallel workers.
#[derive(Clone)]
pub struct ModelSpec {
    pub dim: usize,
    pub n_states: usize,
    pub drift: DriftFn,
    pub sigma: SigmaFn,
    pub domain: DomainDescriptor,
    pub equilibrium: DVector<f64>,
    /// Confinement constant c > 0 shared by the three drift assumptions.
    pub confinement_c: f64,
    /// Radius of the attracting neighborhood of the equilibrium.
    pub confinement_r: f64,
    pub chain: ChainSpec,
    /// Horizon in lambda units; coefficients are never queried past it.
    pub horizon: f64,
    /// Declared ellipticity bounds (k, K) for a = sigma sigma^T.
    pub ellipticity: (f64, f64),
    /// Declared sup-norm bound for the drift on the closed domain.
    pub drift_bound: f64,
    /// Optional user-declared Lipschitz constant, checked by sampling only.
    pub lipschitz_bound: Option<f64>,
    /// True when sigma does not depend on position; lets gradient code skip
    /// the diffusion-derivative terms.
    pub diffusion_is_constant: bool,
}

impl ModelSpec {
    /// Diffusion matrix a = sigma sigma^T at a point.
    pub fn diffusion_matrix(&self, x: &DVector<f64>, lambda: f64, state: usize) -> DMatrix<f64> {
        let s = (self.sigma)(x, lambda, state);
        &s * s.transpose()
    }

    /// Inverse of the diffusion matrix; d is small so a dense LU is fine.
    pub fn diffusion_inverse(&self, x: &DVector<f64>, lambda: f64, state: usize) -> Result<DMatrix<f64>> {
        let a = self.diffusion_matrix(x, lambda, state);
        a.clone().try_inverse().ok_or_else(|| {
            Error::SingularMatrix(format!("a(x, {:.3}, {}) is singular", lambda, state))
        })
    }

    pub fn drift_at(&self, x: &DVector<f64>, lambda: f64, state: usize) -> DVector<f64> {
        (self.drift)(x, lambda, state)
    }

    /// Structural validation: shapes, positivity, equilibrium inside D,
    /// b(O, lambda, k) = 0, sampled positive definiteness and drift bound.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if self.n_states != self.chain.n_states() {
            return Err(Error::InvalidInput("state count disagrees with the chain".into()));
        }
        self.chain.validate()?;
        if self.confinement_c <= 0.0 || self.confinement_r <= 0.0 {
            return Err(Error::InvalidInput("confinement constants must be positive".into()));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        if self.equilibrium.len() != self.dim {
            return Err(Error::InvalidInput("equilibrium dimension mismatch".into()));
        }
        if !self.domain.contains(&self.equilibrium) {
            return Err(Error::InvalidInput("equilibrium must lie inside the domain".into()));
        }
        self.check_equilibrium_zero(100)?;
        self.check_ellipticity(64)?;
        self.check_drift_bound(64)?;
        Ok(())
    }

    /// b(O, lambda, k) = 0 at machine tolerance, over a lambda/state sweep.
    pub fn check_equilibrium_zero(&self, n_lambda: usize) -> Result<()> {
        for i in 0..n_lambda {
            let lambda = self.horizon * (i as f64 + 0.5) / n_lambda as f64;
            for k in 0..self.n_states {
                let b = self.drift_at(&self.equilibrium, lambda, k);
                if b.norm() > 1e-10 {
                    return Err(Error::InvalidInput(format!(
                        "drift at the equilibrium is {:.3e} at lambda = {:.3}, state {}",
                        b.norm(),
                        lambda,
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sampled uniform ellipticity of a = sigma sigma^T against the declared bounds.
    pub fn check_ellipticity(&self, n_samples: usize) -> Result<()> {
        let (lo, hi) = self.ellipticity;
        let pts = self.sample_points_in_domain(n_samples);
        for (x, lambda) in pts {
            for k in 0..self.n_states {
                let a = self.diffusion_matrix(&x, lambda, k);
                let sym = (&a + a.transpose()) * 0.5;
                if (&a - &sym).norm() > 1e-9 {
                    return Err(Error::InvalidInput("diffusion matrix is not symmetric".into()));
                }
                let eig = sym.symmetric_eigenvalues();
                let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if min < lo - 1e-9 || max > hi + 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "ellipticity out of bounds: eigenvalues in [{:.3e}, {:.3e}], declared [{:.3e}, {:.3e}]",
                        min, max, lo, hi
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sampled drift boundedness on the closed domain.
    pub fn check_drift_bound(&self, n_samples: usize) -> Result<()> {
        let pts = self.sample_points_in_domain(n_samples);
        for (x, lambda) in pts {
            for k in 0..self.n_states {
                let b = self.drift_at(&x, lambda, k);
                if b.norm() > self.drift_bound {
                    return Err(Error::InvalidInput(format!(
                        "drift norm {:.3} exceeds declared bound {:.3}",
                        b.norm(),
                        self.drift_bound
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sampled difference quotients against the declared Lipschitz bound.
    /// Returns the largest quotient seen; None when no bound is declared.
    pub fn check_lipschitz(&self, n_pairs: usize) -> Result<Option<f64>> {
        let Some(bound) = self.lipschitz_bound else { return Ok(None) };
        let pts = self.sample_points_in_domain(2 * n_pairs);
        let mut worst: f64 = 0.0;
        for pair in pts.chunks(2) {
            if pair.len() < 2 {
                break;
            }
            let (x, lambda) = &pair[0];
            let (y, _) = &pair[1];
            let gap = (x - y).norm();
            if gap < 1e-9 {
                continue;
            }
            for k in 0..self.n_states {
                let q = (self.drift_at(x, *lambda, k) - self.drift_at(y, *lambda, k)).norm() / gap;
                worst = worst.max(q);
            }
        }
        if worst > bound {
            return Err(Error::InvalidInput(format!(
                "sampled Lipschitz quotient {:.3} exceeds declared bound {:.3}",
                worst, bound
            )));
        }
        Ok(Some(worst))
    }

    /// Deterministic low-discrepancy-ish sweep of (point, lambda) pairs in D.
    fn sample_points_in_domain(&self, n: usize) -> Vec<(DVector<f64>, f64)> {
        use rand::Rng;
        let mut rng = crate::seeds::trajectory_rng(0x5eed, 0, crate::seeds::Stream::Chain);
        let r = self.domain.bounding_radius();
        let mut out = Vec::with_capacity(n);
        let mut guard = 0usize;
        while out.len() < n && guard < 100 * n + 1000 {
            guard += 1;
            let x = DVector::from_fn(self.dim, |_, _| rng.gen_range(-r..r));
            if self.domain.g(&x) < 0.0 {
                let lambda = rng.gen_range(0.0..self.horizon);
                out.push((x, lambda));
            }
        }
        out
    }
}
