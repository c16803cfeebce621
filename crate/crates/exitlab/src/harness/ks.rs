//! Sup-CDF distance adapted to laws with atoms.
//!
//! The limit law of the rescaled exit time is mixed: atoms at the per-state
//! deadlines plus a density in between. A plain sup |F_emp - F_law| cannot
//! register convergence in distribution toward an atom (mass smeared on both
//! sides of the atom keeps the vertical gap of order one at the atom for
//! every noise level), so both comparison directions carry the Levy-style
//! horizontal allowance: the distance is the smallest h with
//!
//!     F_law(x - h) - h <= F_emp(x) <= F_law(x + h) + h   for all x.
//!
//! For continuous laws this collapses to the classical statistic up to the
//! horizontal slack; for exact draws it obeys the usual DKW-style bound. It
//! is 1 when all mass sits at distance >= 1 from the law's support, and 0
//! only when the CDFs coincide.

use crate::chain::SigmaLaw;
use crate::error::{Error, Result};

/// CDF access shared by the analytic law and empirical samples.
trait RefCdf {
    fn cdf(&self, x: f64) -> f64;
    fn cdf_left(&self, x: f64) -> f64;
    /// Jump locations (atoms / sample values).
    fn jumps(&self) -> Vec<f64>;
}

impl RefCdf for SigmaLaw {
    fn cdf(&self, x: f64) -> f64 {
        SigmaLaw::cdf(self, x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        SigmaLaw::cdf_left(self, x)
    }
    fn jumps(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }
}

/// Sorted sample set viewed as a step CDF.
struct StepCdf<'a>(&'a [f64]);

impl RefCdf for StepCdf<'_> {
    fn cdf(&self, x: f64) -> f64 {
        self.0.partition_point(|&s| s <= x) as f64 / self.0.len() as f64
    }
    fn cdf_left(&self, x: f64) -> f64 {
        self.0.partition_point(|&s| s < x) as f64 / self.0.len() as f64
    }
    fn jumps(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.0.to_vec();
        out.dedup();
        out
    }
}

/// Distance between an empirical sample and the analytic law, in [0, 1].
pub fn ks_distance(samples: &[f64], law: &SigmaLaw) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::AllCensored);
    }
    let mut sorted = samples.to_vec();
    if sorted.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("samples must be finite".into()));
    }
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(levy_like(&StepCdf(&sorted), law))
}

/// Same distance between two empirical samples.
pub fn ks_between_samples(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::AllCensored);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.total_cmp(y));
    sb.sort_by(|x, y| x.total_cmp(y));
    Ok(levy_like(&StepCdf(&sa), &StepCdf(&sb)))
}

fn levy_like<F: RefCdf + ?Sized, G: RefCdf + ?Sized>(f: &F, g: &G) -> f64 {
    let f_jumps = f.jumps();
    let g_jumps = g.jumps();
    let feasible = |h: f64| -> bool {
        // upper band: F(x) <= G(x + h) + h, violations peak at F's jumps and
        // just left of G's jumps shifted by -h
        for &s in &f_jumps {
            if f.cdf(s) > g.cdf(s + h) + h + 1e-15 {
                return false;
            }
        }
        for &a in &g_jumps {
            if f.cdf_left(a - h) > g.cdf_left(a) + h + 1e-15 {
                return false;
            }
        }
        // lower band: G(x - h) - h <= F(x), violations peak at G's jumps
        // shifted by +h and just left of F's jumps
        for &a in &g_jumps {
            if g.cdf(a) - h > f.cdf(a + h) + 1e-15 {
                return false;
            }
        }
        for &s in &f_jumps {
            if g.cdf_left(s - h) - h > f.cdf_left(s) + 1e-15 {
                return false;
            }
        }
        true
    };

    if feasible(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::sigma_law;
    use crate::model::ChainSpec;

    fn atom_law(loc: f64) -> SigmaLaw {
        sigma_law(&ChainSpec::single_state(), &[loc]).unwrap()
    }

    #[test]
    fn samples_at_the_atom_have_zero_distance() {
        let law = atom_law(0.5);
        let samples = vec![0.5; 100];
        assert_eq!(ks_distance(&samples, &law).unwrap(), 0.0);
    }

    #[test]
    fn distant_constant_samples_saturate_at_one() {
        let law = atom_law(0.5);
        // constant below the atom at distance >= 1: early mass, vertical defect
        let below = vec![-0.6; 50];
        assert!((ks_distance(&below, &law).unwrap() - 1.0).abs() < 1e-12);
        // constant above the atom at distance >= 1: mass never arrives
        let above = vec![1.6; 50];
        assert!((ks_distance(&above, &law).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearby_constant_samples_cost_their_offset() {
        let law = atom_law(0.5);
        let shifted = vec![0.62; 400];
        let d = ks_distance(&shifted, &law).unwrap();
        assert!((d - 0.12).abs() < 1e-9, "d = {}", d);
    }

    #[test]
    fn empty_input_is_an_error() {
        let law = atom_law(0.5);
        assert!(matches!(ks_distance(&[], &law), Err(Error::AllCensored)));
    }

    #[test]
    fn exact_draws_from_two_atom_law_stay_within_dkw() {
        // atoms 0.7744 / 0.2256 at (0.3, 0.6): inverse-CDF draws
        let chain = ChainSpec::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], vec![1.0, 0.0]).unwrap();
        let law = sigma_law(&chain, &[0.3, 0.6]).unwrap();
        let n = 100_000;
        let mut samples = Vec::with_capacity(n);
        let mut rng = crate::seeds::trajectory_rng(4, 0, crate::seeds::Stream::Chain);
        use rand::Rng;
        for _ in 0..n {
            let u: f64 = rng.gen();
            // invert the mixed CDF by bisection on the law itself
            let (mut lo, mut hi) = (0.0, 0.61);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if law.cdf(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            samples.push(hi);
        }
        let d = ks_distance(&samples, &law).unwrap();
        assert!(d <= 0.01, "d = {}", d);
    }

    #[test]
    fn smeared_atom_registers_the_smear_scale_not_the_mass() {
        // mass 1 at 0.5 approximated by a tight uniform cloud around it
        let law = atom_law(0.5);
        let n = 2000;
        let samples: Vec<f64> =
            (0..n).map(|i| 0.5 + 0.08 * (i as f64 / (n - 1) as f64 - 0.5)).collect();
        let d = ks_distance(&samples, &law).unwrap();
        assert!(d < 0.05, "smear of width 0.08 must cost about 0.04, got {}", d);
        assert!(d > 0.02, "the smear is not free: {}", d);
    }

    #[test]
    fn two_sample_distance_is_symmetric_and_small_for_same_source() {
        let a: Vec<f64> = (0..500).map(|i| (i as f64 * 0.613) % 1.0).collect();
        let b: Vec<f64> = (0..500).map(|i| (i as f64 * 0.271) % 1.0).collect();
        let dab = ks_between_samples(&a, &b).unwrap();
        let dba = ks_between_samples(&b, &a).unwrap();
        assert!((dab - dba).abs() < 1e-12);
        assert!(dab < 0.05, "near-uniform samples: {}", dab);
    }
}
