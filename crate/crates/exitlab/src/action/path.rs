//! Discretized paths for action evaluation.

use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::Serialize;

/// Time-labelled path (t_i, phi_i) with strictly increasing times.
#[derive(Debug, Clone)]
pub struct TimedPath {
    pub times: Vec<f64>,
    pub points: Vec<DVector<f64>>,
}

impl TimedPath {
    pub fn new(times: Vec<f64>, points: Vec<DVector<f64>>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(Error::InvalidInput("need matching times and points, at least two".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("times must be strictly increasing".into()));
            }
        }
        Ok(TimedPath { times, points })
    }

    /// Samples a trajectory t -> phi(t) on a uniform grid of n+1 points.
    pub fn sample<F>(t0: f64, t1: f64, n: usize, phi: F) -> Result<Self>
    where
        F: Fn(f64) -> DVector<f64>,
    {
        if n < 1 || t1 <= t0 {
            return Err(Error::InvalidInput("need n >= 1 and t1 > t0".into()));
        }
        let times: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
        let points = times.iter().map(|&t| phi(t)).collect();
        TimedPath::new(times, points)
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Position at time t, linear interpolation between nodes.
    pub fn at(&self, t: f64) -> DVector<f64> {
        if t <= self.times[0] {
            return self.points[0].clone();
        }
        let n = self.times.len();
        if t >= self.times[n - 1] {
            return self.points[n - 1].clone();
        }
        let j = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        &self.points[j - 1] * (1.0 - w) + &self.points[j] * w
    }
}

/// Arclength-parametrized curve: points only, no time labels.
#[derive(Debug, Clone, Serialize)]
pub struct GeometricPath {
    pub points: Vec<DVector<f64>>,
}

impl GeometricPath {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two points".into()));
        }
        for w in points.windows(2) {
            if (&w[1] - &w[0]).norm() == 0.0 {
                return Err(Error::InvalidInput("consecutive path points must be distinct".into()));
            }
        }
        Ok(GeometricPath { points })
    }

    /// Straight segment from a to b with n+1 points.
    pub fn segment(a: &DVector<f64>, b: &DVector<f64>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("need at least one segment".into()));
        }
        let points = (0..=n)
            .map(|i| {
                let w = i as f64 / n as f64;
                a * (1.0 - w) + b * w
            })
            .collect();
        GeometricPath::new(points)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn total_length(&self) -> f64 {
        self.points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    /// Relative spread of chord lengths; small after reparametrization.
    pub fn chord_spread(&self) -> f64 {
        let lengths: Vec<f64> = self.points.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        if mean == 0.0 {
            return 0.0;
        }
        let max = lengths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / mean
    }

    /// Resamples to `n + 1` points equally spaced in arclength along the
    /// current polyline. Endpoints are preserved exactly.
    pub fn reparametrized(&self, n: usize) -> GeometricPath {
        let m = self.points.len();
        let mut cum = Vec::with_capacity(m);
        cum.push(0.0);
        for w in self.points.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + (&w[1] - &w[0]).norm());
        }
        let total = *cum.last().unwrap();
        if total == 0.0 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.points[0].clone());
        let mut seg = 0usize;
        for i in 1..n {
            let target = total * i as f64 / n as f64;
            while seg + 1 < m - 1 && cum[seg + 1] < target {
                seg += 1;
            }
            let denom = (cum[seg + 1] - cum[seg]).max(f64::MIN_POSITIVE);
            let w = (target - cum[seg]) / denom;
            out.push(&self.points[seg] * (1.0 - w) + &self.points[seg + 1] * w);
        }
        out.push(self.points[m - 1].clone());
        GeometricPath { points: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn timed_path_rejects_bad_times() {
        assert!(TimedPath::new(vec![0.0, 0.0], vec![v2(0.0, 0.0), v2(1.0, 0.0)]).is_err());
        assert!(TimedPath::new(vec![0.0, 1.0], vec![v2(0.0, 0.0), v2(1.0, 0.0)]).is_ok());
    }

    #[test]
    fn geometric_path_rejects_coincident_points() {
        assert!(GeometricPath::new(vec![v2(0.0, 0.0), v2(0.0, 0.0)]).is_err());
    }

    #[test]
    fn reparametrization_evens_out_chords() {
        // uneven spacing along a quarter circle, resolution typical of descent
        let pts: Vec<DVector<f64>> = (0..=64)
            .map(|i| {
                let s = (i as f64 / 64.0).powi(3);
                let t = s * std::f64::consts::FRAC_PI_2;
                v2(t.cos(), t.sin())
            })
            .collect();
        let p = GeometricPath::new(pts).unwrap();
        assert!(p.chord_spread() > 1.0, "source is uneven: {}", p.chord_spread());
        let r = p.reparametrized(64);
        assert_eq!(r.n_points(), 65);
        assert!(r.chord_spread() < 0.01, "spread {}", r.chord_spread());
        assert!((&r.points[0] - v2(1.0, 0.0)).norm() < 1e-15);
        assert!((&r.points[64] - v2(0.0, 1.0)).norm() < 1e-7);
    }
}
