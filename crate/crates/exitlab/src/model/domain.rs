//! Bounded domains with smooth boundary, described as level sets {g < 0}.
//!
//! Built-in shapes (ball, ellipse) carry an analytic angle parametrization in
//! 2-d; generic implicit shapes expose Newton projection onto {g = 0} instead.

use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Implicit function together with its gradient.
pub type ImplicitFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Shape {
    Ball { center: DVector<f64>, radius: f64 },
    Ellipse { center: DVector<f64>, semi_x: f64, semi_y: f64 },
    Implicit { g: ImplicitFn, grad: GradientFn, dim: usize, bounding_radius: f64 },
}

/// A bounded domain D = {g < 0} with outward normals grad g / |grad g|.
#[derive(Clone)]
pub struct DomainDescriptor {
    shape: Shape,
    /// Floor for |grad g| on a band around the boundary.
    pub gradient_floor: f64,
}

/// Serializable description used in model configuration files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainConfig {
    Ball { radius: f64, center: Vec<f64> },
    Ellipse { semi_x: f64, semi_y: f64, center: Vec<f64> },
}

impl DomainDescriptor {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        DomainDescriptor {
            shape: Shape::Ball { center: DVector::from_vec(center), radius },
            gradient_floor: 1e-6,
        }
    }

    /// Axis-aligned ellipse (x/a)^2 + (y/b)^2 = 1, 2-d only.
    pub fn ellipse(center: Vec<f64>, semi_x: f64, semi_y: f64) -> Self {
        assert_eq!(center.len(), 2, "ellipse domains are 2-d");
        DomainDescriptor {
            shape: Shape::Ellipse { center: DVector::from_vec(center), semi_x, semi_y },
            gradient_floor: 1e-6,
        }
    }

    pub fn implicit(g: ImplicitFn, grad: GradientFn, dim: usize, bounding_radius: f64) -> Self {
        DomainDescriptor {
            shape: Shape::Implicit { g, grad, dim, bounding_radius },
            gradient_floor: 1e-6,
        }
    }

    pub fn from_config(cfg: &DomainConfig) -> Result<Self> {
        match cfg {
            DomainConfig::Ball { radius, center } => {
                if *radius <= 0.0 {
                    return Err(Error::InvalidInput("ball radius must be positive".into()));
                }
                Ok(DomainDescriptor::ball(center.clone(), *radius))
            }
            DomainConfig::Ellipse { semi_x, semi_y, center } => {
                if *semi_x <= 0.0 || *semi_y <= 0.0 {
                    return Err(Error::InvalidInput("ellipse semi-axes must be positive".into()));
                }
                if center.len() != 2 {
                    return Err(Error::InvalidInput("ellipse domains are 2-d".into()));
                }
                Ok(DomainDescriptor::ellipse(center.clone(), *semi_x, *semi_y))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } => center.len(),
            Shape::Ellipse { .. } => 2,
            Shape::Implicit { dim, .. } => *dim,
        }
    }

    /// Level-set value; negative inside D.
    pub fn g(&self, x: &DVector<f64>) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let d = x - center;
                d.norm_squared() - radius * radius
            }
            Shape::Ellipse { center, semi_x, semi_y } => {
                let dx = (x[0] - center[0]) / semi_x;
                let dy = (x[1] - center[1]) / semi_y;
                dx * dx + dy * dy - 1.0
            }
            Shape::Implicit { g, .. } => g(x),
        }
    }

    pub fn grad_g(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.shape {
            Shape::Ball { center, .. } => 2.0 * (x - center),
            Shape::Ellipse { center, semi_x, semi_y } => DVector::from_vec(vec![
                2.0 * (x[0] - center[0]) / (semi_x * semi_x),
                2.0 * (x[1] - center[1]) / (semi_y * semi_y),
            ]),
            Shape::Implicit { grad, .. } => grad(x),
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.g(x) < 0.0
    }

    /// Outward unit normal; errors when |grad g| falls below the floor.
    pub fn normal(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let grad = self.grad_g(x);
        let n = grad.norm();
        if n < self.gradient_floor {
            return Err(Error::DegenerateBoundary { grad_norm: n, floor: self.gradient_floor });
        }
        Ok(grad / n)
    }

    /// Boundary point and outward normal for a parameter value (angle in 2-d).
    pub fn boundary_point(&self, param: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        match &self.shape {
            Shape::Ball { center, radius } if center.len() == 2 => {
                let x = DVector::from_vec(vec![
                    center[0] + radius * param.cos(),
                    center[1] + radius * param.sin(),
                ]);
                let n = self.normal(&x)?;
                Ok((x, n))
            }
            Shape::Ellipse { center, semi_x, semi_y } => {
                let x = DVector::from_vec(vec![
                    center[0] + semi_x * param.cos(),
                    center[1] + semi_y * param.sin(),
                ]);
                let n = self.normal(&x)?;
                Ok((x, n))
            }
            Shape::Ball { .. } => Err(Error::Geometry(
                "parametric boundary access requires d = 2; use project_to_boundary".into(),
            )),
            Shape::Implicit { .. } => Err(Error::Geometry(
                "implicit domains expose projection, not parametrization".into(),
            )),
        }
    }

    /// Angle parameter of a point at or near the boundary (2-d shapes).
    pub fn param_of(&self, x: &DVector<f64>) -> Result<f64> {
        match &self.shape {
            Shape::Ball { center, .. } if center.len() == 2 => {
                Ok((x[1] - center[1]).atan2(x[0] - center[0]).rem_euclid(std::f64::consts::TAU))
            }
            Shape::Ellipse { center, semi_x, semi_y } => {
                Ok(((x[1] - center[1]) / semi_y)
                    .atan2((x[0] - center[0]) / semi_x)
                    .rem_euclid(std::f64::consts::TAU))
            }
            _ => Err(Error::Geometry("no angle parametrization for this shape".into())),
        }
    }

    /// True when the shape has an analytic angle parametrization.
    pub fn has_parametrization(&self) -> bool {
        match &self.shape {
            Shape::Ellipse { .. } => true,
            Shape::Ball { center, .. } => center.len() == 2,
            Shape::Implicit { .. } => false,
        }
    }

    /// Newton projection onto {g = 0} along grad g.
    pub fn project_to_boundary(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut p = x.clone();
        for _ in 0..100 {
            let v = self.g(&p);
            if v.abs() <= 1e-12 {
                return Ok(p);
            }
            let grad = self.grad_g(&p);
            let n2 = grad.norm_squared();
            if n2 < self.gradient_floor * self.gradient_floor {
                return Err(Error::DegenerateBoundary {
                    grad_norm: n2.sqrt(),
                    floor: self.gradient_floor,
                });
            }
            p -= grad * (v / n2);
        }
        let v = self.g(&p);
        if v.abs() <= 1e-10 {
            Ok(p)
        } else {
            Err(Error::Geometry(format!("boundary projection did not converge, |g| = {:.3e}", v.abs())))
        }
    }

    /// Radius of a ball around the origin guaranteed to contain D.
    pub fn bounding_radius(&self) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => center.norm() + radius,
            Shape::Ellipse { center, semi_x, semi_y } => center.norm() + semi_x.max(*semi_y),
            Shape::Implicit { bounding_radius, .. } => *bounding_radius,
        }
    }

    /// Signed distance proxy: distance to the boundary for ball/ellipse shapes.
    ///
    /// Exact for balls; for ellipses uses projection. Positive inside D.
    pub fn distance_to_boundary(&self, x: &DVector<f64>) -> Result<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => Ok(radius - (x - center).norm()),
            _ => {
                let p = self.project_to_boundary(x)?;
                let d = (x - &p).norm();
                Ok(if self.contains(x) { d } else { -d })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn unit_ball_boundary_points() {
        let d = DomainDescriptor::ball(vec![0.0, 0.0], 1.0);
        let (x, n) = d.boundary_point(0.0).unwrap();
        assert!((x - v2(1.0, 0.0)).norm() < 1e-12);
        assert!((n - v2(1.0, 0.0)).norm() < 1e-12);

        let (x, n) = d.boundary_point(std::f64::consts::FRAC_PI_2).unwrap();
        assert!((x - v2(0.0, 1.0)).norm() < 1e-12);
        assert!((n - v2(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn ellipse_boundary_point() {
        let d = DomainDescriptor::ellipse(vec![0.0, 0.0], 2.0, 1.0);
        let (x, n) = d.boundary_point(0.0).unwrap();
        assert!((&x - v2(2.0, 0.0)).norm() < 1e-12);
        assert!((n - v2(1.0, 0.0)).norm() < 1e-12);
        assert!(d.g(&x).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_satisfy_level_set_and_unit_normal() {
        let d = DomainDescriptor::ellipse(vec![0.3, -0.1], 1.5, 0.8);
        for i in 0..32 {
            let theta = i as f64 * std::f64::consts::TAU / 32.0;
            let (x, n) = d.boundary_point(theta).unwrap();
            assert!(d.g(&x).abs() <= 1e-10);
            assert!((n.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_lands_on_boundary() {
        let d = DomainDescriptor::ball(vec![0.5, 0.0], 1.0);
        let p = d.project_to_boundary(&v2(2.0, 1.0)).unwrap();
        assert!(d.g(&p).abs() < 1e-10);
    }
}
