use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::Point;
use crate::error::{Error, Result};

/// Ambient dimension. Only the plane and space are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {d}"))),
        }
    }

    /// `(d - 1) / (d + 1)`, the smooth-body scaling exponent.
    pub fn smooth_exponent(self) -> f64 {
        let d = self.get() as f64;
        (d - 1.0) / (d + 1.0)
    }
}

/// A direction on the unit circle or sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector {
    v: Point,
    dim: Dim,
}

impl UnitVector {
    const NORM_TOL: f64 = 1e-12;

    /// Accepts components that already have unit norm.
    pub fn new(components: &[f64]) -> Result<Self> {
        let (v, dim) = to_point(components)?;
        if (v.norm() - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "direction {components:?} is not a unit vector"
            )));
        }
        Ok(UnitVector { v, dim })
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(components: &[f64]) -> Result<Self> {
        let (v, dim) = to_point(components)?;
        Self::from_point(v, dim)
    }

    pub(crate) fn from_point(v: Point, dim: Dim) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        let mut v = v / n;
        if dim == Dim::Two {
            v.z = 0.0;
        }
        Ok(UnitVector { v, dim })
    }

    /// Planar direction `(cos theta, sin theta)`.
    pub fn from_angle(theta: f64) -> Self {
        UnitVector { v: Point::new(theta.cos(), theta.sin(), 0.0), dim: Dim::Two }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn as_point(&self) -> &Point {
        &self.v
    }

    pub fn components(&self) -> Vec<f64> {
        self.v.iter().take(self.dim.get()).copied().collect()
    }

    pub fn neg(&self) -> Self {
        UnitVector { v: -self.v, dim: self.dim }
    }

    pub fn dot(&self, x: &Point) -> f64 {
        self.v.dot(x)
    }

    /// Polar angle in `[0, 2 pi)`; meaningful for planar directions.
    pub fn angle(&self) -> f64 {
        self.v.y.atan2(self.v.x).rem_euclid(2.0 * PI)
    }
}

fn to_point(c: &[f64]) -> Result<(Point, Dim)> {
    let dim = Dim::from_usize(c.len())?;
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("direction has non-finite components".into()));
    }
    let z = if dim == Dim::Three { c[2] } else { 0.0 };
    Ok((Point::new(c[0], c[1], z), dim))
}

/// Equal-weight quadrature directions.
///
/// In the plane these are the angles `2 pi k / n`, for which the equal-weight
/// sum is the periodic trapezoid rule. On the sphere they form a spherical
/// Fibonacci lattice.
pub fn direction_grid(dim: Dim, n: usize) -> Vec<UnitVector> {
    match dim {
        Dim::Two => (0..n)
            .map(|k| UnitVector::from_angle(2.0 * PI * k as f64 / n as f64))
            .collect(),
        Dim::Three => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    let v = Point::new(r * phi.cos(), r * phi.sin(), z);
                    UnitVector { v: v / v.norm(), dim: Dim::Three }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit_and_bad_dimension() {
        assert!(UnitVector::new(&[1.0, 1.0]).is_err());
        assert!(UnitVector::new(&[1.0]).is_err());
        assert!(UnitVector::new(&[1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(UnitVector::normalize(&[0.0, 0.0]).is_err());
        let u = UnitVector::normalize(&[3.0, 4.0]).unwrap();
        assert!((u.as_point().norm() - 1.0).abs() < 1e-15);
        assert_eq!(u.components().len(), 2);
    }

    #[test]
    fn grids_are_unit_and_balanced() {
        for dim in [Dim::Two, Dim::Three] {
            let g = direction_grid(dim, 500);
            let mut sum = Point::zeros();
            for u in &g {
                assert!((u.as_point().norm() - 1.0).abs() < 1e-12);
                sum += u.as_point();
            }
            assert!(sum.norm() / 500.0 < 1e-2, "{dim:?} grid not balanced");
        }
    }

    #[test]
    fn angle_roundtrip() {
        for k in 0..16 {
            let theta = k as f64 * 0.39;
            let u = UnitVector::from_angle(theta);
            assert!((u.angle() - theta.rem_euclid(2.0 * PI)).abs() < 1e-12);
        }
    }
}
