//! Convex bodies in the plane and in space, together with the functionals the
//! rest of the crate is built on: support functions, widths, mean width, caps
//! and the flatness constants that bound how deep a lattice-free cap can be.
//!
//! Every point is stored as a [`Point`] (a 3-vector). Planar objects keep their
//! third coordinate at zero, which lets inner products and rotations work the
//! same way in both dimensions.

mod body;
mod cap;
mod direction;
mod flatness;

pub use body::{Ball, Body, Ellipse, Halfspace, Polytope};
pub use cap::{ball_cap_bounds, ball_cap_volume, cap_volume, sample_cap_volume, Cap};
pub use direction::{direction_grid, Dim, UnitVector};
pub(crate) use flatness::vertex_arcs;
pub use flatness::{
    cone_inradius, flatness_constants, normal_cone_2d, Arc, FlatnessConstants, DEFAULT_GRID_SIZE,
    MIN_GRID_SIZE, SAFETY_FACTOR,
};

use crate::error::{Error, Result};

pub type Point = nalgebra::Vector3<f64>;

/// Tolerance used for closed-set membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Default number of quadrature directions on the circle.
pub const DEFAULT_N_DIRS: usize = 1024;

/// Smallest direction grid accepted by [`mean_width`].
pub const MIN_N_DIRS: usize = 16;

/// A bounded convex set that lattice enumeration can scan row by row.
pub trait ConvexRegion {
    fn dim(&self) -> Dim;

    /// `max <x, dir>` over the region; `dir` need not be normalized.
    fn support_along(&self, dir: &Point) -> f64;

    /// Parameter interval `[s0, s1]` of the line `origin + s * dir` inside the
    /// region, or `None` when the line misses it. `dir` is a unit vector.
    fn chord(&self, origin: &Point, dir: &Point) -> Option<(f64, f64)>;

    fn contains(&self, x: &Point) -> bool;
}

/// Mean width `(2 / omega_d) * integral of h_K` by equal-weight quadrature on
/// [`direction_grid`]: a periodic trapezoid rule on the circle, a spherical
/// Fibonacci grid on the sphere.
pub fn mean_width(body: &Body, n_dirs: usize) -> Result<f64> {
    if n_dirs < MIN_N_DIRS {
        return Err(Error::InvalidArgument(format!(
            "mean width needs at least {MIN_N_DIRS} directions, got {n_dirs}"
        )));
    }
    let grid = direction_grid(body.dim(), n_dirs);
    Ok(mean_width_on_grid(&grid, |u| body.support(u)))
}

/// `2 * mean(h(u))` over an equal-weight direction grid.
pub(crate) fn mean_width_on_grid(grid: &[UnitVector], mut h: impl FnMut(&UnitVector) -> f64) -> f64 {
    let sum: f64 = grid.iter().map(&mut h).sum();
    2.0 * sum / grid.len() as f64
}

/// Volume of the unit ball in dimension `d` (`kappa_d`).
pub fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

pub fn width(body: &Body, u: &UnitVector) -> f64 {
    body.support(u) + body.support(&u.neg())
}

pub fn support(body: &Body, u: &UnitVector) -> f64 {
    body.support(u)
}

pub fn scale(body: &Body, lambda: f64) -> Result<Body> {
    body.scale(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn kappa_values() {
        assert_abs_diff_eq!(unit_ball_volume(1), 2.0);
        assert_abs_diff_eq!(unit_ball_volume(2), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_width_of_ball_is_diameter() {
        let disk = Body::disk(1.0).unwrap();
        assert_abs_diff_eq!(mean_width(&disk, 64).unwrap(), 2.0, epsilon = 1e-12);
        let ball = Body::ball(Point::new(0.3, -1.0, 2.0), Dim::Three, 1.5).unwrap();
        assert_abs_diff_eq!(mean_width(&ball, 2000).unwrap(), 3.0, epsilon = 1e-2);
    }

    #[test]
    fn mean_width_of_square_matches_cauchy() {
        // Cauchy: W = perimeter / pi for planar convex bodies.
        let square = Body::unit_square();
        let w = mean_width(&square, 4096).unwrap();
        assert_abs_diff_eq!(w, 4.0 / PI, epsilon = 1e-6);
    }

    #[test]
    fn mean_width_of_ellipse_matches_perimeter_integral() {
        // Oracle: perimeter of the (2,1) ellipse by composite Simpson on the
        // arc-length integrand, independent of the support function.
        let (a, b) = (2.0_f64, 1.0_f64);
        let n = 20_000;
        let f = |s: f64| (a * a * s.sin().powi(2) + b * b * s.cos().powi(2)).sqrt();
        let hstep = 2.0 * PI / n as f64;
        let mut acc = f(0.0) + f(2.0 * PI);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(k as f64 * hstep);
        }
        let perimeter = acc * hstep / 3.0;
        let ellipse = Body::ellipse(Point::zeros(), a, b, 0.3).unwrap();
        let w = mean_width(&ellipse, 1024).unwrap();
        assert_abs_diff_eq!(w, perimeter / PI, epsilon = 1e-9);
        assert_abs_diff_eq!(w, 3.0839, epsilon = 1e-4);
    }

    #[test]
    fn mean_width_rejects_small_grids() {
        assert!(mean_width(&Body::unit_square(), 8).is_err());
    }

    #[test]
    fn width_examples() {
        let disk = Body::disk(1.0).unwrap();
        assert_abs_diff_eq!(width(&disk, &UnitVector::from_angle(0.7)), 2.0, epsilon = 1e-15);
        let sq = Body::polygon(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_abs_diff_eq!(width(&sq, &UnitVector::from_angle(0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            width(&sq, &UnitVector::from_angle(PI / 4.0)),
            2f64.sqrt(),
            epsilon = 1e-15
        );
    }
}
