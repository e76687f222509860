//! Convex hulls of finite point sets and their support functionals.
//!
//! The support function of a finite set equals that of its convex hull, so
//! widths of `K_L = [K ∩ L]` can be read off the points directly. In the
//! plane the hull is still worth building: it reduces thousands of lattice
//! points to a few dozen vertices before the direction sweep.

use crate::geometry::{direction_grid, mean_width_on_grid, Body, Dim, Point, UnitVector, MIN_N_DIRS};

/// Orientation tolerance relative to the squared extent of the input.
const ORIENT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        PointCloud { points }
    }

    pub fn from_xy(points: &[(f64, f64)]) -> Self {
        PointCloud { points: points.iter().map(|&(x, y)| Point::new(x, y, 0.0)).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// A planar convex polygon with counterclockwise, strictly convex vertices.
/// A point or a segment is represented by one or two vertices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub(crate) fn from_vertices(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        match self.vertices.len() {
            0 | 1 => 0.0,
            2 => 2.0 * (self.vertices[1] - self.vertices[0]).norm(),
            n => (0..n).map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).norm()).sum(),
        }
    }

    pub fn support(&self, u: &UnitVector) -> Option<f64> {
        max_dot(&self.vertices, u.as_point())
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain. Returns the hull vertices counterclockwise,
/// starting from the lexicographically smallest point, with collinear points
/// dropped.
pub fn hull_vertices(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.iter().map(|p| Point::new(p.x, p.y, 0.0)).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let extent = {
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in &pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).amax()
    };
    let tol = ORIENT_TOL * extent * extent;

    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter() {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a counterclockwise vertex loop.
pub fn polygon_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
            a.x * b.y - a.y * b.x
        })
        .sum();
    0.5 * twice
}

pub fn convex_hull_2d(cloud: &PointCloud) -> Polygon {
    Polygon::from_vertices(hull_vertices(&cloud.points))
}

pub(crate) fn max_dot(points: &[Point], e: &Point) -> Option<f64> {
    points.iter().map(|p| p.dot(e)).reduce(f64::max)
}

/// `max <p, u>` over the cloud; `None` for an empty cloud.
pub fn support_of_points(cloud: &PointCloud, u: &UnitVector) -> Option<f64> {
    max_dot(&cloud.points, u.as_point())
}

/// Mean width of the cloud's hull by the same quadrature as
/// [`crate::geometry::mean_width`]. `None` for an empty cloud or a grid
/// smaller than the minimum.
pub fn mean_width_of_points(cloud: &PointCloud, dim: Dim, n_dirs: usize) -> Option<f64> {
    if cloud.is_empty() || n_dirs < MIN_N_DIRS {
        return None;
    }
    let grid = direction_grid(dim, n_dirs);
    Some(mean_width_on_grid(&grid, |u| support_of_points(cloud, u).unwrap_or(0.0)))
}

/// `max_u (h_K(u) - h_cloud(u))` over the direction grid: the Hausdorff
/// distance from `K` to the hull of a cloud inside `K`, as seen by the grid.
/// An empty cloud yields `+inf`.
pub fn support_gap_max(body: &Body, cloud: &PointCloud, n_dirs: usize) -> f64 {
    if cloud.is_empty() {
        return f64::INFINITY;
    }
    let pts = match body.dim() {
        Dim::Two => hull_vertices(&cloud.points),
        Dim::Three => cloud.points.clone(),
    };
    direction_grid(body.dim(), n_dirs)
        .iter()
        .map(|u| body.support(u) - max_dot(&pts, u.as_point()).unwrap_or(f64::NEG_INFINITY))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_disk_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
        let mut pts = Vec::with_capacity(n);
        while pts.len() < n {
            let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if x * x + y * y <= 1.0 {
                pts.push(Point::new(x, y, 0.0));
            }
        }
        PointCloud::new(pts)
    }

    #[test]
    fn hull_examples() {
        let tri = convex_hull_2d(&PointCloud::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.2, 0.2)]));
        assert_eq!(
            tri.vertices(),
            &[Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)]
        );
        assert_abs_diff_eq!(tri.area(), 0.5);
        let single = convex_hull_2d(&PointCloud::from_xy(&[(2.0, 3.0), (2.0, 3.0)]));
        assert_eq!(single.vertices().len(), 1);
        let seg = convex_hull_2d(&PointCloud::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]));
        assert_eq!(seg.vertices().len(), 2);
        assert_abs_diff_eq!(seg.perimeter(), 2.0 * 8f64.sqrt(), epsilon = 1e-12);
        assert!(convex_hull_2d(&PointCloud::default()).is_empty());
        // Collinear points on edges are dropped.
        let sq = convex_hull_2d(&PointCloud::from_xy(&[
            (0.0, 0.0),
            (0.5, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (0.0, 0.5),
        ]));
        assert_eq!(sq.vertices().len(), 4);
    }

    #[test]
    fn hull_contains_random_disk_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cloud = random_disk_cloud(&mut rng, 1000);
        let hull = convex_hull_2d(&cloud);
        let v = hull.vertices();
        let n = v.len();
        for p in &cloud.points {
            for i in 0..n {
                assert!(cross(&v[i], &v[(i + 1) % n], p) >= -1e-12);
            }
        }
    }

    #[test]
    fn support_examples() {
        let cloud = PointCloud::from_xy(&[(0.0, 0.0), (2.0, 0.0)]);
        assert_eq!(support_of_points(&cloud, &UnitVector::from_angle(0.0)), Some(2.0));
        assert_eq!(support_of_points(&PointCloud::default(), &UnitVector::from_angle(0.0)), None);
    }

    #[test]
    fn support_equals_hull_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let n = rng.random_range(1..60);
            let cloud = random_disk_cloud(&mut rng, n);
            let hull = convex_hull_2d(&cloud);
            for k in 0..32 {
                let u = UnitVector::from_angle(k as f64 * 0.2);
                assert_eq!(support_of_points(&cloud, &u), hull.support(&u));
            }
        }
    }

    #[test]
    fn mean_width_examples() {
        let single = PointCloud::from_xy(&[(0.3, 0.4)]);
        assert_abs_diff_eq!(mean_width_of_points(&single, Dim::Two, 64).unwrap(), 0.0, epsilon = 1e-15);
        let cross_shape = PointCloud::from_xy(&[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]);
        let w = mean_width_of_points(&cross_shape, Dim::Two, 4096).unwrap();
        assert_abs_diff_eq!(w, 4.0 * 2f64.sqrt() / PI, epsilon = 1e-6);
        assert_abs_diff_eq!(w, 1.80063, epsilon = 1e-5);
        let square = PointCloud::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_abs_diff_eq!(mean_width_of_points(&square, Dim::Two, 4096).unwrap(), 4.0 / PI, epsilon = 1e-6);
        assert_eq!(mean_width_of_points(&PointCloud::default(), Dim::Two, 64), None);
    }

    #[test]
    fn gap_examples() {
        let sq = Body::unit_square();
        let corners = PointCloud::new(sq.as_polytope().unwrap().vertices().to_vec());
        assert_abs_diff_eq!(support_gap_max(&sq, &corners, 256), 0.0, epsilon = 1e-15);
        let disk = Body::disk(1.0).unwrap();
        assert_abs_diff_eq!(support_gap_max(&disk, &PointCloud::from_xy(&[(0.0, 0.0)]), 256), 1.0);
        assert!(support_gap_max(&disk, &PointCloud::default(), 256).is_infinite());
    }

    proptest! {
        #[test]
        fn hull_is_idempotent(pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 0..80)) {
            let cloud = PointCloud::from_xy(&pts);
            let once = convex_hull_2d(&cloud);
            let twice = convex_hull_2d(&PointCloud::new(once.vertices().to_vec()));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn hull_support_matches_cloud(pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..80), theta in 0.0f64..6.3) {
            let cloud = PointCloud::from_xy(&pts);
            let u = UnitVector::from_angle(theta);
            let hull = convex_hull_2d(&cloud);
            let a = support_of_points(&cloud, &u).unwrap();
            let b = hull.support(&u).unwrap();
            // Dropped near-collinear points may sit a rounding error outside.
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
