use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;

use super::body::clip_line;
use super::{unit_ball_volume, width, Body, ConvexRegion, Dim, Halfspace, Point, UnitVector, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::estimators::Estimate;
use crate::lattice::SeededStream;

/// The cap `K_{t,u} = {x in K : <x, u> >= h_K(u) - t}`.
#[derive(Clone, Debug)]
pub struct Cap<'a> {
    body: &'a Body,
    u: UnitVector,
    t: f64,
    level: f64,
}

impl<'a> Cap<'a> {
    pub fn new(body: &'a Body, u: UnitVector, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("cap depth must be nonnegative, got {t}")));
        }
        if u.dim() != body.dim() {
            return Err(Error::InvalidArgument("cap direction and body differ in dimension".into()));
        }
        let level = body.support(&u) - t;
        Ok(Cap { body, u, t, level })
    }

    pub fn body(&self) -> &Body {
        self.body
    }

    pub fn direction(&self) -> &UnitVector {
        &self.u
    }

    pub fn depth(&self) -> f64 {
        self.t
    }

    /// Height `h_K(u) - t` of the cutting hyperplane.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// How far below the supporting hyperplane `x` lies.
    pub fn depth_of(&self, x: &Point) -> f64 {
        self.level + self.t - self.u.dot(x)
    }

    /// Points spanning the cap of a polytope: the vertices above the cutting
    /// plane and the points where it crosses edges. Polygon edges join
    /// consecutive vertices; in space every straddling vertex pair is used,
    /// which adds interior points but no outside ones.
    fn polytope_cap_points(&self, vertices: &[Point]) -> Vec<Point> {
        let mut pts: Vec<Point> = vertices.iter().filter(|v| self.u.dot(v) >= self.level).copied().collect();
        let n = vertices.len();
        for (i, a) in vertices.iter().enumerate() {
            let ha = self.u.dot(a) - self.level;
            let partners = match self.body.dim() {
                Dim::Two => std::slice::from_ref(&vertices[(i + 1) % n]),
                Dim::Three => &vertices[i + 1..],
            };
            for b in partners {
                let hb = self.u.dot(b) - self.level;
                if (ha > 0.0 && hb < 0.0) || (ha < 0.0 && hb > 0.0) {
                    let s = ha / (ha - hb);
                    pts.push(a + (b - a) * s);
                }
            }
        }
        pts
    }

    /// Area of a planar polytope cap, exactly.
    pub fn polygon_area(&self) -> Option<f64> {
        let p = self.body.as_polytope()?;
        if p.dim() != Dim::Two {
            return None;
        }
        Some(crate::hull::polygon_area(&crate::hull::hull_vertices(&self.polytope_cap_points(p.vertices()))))
    }

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::zeros();
        let mut hi = Point::zeros();
        for i in 0..self.body.dim().get() {
            let mut e = Point::zeros();
            e[i] = 1.0;
            hi[i] = self.support_along(&e);
            lo[i] = -self.support_along(&-e);
        }
        (lo, hi)
    }
}

/// Support of the cap of a Euclidean ball in direction `e`.
fn ball_cap_support(center: &Point, r: f64, u: &Point, t: f64, e: &Point) -> f64 {
    let t = t.min(2.0 * r);
    let en = e.norm();
    if en == 0.0 {
        return 0.0;
    }
    let top = center + e * (r / en);
    let level = u.dot(center) + r - t;
    if u.dot(&top) >= level {
        return center.dot(e) + r * en;
    }
    let base = center + u * (r - t);
    let rho = (r * r - (r - t) * (r - t)).max(0.0).sqrt();
    let perp = e - u * u.dot(e);
    base.dot(e) + rho * perp.norm()
}

impl ConvexRegion for Cap<'_> {
    fn dim(&self) -> Dim {
        self.body.dim()
    }

    fn support_along(&self, e: &Point) -> f64 {
        let u = self.u.as_point();
        match self.body {
            Body::Ball(b) => ball_cap_support(b.center(), b.radius(), u, self.t, e),
            Body::Ellipse(el) => {
                // x = c + A y maps the unit disk onto the ellipse, and caps to caps.
                let (a, b) = el.semi_axes();
                let (ca, sa) = (el.angle().cos(), el.angle().sin());
                let at = |w: &Point| Point::new(a * (ca * w.x + sa * w.y), b * (-sa * w.x + ca * w.y), 0.0);
                let v = at(u);
                let n = v.norm();
                el.center().dot(e) + ball_cap_support(&Point::zeros(), 1.0, &(v / n), self.t / n, &at(e))
            }
            Body::Polytope(p) => self
                .polytope_cap_points(p.vertices())
                .iter()
                .map(|x| x.dot(e))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn chord(&self, origin: &Point, dir: &Point) -> Option<(f64, f64)> {
        let (lo, hi) = self.body.chord(origin, dir)?;
        let cut = Halfspace { normal: -self.u.as_point(), offset: -self.level };
        clip_line(std::slice::from_ref(&cut), origin, dir, lo, hi)
    }

    fn contains(&self, x: &Point) -> bool {
        self.u.dot(x) >= self.level - BOUNDARY_TOL && self.body.contains(x)
    }
}

/// Exact volume of a ball cap of depth `t`, clamped to the whole ball.
pub fn ball_cap_volume(r: f64, t: f64, dim: Dim) -> f64 {
    let t = t.clamp(0.0, 2.0 * r);
    match dim {
        Dim::Two => r * r * (1.0 - t / r).acos() - (r - t) * (2.0 * r * t - t * t).max(0.0).sqrt(),
        Dim::Three => PI * t * t * (3.0 * r - t) / 3.0,
    }
}

/// Lower and upper bounds `c r^{(d-1)/2} t^{(d+1)/2}` on the volume of a ball
/// cap, from an inscribed cone (`c = kappa_{d-1} / d`) and a circumscribed
/// cylinder (`c = 2^{(d-1)/2} kappa_{d-1}`) over the cap's base.
pub fn ball_cap_bounds(r: f64, t: f64, dim: Dim) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if !(0.0..=r).contains(&t) {
        return Err(Error::Precondition(format!("cap bounds need 0 <= t <= r, got t = {t}, r = {r}")));
    }
    let d = dim.get() as f64;
    let kappa = unit_ball_volume(dim.get() - 1);
    let c1 = kappa / d;
    let c2 = 2f64.powf((d - 1.0) / 2.0) * kappa;
    let shape = r.powf((d - 1.0) / 2.0) * t.powf((d + 1.0) / 2.0);
    Ok((c1 * shape, c2 * shape))
}

/// Volume of a cap. Balls use the exact formula with zero standard error;
/// other bodies use rejection sampling of `n_mc` points in the cap's bounding
/// box. Depths beyond the width clamp to the whole body and set the
/// `clamped` flag.
pub fn cap_volume(cap: &Cap<'_>, n_mc: usize, stream: &SeededStream) -> Result<Estimate> {
    if !(cap.depth() > 0.0) {
        return Err(Error::Precondition("cap volume needs t > 0".into()));
    }
    let body = cap.body();
    let mut flags = BTreeMap::new();
    if cap.depth() >= width(body, cap.direction()) {
        flags.insert("clamped".to_string(), 1);
        return Ok(Estimate::exact(body.volume(), stream.seed()).with_flags(flags));
    }
    if let Body::Ball(b) = body {
        return Ok(Estimate::exact(ball_cap_volume(b.radius(), cap.depth(), body.dim()), stream.seed()));
    }
    sample_cap_volume(cap, n_mc, stream)
}

/// Rejection-sampling estimate of a cap's volume for any body.
pub fn sample_cap_volume(cap: &Cap<'_>, n_mc: usize, stream: &SeededStream) -> Result<Estimate> {
    if n_mc < 2 {
        return Err(Error::InvalidArgument("rejection sampling needs at least 2 points".into()));
    }
    let body = cap.body();
    let (lo, hi) = cap.bounding_box();
    let d = body.dim().get();
    let box_volume: f64 = (0..d).map(|i| hi[i] - lo[i]).product();
    let mut rng = stream.rng();
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let mut x = Point::zeros();
        for i in 0..d {
            x[i] = rng.random_range(lo[i]..=hi[i]);
        }
        if cap.contains(&x) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_mc as f64;
    let n = n_mc as f64;
    // Sample standard deviation of the 0/1 indicator, scaled to volume.
    let sd = (p * (1.0 - p) * n / (n - 1.0)).sqrt();
    Ok(Estimate {
        value: box_volume * p,
        std_error: box_volume * sd / n.sqrt(),
        n_samples: n_mc,
        seed: stream.seed(),
        flags: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e1() -> UnitVector {
        UnitVector::from_angle(0.0)
    }

    /// Oracle: midpoint-rule area of `{x >= 1 - t}` inside the unit disk.
    fn disk_cap_area_by_integration(t: f64) -> f64 {
        let n = 200_000;
        let h = t / n as f64;
        (0..n)
            .map(|k| {
                let x = 1.0 - t + (k as f64 + 0.5) * h;
                2.0 * (1.0 - x * x).max(0.0).sqrt() * h
            })
            .sum()
    }

    #[test]
    fn membership_examples() {
        let disk = Body::disk(1.0).unwrap();
        let cap = Cap::new(&disk, e1(), 0.1).unwrap();
        assert!(cap.contains(&Point::new(0.95, 0.0, 0.0)));
        assert!(!cap.contains(&Point::new(0.85, 0.0, 0.0)));
        let flat = Cap::new(&disk, e1(), 0.0).unwrap();
        assert!(flat.contains(&Point::new(1.0, 0.0, 0.0)));
        assert!(!flat.contains(&Point::new(0.999, 0.0, 0.0)));
        assert!(Cap::new(&disk, e1(), -0.1).is_err());
    }

    #[test]
    fn disk_cap_volume_examples() {
        assert_abs_diff_eq!(disk_cap_area_by_integration(0.5), 0.61418, epsilon = 1e-5);
        assert_abs_diff_eq!(ball_cap_volume(1.0, 0.5, Dim::Two), disk_cap_area_by_integration(0.5), epsilon = 1e-9);
        assert_abs_diff_eq!(ball_cap_volume(1.0, 0.1, Dim::Two), disk_cap_area_by_integration(0.1), epsilon = 1e-9);
        assert_abs_diff_eq!(ball_cap_volume(1.0, 0.1, Dim::Two), 0.05871, epsilon = 5e-5);
        assert_eq!(ball_cap_volume(1.0, 0.0, Dim::Two), 0.0);
        assert_abs_diff_eq!(ball_cap_volume(1.0, 2.0, Dim::Two), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(ball_cap_volume(1.0, 2.0, Dim::Three), 4.0 * PI / 3.0, epsilon = 1e-12);

        let disk = Body::disk(1.0).unwrap();
        let stream = SeededStream::new(1, 0);
        let est = cap_volume(&Cap::new(&disk, e1(), 0.5).unwrap(), 10, &stream).unwrap();
        assert_abs_diff_eq!(est.value, 0.61418, epsilon = 1e-5);
        assert_eq!(est.std_error, 0.0);
        let clamped = cap_volume(&Cap::new(&disk, e1(), 3.0).unwrap(), 10, &stream).unwrap();
        assert_abs_diff_eq!(clamped.value, PI, epsilon = 1e-12);
        assert_eq!(clamped.flags.get("clamped"), Some(&1));
        assert!(cap_volume(&Cap::new(&disk, e1(), 0.0).unwrap(), 10, &stream).is_err());
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = ball_cap_bounds(1.0, 0.1, Dim::Two).unwrap();
        assert_abs_diff_eq!(lo, 0.031623, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 0.089443, epsilon = 1e-6);
        assert!(lo <= 0.05871 && 0.05871 <= hi);
        assert_eq!(ball_cap_bounds(1.0, 0.0, Dim::Two).unwrap(), (0.0, 0.0));
        let (lo, hi) = ball_cap_bounds(2.0, 0.5, Dim::Three).unwrap();
        assert_abs_diff_eq!(lo, PI / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, PI, epsilon = 1e-12);
        assert!(matches!(ball_cap_bounds(1.0, 1.5, Dim::Two), Err(Error::Precondition(_))));
    }

    #[test]
    fn bounds_bracket_exact_volume_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [Dim::Two, Dim::Three] {
            for _ in 0..50 {
                let r: f64 = rng.random_range(0.1..50.0);
                let t = r * rng.random_range(1e-4..=1.0);
                let (lo, hi) = ball_cap_bounds(r, t, dim).unwrap();
                let v = ball_cap_volume(r, t, dim);
                assert!(lo <= v && v <= hi, "{dim:?} r={r} t={t}: {lo} <= {v} <= {hi}");
            }
        }
    }

    #[test]
    fn rejection_sampling_agrees_with_exact_disk_caps() {
        let disk = Body::disk(1.0).unwrap();
        for (i, t) in [0.1, 0.5, 1.0].into_iter().enumerate() {
            let cap = Cap::new(&disk, e1(), t).unwrap();
            let est = sample_cap_volume(&cap, 200_000, &SeededStream::new(9, i as u64)).unwrap();
            let exact = ball_cap_volume(1.0, t, Dim::Two);
            assert!((est.value - exact).abs() <= 4.0 * est.std_error, "t={t}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn rejection_sampling_agrees_with_exact_polygon_caps() {
        let gon = Body::regular_polygon(256, 1.0).unwrap();
        for (i, t) in [0.1, 0.5, 1.0].into_iter().enumerate() {
            let cap = Cap::new(&gon, e1(), t).unwrap();
            let exact = cap.polygon_area().unwrap();
            let est = cap_volume(&cap, 200_000, &SeededStream::new(3, i as u64)).unwrap();
            assert!(est.std_error > 0.0);
            assert!((est.value - exact).abs() <= 4.0 * est.std_error, "t={t}: {} vs {exact}", est.value);
            assert_abs_diff_eq!(exact, ball_cap_volume(1.0, t, Dim::Two), epsilon = 1e-3);
        }
    }

    #[test]
    fn ellipse_cap_volume_by_sampling() {
        // The cap of an axis-aligned ellipse along its major axis is an affine
        // image of a disk cap: area = a * b * (unit disk cap of depth t / a).
        let e = Body::ellipse(Point::zeros(), 2.0, 1.0, 0.0).unwrap();
        let cap = Cap::new(&e, e1(), 0.6).unwrap();
        let exact = 2.0 * ball_cap_volume(1.0, 0.3, Dim::Two);
        let est = cap_volume(&cap, 200_000, &SeededStream::new(5, 0)).unwrap();
        assert!((est.value - exact).abs() <= 4.0 * est.std_error);
    }

    #[test]
    fn cap_support_contains_cap_points() {
        let bodies = [
            Body::disk(3.0).unwrap(),
            Body::ellipse(Point::new(0.4, 0.2, 0.0), 3.0, 1.5, 0.8).unwrap(),
            Body::regular_polygon(5, 3.0).unwrap(),
            Body::ball(Point::new(0.1, 0.2, 0.3), Dim::Three, 2.0).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for body in &bodies {
            let dim = body.dim();
            for _ in 0..20 {
                let comps: Vec<f64> = (0..dim.get()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let u = UnitVector::normalize(&comps).unwrap();
                let cap = Cap::new(body, u, rng.random_range(0.05..2.5)).unwrap();
                let (lo, hi) = cap.bounding_box();
                let r = body.circumradius() + 1.0;
                let mut found = 0;
                for _ in 0..4000 {
                    let mut x = Point::zeros();
                    for i in 0..dim.get() {
                        x[i] = rng.random_range(-r..r);
                    }
                    if cap.contains(&x) {
                        found += 1;
                        for i in 0..dim.get() {
                            assert!(x[i] >= lo[i] - 1e-9 && x[i] <= hi[i] + 1e-9, "{}", body.kind());
                        }
                    }
                }
                let _ = found;
            }
        }
    }
}
