use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use super::{unit_ball_volume, ConvexRegion, Dim, Point, UnitVector, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::hull;

/// A convex body with nonempty interior and an exact support function.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Ball(Ball),
    Polytope(Polytope),
    /// Planar only.
    Ellipse(Ellipse),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
    dim: Dim,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse {
    center: Point,
    a: f64,
    b: f64,
    angle: f64,
    cos: f64,
    sin: f64,
}

/// `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Point,
    pub offset: f64,
}

/// A polytope given by its vertices, with the facet description and the
/// Chebyshev ball computed once at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: Dim,
    input: Vec<Point>,
    /// Extreme points; counterclockwise in the plane.
    vertices: Vec<Point>,
    facets: Vec<Halfspace>,
    volume: f64,
    inball: (Point, f64),
}

impl Ball {
    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl Ellipse {
    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Radius of the largest disk that rolls freely inside: `b^2 / a`.
    pub fn rolling_radius(&self) -> f64 {
        self.b * self.b / self.a
    }

    /// Coordinates in the frame of the principal axes.
    fn to_frame(&self, x: &Point) -> (f64, f64) {
        (self.cos * x.x + self.sin * x.y, -self.sin * x.x + self.cos * x.y)
    }

    fn to_world(&self, x: f64, y: f64) -> Point {
        Point::new(self.cos * x - self.sin * y, self.sin * x + self.cos * y, 0.0)
    }
}

impl Polytope {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Extreme vertices; counterclockwise in the plane.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// The points the polytope was built from, in input order.
    pub fn input_points(&self) -> &[Point] {
        &self.input
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    /// Length of the shortest edge (planar polytopes).
    pub fn min_edge_length(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).norm()).sum()
    }

    fn from_points(points: &[Point], dim: Dim) -> Result<Self> {
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Degenerate("non-finite vertex".into()));
        }
        let input: Vec<Point> = points
            .iter()
            .map(|p| if dim == Dim::Two { Point::new(p.x, p.y, 0.0) } else { *p })
            .collect();
        let (vertices, facets) = match dim {
            Dim::Two => planar_facets(&input)?,
            Dim::Three => spatial_facets(&input)?,
        };
        let volume = match dim {
            Dim::Two => hull::polygon_area(&vertices),
            Dim::Three => spatial_volume(&vertices, &facets),
        };
        if !(volume > 0.0) {
            return Err(Error::Degenerate("polytope has zero volume".into()));
        }
        let inball = chebyshev_ball(&facets, dim)?;
        Ok(Polytope { dim, input, vertices, facets, volume, inball })
    }
}

fn planar_facets(points: &[Point]) -> Result<(Vec<Point>, Vec<Halfspace>)> {
    let vertices = hull::hull_vertices(points);
    if vertices.len() < 3 {
        return Err(Error::Degenerate(format!(
            "{} points do not span the plane",
            points.len()
        )));
    }
    let n = vertices.len();
    let facets = (0..n)
        .map(|i| {
            let p = vertices[i];
            let e = vertices[(i + 1) % n] - p;
            let normal = Point::new(e.y, -e.x, 0.0).normalize();
            Halfspace { normal, offset: normal.dot(&p) }
        })
        .collect();
    Ok((vertices, facets))
}

/// Facets of a spatial polytope by testing every vertex triple. Quartic in
/// the vertex count, which is fine for the handful of vertices used here.
fn spatial_facets(points: &[Point]) -> Result<(Vec<Point>, Vec<Halfspace>)> {
    let mut pts: Vec<Point> = Vec::with_capacity(points.len());
    let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1.0);
    let eps = 1e-10 * scale;
    for p in points {
        if !pts.iter().any(|q| (q - p).norm() <= eps) {
            pts.push(*p);
        }
    }
    let n = pts.len();
    let mut facets: Vec<Halfspace> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let cross = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                if cross.norm() <= eps * scale {
                    continue;
                }
                let mut normal = cross.normalize();
                let mut offset = normal.dot(&pts[i]);
                let above = pts.iter().filter(|p| normal.dot(p) > offset + eps).count();
                let below = pts.iter().filter(|p| normal.dot(p) < offset - eps).count();
                if above > 0 && below > 0 {
                    continue;
                }
                if above > 0 {
                    normal = -normal;
                    offset = -offset;
                }
                let dup = facets
                    .iter()
                    .any(|f| (f.normal - normal).norm() <= 1e-9 && (f.offset - offset).abs() <= eps);
                if !dup {
                    facets.push(Halfspace { normal, offset });
                }
            }
        }
    }
    if facets.len() < 4 {
        return Err(Error::Degenerate("points do not span space".into()));
    }
    // A vertex of a 3-polytope lies on at least three facets; boundary points
    // inside edges or facets lie on at most two.
    let vertices: Vec<Point> = pts
        .into_iter()
        .filter(|p| facets.iter().filter(|f| (f.normal.dot(p) - f.offset).abs() <= eps).count() >= 3)
        .collect();
    Ok((vertices, facets))
}

fn spatial_volume(vertices: &[Point], facets: &[Halfspace]) -> f64 {
    let scale = vertices.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1.0);
    let eps = 1e-9 * scale;
    let mut volume = 0.0;
    for f in facets {
        let on: Vec<Point> =
            vertices.iter().filter(|p| (f.normal.dot(p) - f.offset).abs() <= eps).copied().collect();
        if on.len() < 3 {
            continue;
        }
        let centroid = on.iter().sum::<Point>() / on.len() as f64;
        let e1 = (on[0] - centroid).normalize();
        let e2 = f.normal.cross(&e1);
        let mut ordered: Vec<(f64, Point)> = on
            .iter()
            .map(|p| {
                let d = p - centroid;
                (d.dot(&e2).atan2(d.dot(&e1)), *p)
            })
            .collect();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m = ordered.len();
        let area: f64 = (0..m)
            .map(|i| {
                let a = ordered[i].1 - centroid;
                let b = ordered[(i + 1) % m].1 - centroid;
                0.5 * a.cross(&b).dot(&f.normal)
            })
            .sum();
        volume += f.offset * area / 3.0;
    }
    volume
}

/// Largest inscribed ball: maximize `r` subject to `<n_i, c> + r <= b_i`.
///
/// The optimum of this small linear program is attained at a basic solution
/// where `d + 1` constraints are tight, so every such solution is enumerated.
/// When the optimum is not unique the average of the optimal basic solutions
/// is returned, which keeps symmetric bodies centered.
fn chebyshev_ball(facets: &[Halfspace], dim: Dim) -> Result<(Point, f64)> {
    let m = facets.len();
    let scale = facets.iter().map(|f| f.offset.abs()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-9 * scale;
    let mut best = f64::NEG_INFINITY;
    let mut optima: Vec<(Point, f64)> = Vec::new();
    let mut consider = |c: Point, r: f64| {
        if !(r.is_finite() && c.iter().all(|x| x.is_finite())) {
            return;
        }
        if facets.iter().any(|f| f.normal.dot(&c) + r > f.offset + tol) {
            return;
        }
        if r > best + tol {
            best = r;
            optima.retain(|(_, r0)| *r0 >= r - tol);
        }
        if r >= best - tol {
            optima.push((c, r));
        }
    };
    match dim {
        Dim::Two => {
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        let rows = [&facets[i], &facets[j], &facets[k]];
                        let a = Matrix3::from_fn(|r, c| match c {
                            0 => rows[r].normal.x,
                            1 => rows[r].normal.y,
                            _ => 1.0,
                        });
                        let b = Vector3::new(rows[0].offset, rows[1].offset, rows[2].offset);
                        if let Some(x) = a.lu().solve(&b) {
                            consider(Point::new(x[0], x[1], 0.0), x[2]);
                        }
                    }
                }
            }
        }
        Dim::Three => {
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        for l in k + 1..m {
                            let rows = [&facets[i], &facets[j], &facets[k], &facets[l]];
                            let a = Matrix4::from_fn(|r, c| if c < 3 { rows[r].normal[c] } else { 1.0 });
                            let b = Vector4::new(
                                rows[0].offset,
                                rows[1].offset,
                                rows[2].offset,
                                rows[3].offset,
                            );
                            if let Some(x) = a.lu().solve(&b) {
                                consider(Point::new(x[0], x[1], x[2]), x[3]);
                            }
                        }
                    }
                }
            }
        }
    }
    optima.retain(|(_, r)| *r >= best - tol);
    if optima.is_empty() || !(best > 0.0) {
        return Err(Error::Degenerate("no inscribed ball".into()));
    }
    let center = optima.iter().map(|(c, _)| c).sum::<Point>() / optima.len() as f64;
    Ok((center, best))
}

impl Body {
    pub fn ball(center: Point, dim: Dim, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        let mut center = center;
        if dim == Dim::Two {
            center.z = 0.0;
        }
        Ok(Body::Ball(Ball { center, radius, dim }))
    }

    /// Disk of the given radius centered at the origin.
    pub fn disk(radius: f64) -> Result<Self> {
        Body::ball(Point::zeros(), Dim::Two, radius)
    }

    /// Ellipse with semi-axes `a >= b > 0`, the major axis at `angle` radians.
    pub fn ellipse(center: Point, a: f64, b: f64, angle: f64) -> Result<Self> {
        if !(b > 0.0 && a >= b && a.is_finite() && angle.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ellipse needs semi-axes a >= b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Body::Ellipse(Ellipse {
            center: Point::new(center.x, center.y, 0.0),
            a,
            b,
            angle,
            cos: angle.cos(),
            sin: angle.sin(),
        }))
    }

    pub fn polytope(points: &[Point], dim: Dim) -> Result<Self> {
        Polytope::from_points(points, dim).map(Body::Polytope)
    }

    pub fn polygon(points: &[(f64, f64)]) -> Result<Self> {
        let pts: Vec<Point> = points.iter().map(|&(x, y)| Point::new(x, y, 0.0)).collect();
        Body::polytope(&pts, Dim::Two)
    }

    /// The square `[-1/2, 1/2]^2`.
    pub fn unit_square() -> Self {
        Body::polygon(&[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])
            .expect("unit square is a valid polygon")
    }

    /// Regular `n`-gon with the given circumradius, centered at the origin,
    /// with a vertex on the positive x axis.
    pub fn regular_polygon(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("a polygon needs at least 3 vertices, got {n}")));
        }
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (circumradius * a.cos(), circumradius * a.sin())
            })
            .collect();
        Body::polygon(&pts)
    }

    /// Axis-parallel cube of the given side, centered at the origin.
    pub fn cube(side: f64) -> Result<Self> {
        let h = side / 2.0;
        let mut pts = Vec::with_capacity(8);
        for sx in [-h, h] {
            for sy in [-h, h] {
                for sz in [-h, h] {
                    pts.push(Point::new(sx, sy, sz));
                }
            }
        }
        Body::polytope(&pts, Dim::Three)
    }

    /// Parses the polygon text format: one vertex `x y` per line, `#` starts
    /// a comment, blank lines are ignored.
    pub fn parse_polygon(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected two numbers, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("bad number {s:?}") })
            };
            pts.push((parse(fields[0])?, parse(fields[1])?));
        }
        Body::polygon(&pts)
    }

    pub fn dim(&self) -> Dim {
        match self {
            Body::Ball(b) => b.dim,
            Body::Polytope(p) => p.dim,
            Body::Ellipse(_) => Dim::Two,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Body::Ball(_) => "ball",
            Body::Polytope(_) => "polytope",
            Body::Ellipse(_) => "ellipse",
        }
    }

    /// Balls and ellipses have a rolling inner ball; polytopes do not.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Body::Polytope(_))
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            Body::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn support(&self, u: &UnitVector) -> f64 {
        self.support_vec(u.as_point())
    }

    /// Support function extended positively homogeneously to all vectors.
    pub fn support_vec(&self, e: &Point) -> f64 {
        match self {
            Body::Ball(b) => {
                let len = match b.dim {
                    Dim::Two => e.x.hypot(e.y),
                    Dim::Three => e.norm(),
                };
                b.center.dot(e) + b.radius * len
            }
            Body::Polytope(p) => {
                p.vertices.iter().map(|v| v.dot(e)).fold(f64::NEG_INFINITY, f64::max)
            }
            Body::Ellipse(el) => {
                let (x, y) = el.to_frame(e);
                el.center.dot(e) + (el.a * x).hypot(el.b * y)
            }
        }
    }

    /// A boundary point with outer normal `u`. For polytopes this is the
    /// first maximizing vertex.
    pub fn support_point(&self, u: &UnitVector) -> Point {
        let e = u.as_point();
        match self {
            Body::Ball(b) => b.center + e * b.radius,
            Body::Polytope(p) => {
                let mut best = p.vertices[0];
                let mut best_val = best.dot(e);
                for v in &p.vertices[1..] {
                    let val = v.dot(e);
                    if val > best_val {
                        best = *v;
                        best_val = val;
                    }
                }
                best
            }
            Body::Ellipse(el) => {
                let (x, y) = el.to_frame(e);
                let s = (el.a * x).hypot(el.b * y);
                el.center + el.to_world(el.a * el.a * x / s, el.b * el.b * y / s)
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Body::Ball(b) => unit_ball_volume(b.dim.get()) * b.radius.powi(b.dim.get() as i32),
            Body::Polytope(p) => p.volume,
            Body::Ellipse(e) => std::f64::consts::PI * e.a * e.b,
        }
    }

    /// Center and radius of the inscribed ball used by the flatness bound:
    /// the ball itself, the disk of radius `b` for an ellipse, the Chebyshev
    /// ball for a polytope.
    pub fn inball(&self) -> (Point, f64) {
        match self {
            Body::Ball(b) => (b.center, b.radius),
            Body::Polytope(p) => p.inball,
            Body::Ellipse(e) => (e.center, e.b),
        }
    }

    /// Radius of a ball that rolls freely inside the body, when known.
    pub fn rolling_radius(&self) -> Option<f64> {
        match self {
            Body::Ball(b) => Some(b.radius),
            Body::Polytope(_) => None,
            Body::Ellipse(e) => Some(e.rolling_radius()),
        }
    }

    /// `max |x|` over the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            Body::Ball(b) => b.center.norm() + b.radius,
            Body::Polytope(p) => p.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Body::Ellipse(e) => e.center.norm() + e.a,
        }
    }

    /// `lambda * K`, scaling about the origin, so that support values scale
    /// exactly by `lambda`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {lambda}")));
        }
        Ok(match self {
            Body::Ball(b) => Body::Ball(Ball { center: b.center * lambda, radius: b.radius * lambda, dim: b.dim }),
            Body::Ellipse(e) => Body::Ellipse(Ellipse {
                center: e.center * lambda,
                a: e.a * lambda,
                b: e.b * lambda,
                ..e.clone()
            }),
            Body::Polytope(p) => Body::Polytope(Polytope {
                dim: p.dim,
                input: p.input.iter().map(|v| v * lambda).collect(),
                vertices: p.vertices.iter().map(|v| v * lambda).collect(),
                facets: p
                    .facets
                    .iter()
                    .map(|f| Halfspace { normal: f.normal, offset: f.offset * lambda })
                    .collect(),
                volume: p.volume * lambda.powi(p.dim.get() as i32),
                inball: (p.inball.0 * lambda, p.inball.1 * lambda),
            }),
        })
    }

    pub fn translate(&self, v: &Point) -> Self {
        let mut v = *v;
        if self.dim() == Dim::Two {
            v.z = 0.0;
        }
        match self {
            Body::Ball(b) => Body::Ball(Ball { center: b.center + v, ..b.clone() }),
            Body::Ellipse(e) => Body::Ellipse(Ellipse { center: e.center + v, ..e.clone() }),
            Body::Polytope(p) => Body::Polytope(Polytope {
                dim: p.dim,
                input: p.input.iter().map(|x| x + v).collect(),
                vertices: p.vertices.iter().map(|x| x + v).collect(),
                facets: p
                    .facets
                    .iter()
                    .map(|f| Halfspace { normal: f.normal, offset: f.offset + f.normal.dot(&v) })
                    .collect(),
                volume: p.volume,
                inball: (p.inball.0 + v, p.inball.1),
            }),
        }
    }
}

/// Roots of `a s^2 + b s + c = 0` for `a > 0`, in increasing order.
fn quadratic_interval(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Avoid cancellation in the smaller-magnitude root.
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

impl ConvexRegion for Body {
    fn dim(&self) -> Dim {
        Body::dim(self)
    }

    fn support_along(&self, dir: &Point) -> f64 {
        self.support_vec(dir)
    }

    fn chord(&self, origin: &Point, dir: &Point) -> Option<(f64, f64)> {
        match self {
            Body::Ball(b) => {
                let w = origin - b.center;
                quadratic_interval(dir.norm_squared(), 2.0 * dir.dot(&w), w.norm_squared() - b.radius * b.radius)
            }
            Body::Ellipse(e) => {
                let (ox, oy) = e.to_frame(&(origin - e.center));
                let (dx, dy) = e.to_frame(dir);
                let (ia, ib) = (1.0 / (e.a * e.a), 1.0 / (e.b * e.b));
                quadratic_interval(
                    dx * dx * ia + dy * dy * ib,
                    2.0 * (ox * dx * ia + oy * dy * ib),
                    ox * ox * ia + oy * oy * ib - 1.0,
                )
            }
            Body::Polytope(p) => clip_line(&p.facets, origin, dir, f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn contains(&self, x: &Point) -> bool {
        match self {
            Body::Ball(b) => (x - b.center).norm() <= b.radius + BOUNDARY_TOL,
            Body::Polytope(p) => p.facets.iter().all(|f| f.normal.dot(x) <= f.offset + BOUNDARY_TOL),
            Body::Ellipse(e) => {
                let (u, v) = e.to_frame(&(x - e.center));
                let r = (u / e.a).hypot(v / e.b);
                r <= 1.0 + BOUNDARY_TOL / e.b
            }
        }
    }
}

/// Intersects the parameter interval `[lo, hi]` of a line with halfspaces.
pub(crate) fn clip_line(
    halfspaces: &[Halfspace],
    origin: &Point,
    dir: &Point,
    mut lo: f64,
    mut hi: f64,
) -> Option<(f64, f64)> {
    for f in halfspaces {
        let nd = f.normal.dot(dir);
        let rhs = f.offset - f.normal.dot(origin);
        if nd > 0.0 {
            hi = hi.min(rhs / nd);
        } else if nd < 0.0 {
            lo = lo.max(rhs / nd);
        } else if rhs < -BOUNDARY_TOL {
            return None;
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo, hi))
}
