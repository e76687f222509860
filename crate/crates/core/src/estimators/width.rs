use super::{over_lattices, Estimate, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{
    direction_grid, flatness_constants, mean_width, mean_width_on_grid, Body, Cap, Dim, Point, UnitVector,
    DEFAULT_GRID_SIZE, MIN_N_DIRS,
};
use crate::hull::{hull_vertices, max_dot, polygon_area, Polygon};
use crate::lattice::{row_extremes, LatticeSample, SeededStream};

/// Default number of depth nodes in the cap integral.
pub const DEFAULT_N_T: usize = 64;

/// Quadrature size for ellipse perimeters; the integrand is analytic and
/// periodic, so this is exact to rounding.
const ELLIPSE_QUADRATURE: usize = 4096;

const EMPTY: &str = "empty_intersection";
const TAU_VIOLATION: &str = "tau_violation";

/// Mean width of a body as the width estimators use it. Planar bodies use
/// Cauchy's formula (perimeter over pi), exactly for disks and polygons;
/// spatial bodies use the `n_dirs` grid so that body and hull are integrated
/// by the same rule.
pub fn reference_mean_width(body: &Body, n_dirs: usize) -> Result<f64> {
    match (body.dim(), body) {
        (Dim::Two, Body::Ball(b)) => Ok(2.0 * b.radius()),
        (Dim::Two, Body::Polytope(p)) => Ok(p.perimeter() / std::f64::consts::PI),
        (Dim::Two, _) => mean_width(body, ELLIPSE_QUADRATURE),
        (Dim::Three, _) => mean_width(body, n_dirs),
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::Precondition(format!("lambda must be at least 1, got {lambda}")));
    }
    Ok(())
}

fn check_dirs(n_dirs: usize) -> Result<()> {
    if n_dirs < MIN_N_DIRS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_N_DIRS} directions, got {n_dirs}")));
    }
    Ok(())
}

/// `W(lambda K) - E W((lambda K)_L)`, averaging the width loss of the hull of
/// `lambda K ∩ L` over random lattices. A lattice missing the body counts as
/// losing the whole width and raises `empty_intersection`.
pub fn width_difference_direct(
    body: &Body,
    lambda: f64,
    n_lattices: usize,
    n_dirs: usize,
    stream: &SeededStream,
) -> Result<Estimate> {
    check_lambda(lambda)?;
    check_dirs(n_dirs)?;
    let scaled = body.scale(lambda)?;
    let w_body = reference_mean_width(&scaled, n_dirs)?;
    let grid = direction_grid(body.dim(), n_dirs);
    over_lattices(body.dim(), n_lattices, stream, |l| {
        let pts = row_extremes(&scaled, l)?;
        if pts.is_empty() {
            return Ok(Outcome { value: w_body, flags: vec![(EMPTY, 1)] });
        }
        let w_hull = match body.dim() {
            Dim::Two => {
                let hull = Polygon::from_vertices(hull_vertices(&pts));
                hull.perimeter() / std::f64::consts::PI
            }
            Dim::Three => mean_width_on_grid(&grid, |u| max_dot(&pts, u.as_point()).unwrap_or(0.0)),
        };
        Ok(Outcome::from(w_body - w_hull))
    })
}

/// `V_2(lambda K) - E V_2((lambda K)_L)` for planar bodies.
pub fn area_difference(body: &Body, lambda: f64, n_lattices: usize, stream: &SeededStream) -> Result<Estimate> {
    if body.dim() != Dim::Two {
        return Err(Error::InvalidArgument("area difference is defined for planar bodies".into()));
    }
    check_lambda(lambda)?;
    let scaled = body.scale(lambda)?;
    over_lattices(Dim::Two, n_lattices, stream, |l| area_gap(&scaled, l))
}

fn area_gap(body: &Body, lattice: &LatticeSample) -> Result<Outcome> {
    let pts = row_extremes(body, lattice)?;
    if pts.is_empty() {
        return Ok(Outcome { value: body.volume(), flags: vec![(EMPTY, 1)] });
    }
    Ok(Outcome::from(body.volume() - polygon_area(&hull_vertices(&pts))))
}

/// Trapezoid rule on `n_t` equally spaced nodes of `[0, tau]` for the
/// indicator `t < d_min`: the cap of depth `t` avoids the lattice exactly
/// when its shallowest lattice point lies deeper than `t`.
pub(crate) fn avoidance_trapezoid(d_min: f64, tau: f64, n_t: usize) -> f64 {
    let step = tau / (n_t - 1) as f64;
    let mut sum = 0.0;
    for j in 0..n_t {
        let t = j as f64 * step;
        if d_min > t {
            sum += if j == 0 || j == n_t - 1 { 0.5 } else { 1.0 };
        }
    }
    sum * step
}

/// Depth of the shallowest lattice point in the cap of depth `tau`, or
/// `None` if the cap holds no lattice point.
pub(crate) fn shallowest_depth(body: &Body, u: &UnitVector, h: f64, tau: f64, l: &LatticeSample) -> Result<Option<f64>> {
    let cap = Cap::new(body, *u, tau)?;
    let pts: Vec<Point> = row_extremes(&cap, l)?;
    Ok(max_dot(&pts, u.as_point()).map(|m| (h - m).max(0.0)))
}

pub(crate) fn check_n_t(n_t: usize) -> Result<()> {
    if n_t < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 depth nodes, got {n_t}")));
    }
    Ok(())
}

/// Width difference as `(2 / omega_d) ∫∫ P(cap avoids L) dt du`, with the
/// depth integral truncated at the flatness constant `tau`. Each lattice is
/// reused for every direction and depth node. A cap of depth `tau` that
/// holds no lattice point raises `tau_violation`.
pub fn width_difference_cap_integral(
    body: &Body,
    lambda: f64,
    n_lattices: usize,
    n_dirs: usize,
    n_t: usize,
    stream: &SeededStream,
) -> Result<Estimate> {
    check_dirs(n_dirs)?;
    check_n_t(n_t)?;
    let fc = flatness_constants(body, DEFAULT_GRID_SIZE)?;
    if !(lambda >= fc.lambda_min) {
        return Err(Error::Precondition(format!(
            "cap integral needs lambda >= lambda_min = {:.6}, got {lambda}",
            fc.lambda_min
        )));
    }
    let scaled = body.scale(lambda)?;
    let grid = direction_grid(body.dim(), n_dirs);
    let supports: Vec<f64> = grid.iter().map(|u| scaled.support(u)).collect();
    over_lattices(body.dim(), n_lattices, stream, |l| {
        let mut sum = 0.0;
        let mut violations = 0;
        for (u, &h) in grid.iter().zip(&supports) {
            let d_min = match shallowest_depth(&scaled, u, h, fc.tau, l)? {
                Some(d) => d,
                None => {
                    violations += 1;
                    f64::INFINITY
                }
            };
            sum += avoidance_trapezoid(d_min, fc.tau, n_t);
        }
        let flags = if violations > 0 { vec![(TAU_VIOLATION, violations)] } else { Vec::new() };
        Ok(Outcome { value: 2.0 * sum / n_dirs as f64, flags })
    })
}
