//! Flatness constants: how deep a cap must be before it is guaranteed to
//! contain a point of every rotated and shifted copy of the integer lattice.
//!
//! For a direction `u`, let `x(u)` be a boundary point with outer normal `u`
//! and let `E` be the inscribed ball. The cone `C_u = [x(u), E ∩ u⊥]` lies in
//! the body. Its cap of depth `t` is a homothetic copy of `C_u` scaled by
//! `t / h(u)`, so it holds a ball of radius `t r(u) / h(u)`, where `r(u)` is
//! the inradius of `C_u`. Any ball of radius `sqrt(d) / 2` meets every lattice
//! `rho(Z^d + t)`, which gives
//!
//! ```text
//! tau(K)    = max_u sqrt(d) h(u) / (2 r(u))
//! lambda(K) = max_u sqrt(d) / (2 r(u))
//! ```
//!
//! with `h(u)` measured from the centre of `E`. The maxima are taken over a
//! finite direction grid and then multiplied by [`SAFETY_FACTOR`].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{direction_grid, Body, Dim, UnitVector};
use crate::error::{Error, Result};

/// Grid maxima underestimate the true suprema; this margin covers the gap.
pub const SAFETY_FACTOR: f64 = 1.25;

pub const MIN_GRID_SIZE: usize = 64;
pub const DEFAULT_GRID_SIZE: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessConstants {
    /// Cap depth beyond which no cap of `lambda K` avoids a lattice.
    pub tau: f64,
    /// Smallest admissible scale for the `tau` guarantee.
    pub lambda_min: f64,
    /// Grid maxima before the safety factor.
    pub tau_raw: f64,
    pub lambda_raw: f64,
    pub direction_grid_size: usize,
}

/// Inradius of the triangle with base `[-base_radius, base_radius]` on the
/// axis and apex at `(apex_offset, height)`.
///
/// This is also the inradius of the cone over a `(d-1)`-ball of radius
/// `base_radius` whose apex sits at that height and lateral offset: the cone
/// is symmetric about the plane through its axis and apex, and its section
/// in that plane is this triangle.
pub fn cone_inradius(height: f64, apex_offset: f64, base_radius: f64) -> f64 {
    let area = base_radius * height;
    let side_a = (apex_offset + base_radius).hypot(height);
    let side_b = (apex_offset - base_radius).hypot(height);
    area / ((2.0 * base_radius + side_a + side_b) / 2.0)
}

/// `(tau_u, lambda_u)` for one direction.
fn per_direction(body: &Body, u: &UnitVector) -> (f64, f64) {
    let (center, rho) = body.inball();
    let rel = body.support_point(u) - center;
    let height = u.dot(&rel);
    let lateral = (rel - u.as_point() * height).norm();
    let r = cone_inradius(height, lateral, rho);
    let half_diag = (body.dim().get() as f64).sqrt() / 2.0;
    (half_diag * height / r, half_diag / r)
}

pub fn flatness_constants(body: &Body, grid_size: usize) -> Result<FlatnessConstants> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::InvalidArgument(format!(
            "flatness grid needs at least {MIN_GRID_SIZE} directions, got {grid_size}"
        )));
    }
    let (mut tau_raw, mut lambda_raw) = (0.0f64, 0.0f64);
    for u in direction_grid(body.dim(), grid_size) {
        let (t, l) = per_direction(body, &u);
        tau_raw = tau_raw.max(t);
        lambda_raw = lambda_raw.max(l);
    }
    if !(tau_raw.is_finite() && lambda_raw.is_finite() && tau_raw > 0.0) {
        return Err(Error::Degenerate("flatness constants are not finite".into()));
    }
    Ok(FlatnessConstants {
        tau: SAFETY_FACTOR * tau_raw,
        lambda_min: SAFETY_FACTOR * lambda_raw,
        tau_raw,
        lambda_raw,
        direction_grid_size: grid_size,
    })
}

/// An open arc of directions on the circle, `(start, start + measure)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    /// In `[0, 2 pi)`.
    pub start: f64,
    pub measure: f64,
}

impl Arc {
    pub fn end(&self) -> f64 {
        self.start + self.measure
    }

    pub fn contains(&self, angle: f64) -> bool {
        let off = (angle - self.start).rem_euclid(2.0 * PI);
        off > 0.0 && off < self.measure
    }

    /// Midpoint-rule nodes inside the arc.
    pub fn midpoints(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let step = self.measure / n as f64;
        (0..n).map(move |k| self.start + (k as f64 + 0.5) * step)
    }
}

/// Normal cone of the polygon vertex `vertex_index` (an index into the points
/// the polygon was built from): the open arc of outer normal angles strictly
/// between the normals of its two incident edges.
pub fn normal_cone_2d(body: &Body, vertex_index: usize) -> Result<Arc> {
    let p = match body {
        Body::Polytope(p) if p.dim() == Dim::Two => p,
        _ => return Err(Error::InvalidArgument("normal cones need a planar polytope".into())),
    };
    let point = p.input_points().get(vertex_index).ok_or_else(|| {
        Error::InvalidArgument(format!("vertex index {vertex_index} out of range"))
    })?;
    let pos = p.vertices().iter().position(|v| v == point).ok_or(Error::NotExtreme(vertex_index))?;
    Ok(vertex_arc(p.vertices(), pos))
}

/// Normal cones of all extreme vertices, in counterclockwise order.
pub(crate) fn vertex_arcs(vertices: &[crate::geometry::Point]) -> Vec<Arc> {
    (0..vertices.len()).map(|i| vertex_arc(vertices, i)).collect()
}

fn vertex_arc(vertices: &[crate::geometry::Point], i: usize) -> Arc {
    let n = vertices.len();
    let normal_angle = |a: usize, b: usize| {
        let e = vertices[b] - vertices[a];
        (-e.x).atan2(e.y)
    };
    let incoming = normal_angle((i + n - 1) % n, i);
    let outgoing = normal_angle(i, (i + 1) % n);
    Arc { start: incoming.rem_euclid(2.0 * PI), measure: (outgoing - incoming).rem_euclid(2.0 * PI) }
}
