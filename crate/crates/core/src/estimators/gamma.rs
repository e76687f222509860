use super::width::{avoidance_trapezoid, check_n_t, shallowest_depth};
use super::{over_lattices, Estimate, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{flatness_constants, Body, Dim, UnitVector, DEFAULT_GRID_SIZE};
use crate::lattice::SeededStream;

/// How far beyond the deepest cap the vertex cones must extend, in units of
/// `tau / min_edge`.
const CONE_SCALE: f64 = 1e4;

/// The large-scale limit of the width difference of a planar polygon:
/// `(1 / pi) * sum_v ∫_{N(v)} ∫_0^tau P((C_v)_{t,u} ∩ L = ∅) dt du`,
/// where `C_v` is the cone of the polygon at vertex `v` and `N(v)` its normal
/// cone. Each cone is represented by the polygon translated to put `v` at the
/// origin and scaled far enough that its caps of depth `tau` only see `v`.
pub fn gamma_polytope(
    polytope: &Body,
    n_lattices: usize,
    n_dirs_per_cone: usize,
    n_t: usize,
    stream: &SeededStream,
) -> Result<Estimate> {
    let p = match polytope {
        Body::Polytope(p) if p.dim() == Dim::Two => p,
        _ => return Err(Error::InvalidArgument("gamma needs a planar polygon".into())),
    };
    if p.vertices().len() < 3 {
        return Err(Error::Degenerate("polygon needs at least 3 vertices".into()));
    }
    if n_dirs_per_cone == 0 {
        return Err(Error::InvalidArgument("need at least one direction per cone".into()));
    }
    check_n_t(n_t)?;
    let fc = flatness_constants(polytope, DEFAULT_GRID_SIZE)?;
    let cone_scale = CONE_SCALE * fc.tau / p.min_edge_length();

    struct Node {
        cone: usize,
        u: UnitVector,
        h: f64,
        weight: f64,
    }
    let mut cones = Vec::new();
    let mut nodes = Vec::new();
    for (i, (v, arc)) in p.vertices().iter().zip(crate::geometry::vertex_arcs(p.vertices())).enumerate() {
        let cone = polytope.translate(&-v).scale(cone_scale)?;
        for theta in arc.midpoints(n_dirs_per_cone) {
            let u = UnitVector::from_angle(theta);
            nodes.push(Node { cone: i, u, h: cone.support(&u), weight: arc.measure / n_dirs_per_cone as f64 });
        }
        cones.push(cone);
    }

    over_lattices(Dim::Two, n_lattices, stream, |l| {
        let mut sum = 0.0;
        let mut violations = 0;
        for node in &nodes {
            let d_min = shallowest_depth(&cones[node.cone], &node.u, node.h, fc.tau, l)?.unwrap_or_else(|| {
                violations += 1;
                f64::INFINITY
            });
            sum += node.weight * avoidance_trapezoid(d_min, fc.tau, n_t);
        }
        let flags = if violations > 0 { vec![("tau_violation", violations)] } else { Vec::new() };
        Ok(Outcome { value: sum / std::f64::consts::PI, flags })
    })
}
