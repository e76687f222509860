use super::{over_lattices, Estimate, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{Body, Cap, UnitVector};
use crate::lattice::{avoids, count_points_in, SeededStream};

pub(crate) const MIN_LATTICES: usize = 100;

fn check_n(n: usize) -> Result<()> {
    if n < MIN_LATTICES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_LATTICES} lattices, got {n}")));
    }
    Ok(())
}

/// Fraction of random lattices that miss the cap `K_{t,u}`.
pub fn cap_avoidance_probability(
    body: &Body,
    t: f64,
    u: &UnitVector,
    n: usize,
    stream: &SeededStream,
) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("cap depth must be positive, got {t}")));
    }
    check_n(n)?;
    let cap = Cap::new(body, *u, t)?;
    over_lattices(body.dim(), n, stream, |l| Ok(Outcome::from(if avoids(&cap, l)? { 1.0 } else { 0.0 })))
}

/// Mean of `#(K ∩ L)`; its expectation is the volume of `K`.
pub fn expected_lattice_count(body: &Body, n: usize, stream: &SeededStream) -> Result<Estimate> {
    check_n(n)?;
    over_lattices(body.dim(), n, stream, |l| Ok(Outcome::from(count_points_in(body, l)? as f64)))
}
