//! Monte Carlo estimation for randomized integer convex hulls.
//!
//! For a convex body `K` and a random lattice `L = rho(Z^d + t)`, with `rho` a
//! uniform rotation and `t` a uniform shift, the randomized integer convex
//! hull is `K_L = conv(K ∩ L)`. This crate samples such lattices, enumerates
//! `lambda K ∩ L`, and estimates how much mean width and area the hull loses
//! as the body grows.
//!
//! ```
//! use latticehull::{geometry::Body, estimators::expected_lattice_count, lattice::SeededStream};
//!
//! let disk = Body::disk(2.0).unwrap();
//! let count = expected_lattice_count(&disk, 2000, &SeededStream::new(1, 0)).unwrap();
//! assert!((count.value - 4.0 * std::f64::consts::PI).abs() < 4.0 * count.std_error);
//! ```

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod estimators;
pub mod geometry;
pub mod hull;
pub mod lattice;

pub use error::{Error, Result};
pub use estimators::Estimate;
pub use geometry::{Body, Dim, Point, UnitVector};
pub use lattice::{LatticeSample, SeededStream};
