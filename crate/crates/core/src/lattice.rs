//! Random lattices `L = rho(Z^d + t)` and enumeration of their points inside
//! convex regions.
//!
//! A lattice is sampled from the uniform measure: `rho` Haar-distributed on
//! `SO(d)` and `t` uniform on `[0, 1)^d`. Enumeration works in lattice
//! coordinates: every lattice row parallel to the last basis vector meets a
//! convex region in an interval, found from the region's chord, so the cost
//! is one chord per row plus one membership test per reported point.

use nalgebra::Matrix3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexRegion, Dim, Point};

/// A reproducible random stream: identical `(seed, stream_index)` pairs give
/// identical draws, distinct stream indices give independent streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        SeededStream { seed, stream_index }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_index.to_le_bytes());
        key[16..].copy_from_slice(b"latticehull-rng\0");
        key
    }

    /// Generator for sample `i`. Samples are keyed by index, never by the
    /// worker that draws them, so parallel runs reproduce serial ones.
    pub fn sample_rng(&self, i: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(i);
        rng
    }

    /// A single generator for serial use.
    pub fn rng(&self) -> ChaCha8Rng {
        self.sample_rng(u64::MAX)
    }

    /// An independent stream derived from this one.
    pub fn child(&self, k: u64) -> SeededStream {
        SeededStream { seed: self.seed, stream_index: splitmix64(self.stream_index ^ splitmix64(k)) }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A proper rotation, stored as a 3x3 matrix; planar rotations act on the
/// first two coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    m: Matrix3<f64>,
    dim: Dim,
}

impl Rotation {
    const TOL: f64 = 1e-10;

    pub fn identity(dim: Dim) -> Self {
        Rotation { m: Matrix3::identity(), dim }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Rotation { m: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0), dim: Dim::Two }
    }

    /// Checks orthogonality and unit determinant.
    pub fn from_matrix(m: Matrix3<f64>, dim: Dim) -> Result<Self> {
        let rot = Rotation { m, dim };
        if rot.orthogonality_error() > Self::TOL || (m.determinant() - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidArgument("matrix is not a rotation".into()));
        }
        if dim == Dim::Two && (m[(2, 2)] != 1.0 || m[(0, 2)] != 0.0 || m[(1, 2)] != 0.0) {
            return Err(Error::InvalidArgument("planar rotation must fix the third axis".into()));
        }
        Ok(rot)
    }

    /// Haar-uniform rotation. In the plane a uniform angle; in space the Q
    /// factor of a Gaussian matrix with the signs of R's diagonal moved into
    /// Q, then one column negated if the determinant is -1.
    pub fn sample<R: Rng + ?Sized>(dim: Dim, rng: &mut R) -> Self {
        match dim {
            Dim::Two => Rotation::from_angle(rng.random::<f64>() * std::f64::consts::TAU),
            Dim::Three => {
                let g = Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                let qr = g.qr();
                let (mut q, r) = (qr.q(), qr.r());
                for j in 0..3 {
                    if r[(j, j)] < 0.0 {
                        q.column_mut(j).neg_mut();
                    }
                }
                if q.determinant() < 0.0 {
                    q.column_mut(0).neg_mut();
                }
                Rotation { m: q, dim }
            }
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.m * x
    }

    pub fn apply_inverse(&self, x: &Point) -> Point {
        self.m.transpose() * x
    }

    /// `max |R^T R - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        (self.m.transpose() * self.m - Matrix3::identity()).amax()
    }
}

/// One lattice `rho(Z^d + t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSample {
    rotation: Rotation,
    translation: Point,
}

impl LatticeSample {
    pub fn new(rotation: Rotation, translation: &[f64]) -> Result<Self> {
        let d = rotation.dim().get();
        if translation.len() != d || translation.iter().any(|x| !(0.0..1.0).contains(x)) {
            return Err(Error::InvalidArgument(format!(
                "translation must have {d} components in [0, 1), got {translation:?}"
            )));
        }
        let mut t = Point::zeros();
        t.as_mut_slice()[..d].copy_from_slice(translation);
        Ok(LatticeSample { rotation, translation: t })
    }

    /// `Z^d` itself.
    pub fn integer(dim: Dim) -> Self {
        LatticeSample { rotation: Rotation::identity(dim), translation: Point::zeros() }
    }

    pub fn sample<R: Rng + ?Sized>(dim: Dim, rng: &mut R) -> Self {
        let rotation = Rotation::sample(dim, rng);
        let mut translation = Point::zeros();
        for i in 0..dim.get() {
            translation[i] = rng.random::<f64>();
        }
        LatticeSample { rotation, translation }
    }

    pub fn dim(&self) -> Dim {
        self.rotation.dim()
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn translation(&self) -> &Point {
        &self.translation
    }

    /// The lattice point `rho(z + t)`.
    pub fn point(&self, z: [i64; 3]) -> Point {
        let m = self.rotation.matrix();
        let mut x = Point::zeros();
        for (i, (zi, ti)) in z.iter().zip(self.translation.iter()).take(self.dim().get()).enumerate() {
            x += m.column(i) * (*zi as f64 + ti);
        }
        x
    }
}

pub fn sample_rotation<R: Rng + ?Sized>(dim: Dim, rng: &mut R) -> Rotation {
    Rotation::sample(dim, rng)
}

pub fn sample_lattice<R: Rng + ?Sized>(dim: Dim, rng: &mut R) -> LatticeSample {
    LatticeSample::sample(dim, rng)
}

/// Slack added to chord endpoints before membership tests decide.
const CHORD_SLACK: f64 = 1e-9;

/// Integer range of lattice coordinate `i` covered by the region.
pub(crate) fn coordinate_range<R: ConvexRegion + ?Sized>(
    region: &R,
    lattice: &LatticeSample,
    i: usize,
) -> Result<(i64, i64)> {
    let col: Point = lattice.rotation().matrix().column(i).into();
    let hi = region.support_along(&col) - lattice.translation()[i];
    let lo = -region.support_along(&-col) - lattice.translation()[i];
    if !(lo.is_finite() && hi.is_finite()) || (hi - lo) > 1e12 {
        return Err(Error::Unbounded);
    }
    Ok(((lo - CHORD_SLACK).ceil() as i64, (hi + CHORD_SLACK).floor() as i64))
}

/// Calls `visit(prefix, first, last)` for every lattice row that meets the
/// region, where `prefix` fixes all but the last lattice coordinate and
/// `first..=last` are the last coordinates of the points inside.
fn scan_rows<R: ConvexRegion + ?Sized>(
    region: &R,
    lattice: &LatticeSample,
    mut visit: impl FnMut([i64; 3], i64, i64),
) -> Result<()> {
    let d = lattice.dim().get();
    if region.dim() != lattice.dim() {
        return Err(Error::InvalidArgument("region and lattice differ in dimension".into()));
    }
    let last = d - 1;
    let dir: Point = lattice.rotation().matrix().column(last).into();
    let mut ranges = [(0i64, 0i64); 2];
    for (i, r) in ranges.iter_mut().enumerate().take(last) {
        *r = coordinate_range(region, lattice, i)?;
    }
    let (r1, r2) = (ranges[0], if d == 3 { ranges[1] } else { (0, 0) });
    for z1 in r1.0..=r1.1 {
        for z2 in r2.0..=r2.1 {
            let mut prefix = [z1, z2, 0];
            if d == 2 {
                prefix = [z1, 0, 0];
            }
            // Row origin: the lattice point with last coordinate zero.
            let origin = lattice.point(prefix) - dir * lattice.translation()[last];
            let Some((s0, s1)) = region.chord(&origin, &dir) else { continue };
            let t_last = lattice.translation()[last];
            let mut lo = (s0 - t_last - CHORD_SLACK * (1.0 + s0.abs())).ceil() as i64;
            let mut hi = (s1 - t_last + CHORD_SLACK * (1.0 + s1.abs())).floor() as i64;
            let at = |k: i64| {
                let mut z = prefix;
                z[last] = k;
                lattice.point(z)
            };
            while lo <= hi && !region.contains(&at(lo)) {
                lo += 1;
            }
            while hi >= lo && !region.contains(&at(hi)) {
                hi -= 1;
            }
            if lo <= hi {
                visit(prefix, lo, hi);
            }
        }
    }
    Ok(())
}

/// All points of `L` inside the (closed) region.
pub fn lattice_points_in<R: ConvexRegion + ?Sized>(region: &R, lattice: &LatticeSample) -> Result<Vec<Point>> {
    let last = lattice.dim().get() - 1;
    let mut pts = Vec::new();
    scan_rows(region, lattice, |prefix, lo, hi| {
        for k in lo..=hi {
            let mut z = prefix;
            z[last] = k;
            pts.push(lattice.point(z));
        }
    })?;
    Ok(pts)
}

/// The first and last lattice point of every row inside the region. Every
/// other point lies between two of these, so this subset has the same convex
/// hull, and the same maximum of any linear functional, as the full set.
pub fn row_extremes<R: ConvexRegion + ?Sized>(region: &R, lattice: &LatticeSample) -> Result<Vec<Point>> {
    let last = lattice.dim().get() - 1;
    let mut pts = Vec::new();
    scan_rows(region, lattice, |prefix, lo, hi| {
        let mut z = prefix;
        z[last] = lo;
        pts.push(lattice.point(z));
        if hi > lo {
            z[last] = hi;
            pts.push(lattice.point(z));
        }
    })?;
    Ok(pts)
}

/// `#(region ∩ L)`.
pub fn count_points_in<R: ConvexRegion + ?Sized>(region: &R, lattice: &LatticeSample) -> Result<u64> {
    let mut n = 0u64;
    scan_rows(region, lattice, |_, lo, hi| n += (hi - lo + 1) as u64)?;
    Ok(n)
}

/// Whether the region contains no point of `L`.
pub fn avoids<R: ConvexRegion + ?Sized>(region: &R, lattice: &LatticeSample) -> Result<bool> {
    let mut empty = true;
    scan_rows(region, lattice, |_, _, _| empty = false)?;
    Ok(empty)
}
