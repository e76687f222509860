use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, Dim, Point};

/// A named fixture body, or an explicit polygon.
///
/// The text form is what the command line accepts: `disk`, `disk-r2`,
/// `square`, `square-s3`, `ellipse`, `ellipse-a2-b1`, `hexagon`, `ball3`,
/// `ball3-r2`, `cube`, `cube-s2`. Radii default to 1, square and cube sides
/// to 1, and the ellipse to semi-axes 2 and 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Disk { radius: f64 },
    Square { side: f64 },
    Ellipse { a: f64, b: f64 },
    Hexagon,
    Ball3 { radius: f64 },
    Cube { side: f64 },
    Polygon { name: String, vertices: Vec<(f64, f64)> },
}

impl BodySpec {
    pub fn build(&self) -> Result<Body> {
        match self {
            BodySpec::Disk { radius } => Body::disk(*radius),
            BodySpec::Square { side } => Body::unit_square().scale(*side),
            BodySpec::Ellipse { a, b } => Body::ellipse(Point::zeros(), *a, *b, 0.0),
            BodySpec::Hexagon => Body::regular_polygon(6, 1.0),
            BodySpec::Ball3 { radius } => Body::ball(Point::zeros(), Dim::Three, *radius),
            BodySpec::Cube { side } => Body::cube(*side),
            BodySpec::Polygon { vertices, .. } => Body::polygon(vertices),
        }
    }

    /// A polygon read from the one-vertex-per-line text format.
    pub fn polygon_from_text(name: &str, text: &str) -> Result<Self> {
        let body = Body::parse_polygon(text)?;
        let vertices = body.as_polytope().map(|p| p.input_points().iter().map(|v| (v.x, v.y)).collect());
        Ok(BodySpec::Polygon { name: name.to_string(), vertices: vertices.unwrap_or_default() })
    }
}

fn parse_param(s: &str, key: char) -> Option<f64> {
    s.strip_prefix(key)?.parse().ok().filter(|x: &f64| *x > 0.0 && x.is_finite())
}

impl FromStr for BodySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown body '{s}'"));
        let mut parts = s.split('-');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let one = |key: char, default: f64| -> Result<f64> {
            match rest.as_slice() {
                [] => Ok(default),
                [p] => parse_param(p, key).ok_or_else(bad),
                _ => Err(bad()),
            }
        };
        match head {
            "disk" => Ok(BodySpec::Disk { radius: one('r', 1.0)? }),
            "square" => Ok(BodySpec::Square { side: one('s', 1.0)? }),
            "ball3" => Ok(BodySpec::Ball3 { radius: one('r', 1.0)? }),
            "cube" => Ok(BodySpec::Cube { side: one('s', 1.0)? }),
            "hexagon" if rest.is_empty() => Ok(BodySpec::Hexagon),
            "ellipse" => match rest.as_slice() {
                [] => Ok(BodySpec::Ellipse { a: 2.0, b: 1.0 }),
                [a, b] => {
                    let (a, b) = (parse_param(a, 'a').ok_or_else(bad)?, parse_param(b, 'b').ok_or_else(bad)?);
                    if a < b {
                        return Err(Error::InvalidArgument(format!("ellipse needs a >= b in '{s}'")));
                    }
                    Ok(BodySpec::Ellipse { a, b })
                }
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySpec::Disk { radius } if *radius == 1.0 => write!(f, "disk"),
            BodySpec::Disk { radius } => write!(f, "disk-r{radius}"),
            BodySpec::Square { side } if *side == 1.0 => write!(f, "square"),
            BodySpec::Square { side } => write!(f, "square-s{side}"),
            BodySpec::Ellipse { a, b } if *a == 2.0 && *b == 1.0 => write!(f, "ellipse"),
            BodySpec::Ellipse { a, b } => write!(f, "ellipse-a{a}-b{b}"),
            BodySpec::Hexagon => write!(f, "hexagon"),
            BodySpec::Ball3 { radius } if *radius == 1.0 => write!(f, "ball3"),
            BodySpec::Ball3 { radius } => write!(f, "ball3-r{radius}"),
            BodySpec::Cube { side } if *side == 1.0 => write!(f, "cube"),
            BodySpec::Cube { side } => write!(f, "cube-s{side}"),
            BodySpec::Polygon { name, .. } => write!(f, "polygon:{name}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["disk", "disk-r2", "square", "square-s3", "ellipse", "ellipse-a3-b1.5", "hexagon", "ball3", "cube-s2"] {
            let spec: BodySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            spec.build().unwrap();
        }
    }

    #[test]
    fn rejects_unknown_bodies() {
        for s in ["", "blob", "disk-2", "disk-r-1", "ellipse-a1-b2", "hexagon-r2"] {
            assert!(s.parse::<BodySpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn polygon_text() {
        let spec = BodySpec::polygon_from_text("tri", "# triangle\n0 0\n2 0\n0 2\n").unwrap();
        assert_eq!(spec.to_string(), "polygon:tri");
        assert!((spec.build().unwrap().volume() - 2.0).abs() < 1e-12);
    }
}
