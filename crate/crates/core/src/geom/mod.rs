//! Planar measure kernel.
//!
//! Primitives are double precision throughout; rotations introduce
//! irrational coordinates, so every equality is tolerance-based with
//! relative tolerance [`crate::tolerances::REL_AREA_TOL`] scaled by the
//! largest input area.

pub mod clip;
pub mod disk;
pub mod fan;
pub mod kernel;
pub mod mc;
pub mod measure;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::{EMPTY_AREA_FACTOR, REL_AREA_TOL};

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capacity exceeded: {n} regions > cap {cap}")]
    Capacity { n: usize, cap: usize },
}

/// A point of the ambient plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Counterclockwise convex polygon; carrier for rectangle images.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Validates finiteness, vertex count, counterclockwise orientation and
    /// convexity up to tolerance (collinear vertices are accepted: clipping
    /// produces them).
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeomError> {
        if vertices.len() < 3 {
            return Err(GeomError::InvalidPolygon(format!(
                "need ≥3 vertices, got {}",
                vertices.len()
            )));
        }
        if !vertices.iter().all(Point::is_finite) {
            return Err(GeomError::InvalidPolygon("non-finite vertex".into()));
        }
        let poly = ConvexPolygon { vertices };
        let area = poly.area();
        if area <= 0.0 {
            return Err(GeomError::InvalidPolygon(format!(
                "orientation not counterclockwise (signed area {area})"
            )));
        }
        let scale = poly.coord_scale();
        let tol = REL_AREA_TOL * scale * scale;
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let c = poly.vertices[(i + 2) % n];
            if kernel::cross3(a, b, c) < -tol {
                return Err(GeomError::InvalidPolygon(format!(
                    "reflex vertex at index {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(poly)
    }

    /// Trusted constructor for internal callers that already guarantee the
    /// invariants (e.g. clipping outputs).
    pub(crate) fn from_raw(vertices: Vec<Point>) -> Self {
        ConvexPolygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Nonnegative area via a compensated triangle fan.
    pub fn area(&self) -> f64 {
        kernel::polygon_area(&self.vertices)
    }

    /// Largest coordinate magnitude; the scale for tolerance decisions.
    pub fn coord_scale(&self) -> f64 {
        self.vertices
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box.
    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Containment test with a boundary tolerance scaled to the polygon.
    pub fn contains(&self, p: Point) -> bool {
        let scale = self.coord_scale().max(p.x.abs()).max(p.y.abs());
        let tol = -REL_AREA_TOL * scale * scale;
        let n = self.vertices.len();
        (0..n).all(|i| kernel::cross3(self.vertices[i], self.vertices[(i + 1) % n], p) >= tol)
    }

    /// True when the polygon should be treated as the empty marker relative
    /// to `scale_area` (product of the governing scales).
    pub fn is_degenerate(&self, scale_area: f64) -> bool {
        self.vertices.len() < 3 || self.area() <= EMPTY_AREA_FACTOR * scale_area
    }
}

/// Rectangle r_θ([0,L]×[0,ℓ]) rotated counterclockwise about its lower-left
/// vertex at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect {
    pub len: f64,
    pub ell: f64,
    pub theta: f64,
}

impl RotatedRect {
    pub fn new(len: f64, ell: f64, theta: f64) -> Result<Self, GeomError> {
        if !(len > 0.0 && len.is_finite()) || !(ell > 0.0 && ell.is_finite()) {
            return Err(GeomError::InvalidRect(format!(
                "sides must be positive finite, got ({len}, {ell})"
            )));
        }
        if !theta.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(GeomError::InvalidRect(format!(
                "angle {theta} outside [0, π/2]"
            )));
        }
        Ok(RotatedRect { len, ell, theta })
    }

    pub fn area(&self) -> f64 {
        self.len * self.ell
    }

    /// Four-vertex counterclockwise polygon starting at the origin.
    pub fn to_polygon(&self) -> ConvexPolygon {
        let (s, c) = self.theta.sin_cos();
        let (l, h) = (self.len, self.ell);
        ConvexPolygon::from_raw(vec![
            Point::new(0.0, 0.0),
            Point::new(l * c, l * s),
            Point::new(l * c - h * s, l * s + h * c),
            Point::new(-h * s, h * c),
        ])
    }

    /// Image of [x0,x1]×[0,ℓ] under the same rotation; used for length
    /// extensions about the center (x0 may be negative).
    pub fn span_polygon(&self, x0: f64, x1: f64) -> ConvexPolygon {
        let (s, c) = self.theta.sin_cos();
        let h = self.ell;
        ConvexPolygon::from_raw(vec![
            Point::new(x0 * c, x0 * s),
            Point::new(x1 * c, x1 * s),
            Point::new(x1 * c - h * s, x1 * s + h * c),
            Point::new(x0 * c - h * s, x0 * s + h * c),
        ])
    }

    /// Rectangle with the same center and width but `factor` times the
    /// length, as a polygon.
    pub fn extended_polygon(&self, factor: f64) -> ConvexPolygon {
        let half = self.len / 2.0;
        self.span_polygon(half - factor * half, half + factor * half)
    }
}

/// Right half r_θ([L/2,L]×[0,ℓ]) of a rotated rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfRect {
    pub parent: RotatedRect,
}

impl HalfRect {
    pub fn new(parent: RotatedRect) -> Self {
        HalfRect { parent }
    }

    pub fn area(&self) -> f64 {
        self.parent.area() / 2.0
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        self.parent.span_polygon(self.parent.len / 2.0, self.parent.len)
    }
}

/// Closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeomError> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(GeomError::InvalidInput(format!(
                "disk needs finite center and positive radius, got r={radius}"
            )));
        }
        Ok(Disk { center, radius })
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}
