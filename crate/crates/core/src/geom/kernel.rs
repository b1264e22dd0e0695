//! Robust scalar primitives: fused-multiply-add determinants and
//! compensated summation.
//!
//! The fan constructions put vertices at coordinate magnitudes up to the
//! shape ratio while sliver areas are of order one; a naive shoelace loses
//! all relative accuracy there. Determinants of difference vectors with an
//! FMA error term keep every triangle contribution relatively accurate at
//! any representable scale.

use super::Point;

/// a·d − b·c with a single FMA-compensated rounding.
#[inline]
pub fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let w = b * c;
    let e = f64::mul_add(b, c, -w);
    let f = f64::mul_add(a, d, -w);
    f - e
}

/// Cross product (b−a) × (c−a).
#[inline]
pub fn cross3(a: Point, b: Point, c: Point) -> f64 {
    det2(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y)
}

/// Cross product of raw vectors.
#[inline]
pub fn cross(ux: f64, uy: f64, vx: f64, vy: f64) -> f64 {
    det2(ux, uy, vx, vy)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Nonnegative polygon area via a triangle fan anchored at the first
/// vertex, each triangle computed from difference vectors.
pub fn polygon_area(vertices: &[Point]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let mut acc = CompensatedSum::new();
    let o = vertices[0];
    for w in vertices[1..].windows(2) {
        acc.add(cross3(o, w[0], w[1]));
    }
    acc.value() / 2.0
}

/// log(Σ exp(xᵢ)) without overflow; empty input gives −∞.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add((x - m).exp());
    }
    m + acc.value().ln()
}
