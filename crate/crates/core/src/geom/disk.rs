//! Disk–polygon intersection area by arc-segment decomposition.
//!
//! For each directed polygon edge, the signed area of (triangle from the
//! disk center) ∩ disk is accumulated: pieces of the edge inside the disk
//! contribute a triangle term, pieces outside contribute a circular sector.
//! Quadratic coefficients are normalized by |edge|² so squared coordinates
//! stay representable for shapes up to [`crate::tolerances::GEOM_SHAPE_CAP`].

use super::kernel::{cross, CompensatedSum};
use super::{ConvexPolygon, Disk, Point};

/// Area of `d ∩ p`.
pub fn disk_polygon_area(d: &Disk, p: &ConvexPolygon) -> f64 {
    let r = d.radius;
    let verts: Vec<Point> = p
        .vertices()
        .iter()
        .map(|v| Point::new(v.x - d.center.x, v.y - d.center.y))
        .collect();
    let mut acc = CompensatedSum::new();
    let n = verts.len();
    for i in 0..n {
        acc.add(edge_contribution(verts[i], verts[(i + 1) % n], r));
    }
    acc.value().max(0.0)
}

/// Signed area of triangle(0, a, b) ∩ disk(0, r).
fn edge_contribution(a: Point, b: Point, r: f64) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let dd = dx * dx + dy * dy;
    if dd == 0.0 {
        return 0.0;
    }
    // |a + t·d|² = r², normalized: t² + 2·ph·t + q = 0.
    let ph = (a.x * dx + a.y * dy) / dd;
    let amag = (a.x / dd) * a.x + (a.y / dd) * a.y;
    let rr = (r / dd) * r;
    let q = amag - rr;
    let disc = ph * ph - q;
    // Tangency guard: discriminants below the rounding noise of their own
    // inputs are treated as no crossing; the missed circular segment has
    // sagitta ratio < 1e-13 and area < r²·1e-19.
    let noise = 1e-13 * (ph * ph + amag + rr);
    let mut cuts = [0.0f64; 2];
    let mut ncuts = 0;
    if disc > noise {
        let s = disc.sqrt();
        // Stable pair: larger-magnitude root by addition, the other by Vieta.
        let (t1, t2) = if ph >= 0.0 {
            let big = -(ph + s);
            (big, if big != 0.0 { q / big } else { -ph + s })
        } else {
            let big = -ph + s;
            (if big != 0.0 { q / big } else { -(ph + s) }, big)
        };
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for t in [lo, hi] {
            if t > 0.0 && t < 1.0 {
                cuts[ncuts] = t;
                ncuts += 1;
            }
        }
    }
    let mut pieces = Vec::with_capacity(3);
    let mut prev = 0.0;
    for &t in &cuts[..ncuts] {
        pieces.push((prev, t));
        prev = t;
    }
    pieces.push((prev, 1.0));

    // Exact endpoints at t = 0, 1: recomputing a + t·d there loses the
    // vertex to rounding of order ε·|a|, fatal at large anchor distances.
    let at = |t: f64| {
        if t == 0.0 {
            a
        } else if t == 1.0 {
            b
        } else {
            Point::new(a.x + t * dx, a.y + t * dy)
        }
    };
    let mut total = 0.0;
    for (t0, t1) in pieces {
        if t1 <= t0 {
            continue;
        }
        let p0 = at(t0);
        let p1 = at(t1);
        let mid = at(0.5 * (t0 + t1));
        let inside = (mid.x / r) * mid.x + (mid.y / r) * mid.y <= r;
        if inside {
            total += cross(p0.x, p0.y, p1.x, p1.y) / 2.0;
        } else {
            let ang = f64::atan2(
                cross(p0.x, p0.y, p1.x, p1.y),
                p0.x * p1.x + p0.y * p1.y,
            );
            total += 0.5 * r * r * ang;
        }
    }
    total
}
