//! Convex intersection by successive half-plane clipping.
//!
//! Each convex polygon is the intersection of the half-planes to the left
//! of its directed edges; clipping a subject against every edge of the
//! other polygon yields the intersection. Degenerate outputs (area below
//! [`EMPTY_AREA_FACTOR`] times the input scale) normalize to the empty
//! marker `None`.

use super::kernel::cross3;
use super::{ConvexPolygon, GeomError, Point, RotatedRect};
use crate::tolerances::{CHAIN_REL_TOL, CLIP_DENOM_GUARD, EMPTY_AREA_FACTOR};

/// Clips `subject` against the half-plane left of the directed line a→b.
fn clip_halfplane(subject: &[Point], a: Point, b: Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(subject.len() + 2);
    let n = subject.len();
    for i in 0..n {
        let s = subject[i];
        let e = subject[(i + 1) % n];
        let ds = cross3(a, b, s);
        let de = cross3(a, b, e);
        if ds >= 0.0 {
            out.push(s);
        }
        if (ds > 0.0 && de < 0.0) || (ds < 0.0 && de > 0.0) {
            let denom = ds - de;
            if denom.abs() > CLIP_DENOM_GUARD {
                let t = ds / denom;
                out.push(Point::new(s.x + t * (e.x - s.x), s.y + t * (e.y - s.y)));
            }
        }
    }
    out
}

fn dedupe(points: &mut Vec<Point>, scale: f64) {
    let tol = EMPTY_AREA_FACTOR * scale;
    points.dedup_by(|a, b| (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol);
    if points.len() > 1 {
        let (first, last) = (points[0], *points.last().unwrap());
        if (first.x - last.x).abs() <= tol && (first.y - last.y).abs() <= tol {
            points.pop();
        }
    }
}

/// Convex intersection; `None` is the explicit empty marker.
pub fn intersect_convex(a: &ConvexPolygon, b: &ConvexPolygon) -> Option<ConvexPolygon> {
    let scale = a.coord_scale().max(b.coord_scale());
    let mut work: Vec<Point> = a.vertices().to_vec();
    let bn = b.vertices().len();
    for i in 0..bn {
        if work.len() < 3 {
            return None;
        }
        work = clip_halfplane(&work, b.vertices()[i], b.vertices()[(i + 1) % bn]);
    }
    dedupe(&mut work, scale);
    if work.len() < 3 {
        return None;
    }
    let poly = ConvexPolygon::from_raw(work);
    if poly.is_degenerate(scale * scale) {
        None
    } else {
        Some(poly)
    }
}

/// Area of the intersection, zero when empty.
pub fn intersection_area(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    intersect_convex(a, b).map_or(0.0, |p| p.area())
}

/// Area of the full intersection of a same-shape rotated-rectangle chain.
///
/// Requires ≥2 rectangles sharing (L, ℓ) exactly, with angles strictly
/// decreasing inside [0, π/4]. For such chains the full intersection equals
/// the intersection of the two extreme angles; callers can assert that with
/// [`CHAIN_REL_TOL`].
pub fn chain_intersection_area(rects: &[RotatedRect]) -> Result<f64, GeomError> {
    if rects.len() < 2 {
        return Err(GeomError::InvalidFamily(format!(
            "chain needs ≥2 rectangles, got {}",
            rects.len()
        )));
    }
    let (len, ell) = (rects[0].len, rects[0].ell);
    for r in rects {
        if r.len != len || r.ell != ell {
            return Err(GeomError::InvalidFamily(format!(
                "mismatched sides ({}, {}) vs ({len}, {ell})",
                r.len, r.ell
            )));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_4).contains(&r.theta) {
            return Err(GeomError::InvalidFamily(format!(
                "angle {} outside [0, π/4]",
                r.theta
            )));
        }
    }
    for w in rects.windows(2) {
        if w[1].theta >= w[0].theta {
            return Err(GeomError::InvalidFamily(
                "angles must be strictly decreasing".into(),
            ));
        }
    }
    let mut current = rects[0].to_polygon();
    for r in &rects[1..] {
        match intersect_convex(&current, &r.to_polygon()) {
            Some(next) => current = next,
            None => return Ok(0.0),
        }
    }
    Ok(current.area())
}

/// Convenience wrapper asserting the chain identity; returns
/// (full area, extremes-pair area).
pub fn chain_vs_extremes(rects: &[RotatedRect]) -> Result<(f64, f64), GeomError> {
    let full = chain_intersection_area(rects)?;
    let ex = intersection_area(
        &rects[0].to_polygon(),
        &rects[rects.len() - 1].to_polygon(),
    );
    Ok((full, ex))
}

/// Relative tolerance bound re-exported for chain-identity assertions.
pub const CHAIN_IDENTITY_TOL: f64 = CHAIN_REL_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn square(x0: f64, y0: f64, side: f64) -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(x0, y0),
            Point::new(x0 + side, y0),
            Point::new(x0 + side, y0 + side),
            Point::new(x0, y0 + side),
        ])
        .unwrap()
    }

    #[test]
    fn shifted_unit_squares_overlap_half() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(0.5, 0.0, 1.0);
        let area = intersection_area(&a, &b);
        assert!((area - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn boundary_contact_is_empty() {
        let r = RotatedRect::new(10.0, 1.0, 0.0).unwrap();
        let q = RotatedRect::new(10.0, 1.0, FRAC_PI_2).unwrap();
        // They meet only along the segment x=0, 0≤y≤1.
        let area = intersection_area(&r.to_polygon(), &q.to_polygon());
        assert!(area.abs() <= 1e-12 * 10.0, "area {area}");
    }

    #[test]
    fn disjoint_squares_give_none() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(5.0, 5.0, 1.0);
        assert!(intersect_convex(&a, &b).is_none());
    }

    #[test]
    fn nested_intersection_is_inner() {
        let outer = square(-2.0, -2.0, 6.0);
        let inner = square(0.0, 0.0, 1.0);
        let area = intersection_area(&outer, &inner);
        assert!((area - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn origin_anchored_pair_matches_closed_form() {
        // Intersection of r_θ1 Q and r_θ2 Q near the shared vertex is a
        // right triangle of area ℓ²/(2 tan(θ1−θ2)) when sin gap ≥ ℓ/L.
        let ell = 1.0;
        let len = 40.0;
        for &(t1, t2) in &[(0.4, 0.1), (0.3, 0.2), (0.7, 0.4)] {
            let a = RotatedRect::new(len, ell, t1).unwrap();
            let b = RotatedRect::new(len, ell, t2).unwrap();
            let got = intersection_area(&a.to_polygon(), &b.to_polygon());
            let want = ell * ell / (2.0 * (t1 - t2).tan());
            assert!(
                (got - want).abs() <= 1e-11 * want,
                "gap {}: {got} vs {want}",
                t1 - t2
            );
        }
    }

    #[test]
    fn chain_equals_extremes() {
        let rects: Vec<RotatedRect> = [0.4, 0.3, 0.2, 0.1]
            .iter()
            .map(|&t| RotatedRect::new(20.0, 1.0, t).unwrap())
            .collect();
        let (full, ex) = chain_vs_extremes(&rects).unwrap();
        assert!((full - ex).abs() <= CHAIN_IDENTITY_TOL * ex, "{full} vs {ex}");
    }

    #[test]
    fn chain_interior_angles_redundant() {
        let thetas = [0.4, 0.3, 0.2, 0.1];
        let rects: Vec<RotatedRect> = thetas
            .iter()
            .map(|&t| RotatedRect::new(20.0, 1.0, t).unwrap())
            .collect();
        let full = chain_intersection_area(&rects).unwrap();
        let reduced: Vec<RotatedRect> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&t| RotatedRect::new(20.0, 1.0, t).unwrap())
            .collect();
        let red = chain_intersection_area(&reduced).unwrap();
        assert!((full - red).abs() <= CHAIN_IDENTITY_TOL * full);
    }

    #[test]
    fn chain_rejects_mismatched_family() {
        let a = RotatedRect::new(20.0, 1.0, 0.4).unwrap();
        let b = RotatedRect::new(21.0, 1.0, 0.2).unwrap();
        assert!(matches!(
            chain_intersection_area(&[a, b]),
            Err(GeomError::InvalidFamily(_))
        ));
    }

    #[test]
    fn chain_rejects_increasing_angles() {
        let a = RotatedRect::new(20.0, 1.0, 0.1).unwrap();
        let b = RotatedRect::new(20.0, 1.0, 0.2).unwrap();
        assert!(chain_intersection_area(&[a, b]).is_err());
    }

    #[test]
    fn intersection_bounded_by_min_area() {
        let a = square(0.0, 0.0, 2.0);
        let b = square(1.0, 1.0, 3.0);
        let area = intersection_area(&a, &b);
        assert!(area <= a.area().min(b.area()) + 1e-12);
    }
}
