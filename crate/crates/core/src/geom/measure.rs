//! Union and overlap level-set measures via the subset walk.
//!
//! For n regions, the inclusion–exclusion identities only need the per-
//! cardinality sums T_c = Σ_{|S|=c} |∩S|; a depth-first walk over index
//! subsets computes every ∩S once from its parent prefix. Capacity is
//! capped at 2^24 subsets. Summation order is fixed by subset rank so runs
//! are bit-reproducible regardless of build parallelism.

use super::clip::intersect_convex;
use super::kernel::CompensatedSum;
use super::mc::{mc_measure, McEstimate};
use super::{ConvexPolygon, GeomError, Point};
use crate::tolerances::EXACT_UNION_CAP;

/// Per-cardinality intersection-area sums: `by_card[c]` holds
/// Σ_{|S|=c+1} |∩S|.
#[derive(Debug, Clone)]
pub struct SubsetProfile {
    by_card: Vec<CompensatedSum>,
    n: usize,
}

impl SubsetProfile {
    /// Walks all nonempty subsets of `polys`.
    pub fn compute(polys: &[ConvexPolygon]) -> Result<Self, GeomError> {
        let n = polys.len();
        if n == 0 {
            return Err(GeomError::InvalidInput("empty region list".into()));
        }
        if n > EXACT_UNION_CAP {
            return Err(GeomError::Capacity {
                n,
                cap: EXACT_UNION_CAP,
            });
        }
        let mut profile = SubsetProfile {
            by_card: vec![CompensatedSum::new(); n],
            n,
        };
        for start in 0..n {
            profile.by_card[0].add(polys[start].area());
            descend(polys, start, polys[start].clone(), 1, &mut profile);
        }
        Ok(profile)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Σ over subsets of cardinality `c` (1-based) of the intersection area.
    pub fn card_sum(&self, c: usize) -> f64 {
        if c == 0 || c > self.n {
            0.0
        } else {
            self.by_card[c - 1].value()
        }
    }

    /// Inclusion–exclusion union area.
    pub fn union_area(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for c in 1..=self.n {
            let term = self.card_sum(c);
            acc.add(if c % 2 == 1 { term } else { -term });
        }
        acc.value()
    }

    /// |{x : Σχ(x) ≥ m}| = Σ_{c≥m} (−1)^{c−m} C(c−1, m−1) T_c.
    pub fn levelset_ge(&self, m: usize) -> f64 {
        if m == 0 || m > self.n {
            return if m == 0 { f64::INFINITY } else { 0.0 };
        }
        let mut acc = CompensatedSum::new();
        for c in m..=self.n {
            let coeff = binom(c - 1, m - 1) * self.card_sum(c);
            acc.add(if (c - m) % 2 == 0 { coeff } else { -coeff });
        }
        acc.value()
    }

    /// |{x : Σχ(x) = m}|.
    pub fn levelset_eq(&self, m: usize) -> f64 {
        self.levelset_ge(m) - self.levelset_ge(m + 1)
    }

    /// Σ_m m·|{χ=m}| — must match Σ areas (partition identity).
    pub fn depth_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for m in 1..=self.n {
            acc.add(self.levelset_ge(m));
        }
        acc.value()
    }
}

fn descend(
    polys: &[ConvexPolygon],
    last: usize,
    current: ConvexPolygon,
    card: usize,
    profile: &mut SubsetProfile,
) {
    for next in (last + 1)..polys.len() {
        if let Some(inter) = intersect_convex(&current, &polys[next]) {
            profile.by_card[card].add(inter.area());
            descend(polys, next, inter, card + 1, profile);
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as f64
}

/// Union computation method.
#[derive(Debug, Clone, Copy)]
pub enum UnionMethod {
    InclusionExclusion,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Union estimate; `stderr` is `None` for the deterministic method.
#[derive(Debug, Clone, Copy)]
pub struct UnionEstimate {
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Area of ⋃ polys by the requested method.
pub fn union_area(polys: &[ConvexPolygon], method: UnionMethod) -> Result<UnionEstimate, GeomError> {
    match method {
        UnionMethod::InclusionExclusion => {
            let profile = SubsetProfile::compute(polys)?;
            Ok(UnionEstimate {
                value: profile.union_area(),
                stderr: None,
            })
        }
        UnionMethod::MonteCarlo { samples, seed } => {
            if polys.is_empty() {
                return Err(GeomError::InvalidInput("empty region list".into()));
            }
            let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
            let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
            for p in polys {
                let (l, h) = p.bbox();
                lo.x = lo.x.min(l.x);
                lo.y = lo.y.min(l.y);
                hi.x = hi.x.max(h.x);
                hi.y = hi.y.max(h.y);
            }
            let est: McEstimate = mc_measure(
                |pt| polys.iter().any(|p| p.contains(pt)),
                (lo, hi),
                samples,
                seed,
            )?;
            Ok(UnionEstimate {
                value: est.value,
                stderr: Some(est.stderr),
            })
        }
    }
}

/// |{x : Σᵢ χ_{Rᵢ}(x) ≥ m}| via the subset identity.
pub fn levelset_measure(polys: &[ConvexPolygon], m: usize) -> Result<f64, GeomError> {
    if m == 0 {
        return Err(GeomError::InvalidInput("level must be ≥ 1".into()));
    }
    Ok(SubsetProfile::compute(polys)?.levelset_ge(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RotatedRect;

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
    fn disjoint_squares_union_adds() {
        let polys = vec![square(0.0, 0.0, 1.0), square(3.0, 0.0, 1.0)];
        let u = union_area(&polys, UnionMethod::InclusionExclusion).unwrap();
        assert!((u.value - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn nested_squares_union_is_outer() {
        let polys = vec![square(-1.0, -1.0, 4.0), square(0.0, 0.0, 1.0)];
        let u = union_area(&polys, UnionMethod::InclusionExclusion).unwrap();
        assert!((u.value - 16.0).abs() <= 1e-12 * 16.0);
    }

    #[test]
    fn half_overlapping_levelsets() {
        let polys = vec![square(0.0, 0.0, 1.0), square(0.5, 0.0, 1.0)];
        let profile = SubsetProfile::compute(&polys).unwrap();
        assert!((profile.levelset_ge(1) - 1.5).abs() <= 1e-12);
        assert!((profile.levelset_ge(2) - 0.5).abs() <= 1e-12);
        assert!((profile.levelset_eq(1) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn single_region_levelsets() {
        let polys = vec![square(0.0, 0.0, 2.0)];
        let profile = SubsetProfile::compute(&polys).unwrap();
        assert!((profile.levelset_ge(1) - 4.0).abs() <= 1e-12);
        assert_eq!(profile.levelset_ge(2), 0.0);
    }

    #[test]
    fn partition_identity_on_fan() {
        let rects: Vec<ConvexPolygon> = [0.5, 0.35, 0.22, 0.13, 0.08]
            .iter()
            .map(|&t| RotatedRect::new(30.0, 1.0, t).unwrap().to_polygon())
            .collect();
        let profile = SubsetProfile::compute(&rects).unwrap();
        let mass = profile.depth_mass();
        let total: f64 = rects.iter().map(|p| p.area()).sum();
        assert!(
            (mass - total).abs() <= 1e-10 * total,
            "mass {mass} vs {total}"
        );
    }

    #[test]
    fn union_within_bounds() {
        let a = square(0.0, 0.0, 2.0);
        let b = square(1.0, 0.0, 2.0);
        let u = union_area(&[a.clone(), b.clone()], UnionMethod::InclusionExclusion)
            .unwrap()
            .value;
        assert!(u >= a.area().max(b.area()) - 1e-12);
        assert!(u <= a.area() + b.area() + 1e-12);
        assert!((u - 6.0).abs() <= 1e-12);
    }

    #[test]
    fn capacity_error_past_cap() {
        let polys: Vec<ConvexPolygon> = (0..25).map(|i| square(i as f64, 0.0, 0.5)).collect();
        assert!(matches!(
            SubsetProfile::compute(&polys),
            Err(GeomError::Capacity { .. })
        ));
    }

    #[test]
    fn union_matches_monte_carlo() {
        let polys = vec![square(0.0, 0.0, 1.0), square(0.5, 0.5, 1.0)];
        let exact = union_area(&polys, UnionMethod::InclusionExclusion)
            .unwrap()
            .value;
        let mc = union_area(
            &polys,
            UnionMethod::MonteCarlo {
                samples: 200_000,
                seed: 7,
            },
        )
        .unwrap();
        let sigma = mc.stderr.unwrap();
        assert!(
            (mc.value - exact).abs() <= 3.0 * sigma,
            "exact {exact}, mc {} ± {sigma}",
            mc.value
        );
    }
}
