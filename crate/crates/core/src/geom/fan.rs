//! Closed-form measures for origin-anchored same-shape rotated-rectangle
//! fans.
//!
//! For rectangles r_θ([0,L]×[0,ℓ]) with strictly decreasing angles and
//! pairwise gaps satisfying sin δ ≥ ℓ/L, the pair intersection is the right
//! triangle at the shared vertex with area exactly ℓ²/(2 tan δ), a chain
//! intersection equals its extreme pair, and inclusion–exclusion telescopes
//! to consecutive pairs. Everything here is exact at any representable
//! scale (areas are returned in ℓ² units; the shape may be +∞ in f64 while
//! its logarithm stays finite), which is what makes the superlacunary
//! constructions measurable at all.

use super::kernel::CompensatedSum;
use super::{GeomError, RotatedRect};
use crate::tolerances::FAN_GUARD_MARGIN;

/// A fan family in normalized units: height ℓ = 1, length = shape.
#[derive(Debug, Clone)]
pub struct FanFamily {
    tangents: Vec<f64>,
    ln_shape: f64,
    shape: f64,
}

impl FanFamily {
    /// Builds from decreasing positive tangents and the log of the shape
    /// L/ℓ. Fails unless every pairwise gap clears the triangle guard
    /// sin δ ≥ (1 + margin)·ℓ/L.
    pub fn new(tangents: Vec<f64>, ln_shape: f64) -> Result<Self, GeomError> {
        if tangents.is_empty() {
            return Err(GeomError::InvalidFamily("no angles".into()));
        }
        if !ln_shape.is_finite() || ln_shape <= 0.0 {
            return Err(GeomError::InvalidFamily(format!(
                "log-shape must be positive finite, got {ln_shape}"
            )));
        }
        for w in tangents.windows(2) {
            if !(w[1] > 0.0 && w[0] > w[1]) {
                return Err(GeomError::InvalidFamily(
                    "tangents must be strictly decreasing and positive".into(),
                ));
            }
        }
        if !(tangents[0].is_finite() && tangents[0] <= 1.0) {
            return Err(GeomError::InvalidFamily(format!(
                "largest tangent {} outside (0, 1]",
                tangents[0]
            )));
        }
        let fam = FanFamily {
            shape: ln_shape.exp(),
            tangents,
            ln_shape,
        };
        if fam.tangents.len() >= 2 {
            // Consecutive gaps are the smallest; checking them covers all pairs.
            for i in 0..fam.tangents.len() - 1 {
                let t = fam.tan_gap(i, i + 1);
                let sin_gap = t / (1.0 + t * t).sqrt();
                if sin_gap <= 0.0
                    || sin_gap.ln() < (1.0 + FAN_GUARD_MARGIN).ln() - fam.ln_shape
                {
                    return Err(GeomError::InvalidFamily(format!(
                        "gap between angles {i} and {} too small for the \
                         triangle closed form (sin δ = {sin_gap:e}, ℓ/L = e^{:.3})",
                        i + 1,
                        -fam.ln_shape
                    )));
                }
            }
        }
        Ok(fam)
    }

    /// Builds from an explicit rectangle family (equal sides, decreasing
    /// angles).
    pub fn from_rects(rects: &[RotatedRect]) -> Result<Self, GeomError> {
        if rects.is_empty() {
            return Err(GeomError::InvalidFamily("no rectangles".into()));
        }
        let (len, ell) = (rects[0].len, rects[0].ell);
        for r in rects {
            if r.len != len || r.ell != ell {
                return Err(GeomError::InvalidFamily("mismatched sides".into()));
            }
        }
        let tangents = rects.iter().map(|r| r.theta.tan()).collect();
        FanFamily::new(tangents, (len / ell).ln())
    }

    pub fn n(&self) -> usize {
        self.tangents.len()
    }

    pub fn tangents(&self) -> &[f64] {
        &self.tangents
    }

    /// Shape ratio L/ℓ; +∞ when only the logarithm is representable.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn ln_shape(&self) -> f64 {
        self.ln_shape
    }

    /// tan of the angle gap θ_i − θ_j for i < j, from tangents alone.
    pub fn tan_gap(&self, i: usize, j: usize) -> f64 {
        let (mi, mj) = (self.tangents[i], self.tangents[j]);
        (mi - mj) / (1.0 + mi * mj)
    }

    /// Pair intersection area in ℓ² units: ℓ²/(2 tan δ).
    pub fn pair_area(&self, i: usize, j: usize) -> f64 {
        1.0 / (2.0 * self.tan_gap(i, j))
    }

    /// Σ over consecutive pairs of the pair area, in ℓ² units.
    pub fn consecutive_overlap(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for i in 0..self.n().saturating_sub(1) {
            acc.add(self.pair_area(i, i + 1));
        }
        acc.value()
    }

    /// Union area divided by the common rectangle area |Q| = shape·ℓ².
    pub fn union_ratio(&self) -> f64 {
        let n = self.n() as f64;
        let mut acc = CompensatedSum::new();
        acc.add(n);
        for i in 0..self.n().saturating_sub(1) {
            acc.add(-self.pair_area(i, i + 1) / self.shape);
        }
        acc.value()
    }

    /// |{χ ≥ m}| in ℓ² units. May be +∞ when the shape overflows (m = 1).
    pub fn levelset_ge(&self, m: usize) -> f64 {
        let n = self.n();
        if m == 0 || m > n {
            return if m == 0 { f64::INFINITY } else { 0.0 };
        }
        if m == 1 {
            return self.union_ratio() * self.shape;
        }
        // {χ ≥ m} = union of the consecutive-window triangles T(i, i+m−1);
        // window overlaps telescope to T(i, i+m).
        let mut acc = CompensatedSum::new();
        for i in 0..=(n - m) {
            acc.add(self.pair_area(i, i + m - 1));
        }
        for i in 0..n.saturating_sub(m) {
            acc.add(-self.pair_area(i, i + m));
        }
        acc.value()
    }

    /// |{χ = m}| in ℓ² units.
    pub fn levelset_eq(&self, m: usize) -> f64 {
        if m == 1 {
            // (union − {χ≥2}) computed at ratio scale to stay finite.
            return (self.union_ratio() - self.levelset_ge(2) / self.shape) * self.shape;
        }
        self.levelset_ge(m) - self.levelset_ge(m + 1)
    }

    /// |{χ = m}| / |Q| — finite at every scale for m ≥ 2.
    pub fn levelset_eq_ratio(&self, m: usize) -> f64 {
        if m == 1 {
            self.union_ratio() - self.levelset_ge(2) / self.shape
        } else {
            self.levelset_eq(m) / self.shape
        }
    }

    /// Sub-family on the given strictly increasing index list.
    pub fn subfamily(&self, indices: &[usize]) -> Result<FanFamily, GeomError> {
        let tangents: Vec<f64> = indices.iter().map(|&i| self.tangents[i]).collect();
        FanFamily::new(tangents, self.ln_shape)
    }
}
