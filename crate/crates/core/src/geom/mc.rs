//! Seeded Monte-Carlo oracles.
//!
//! Sampling is batched; every batch derives its generator from the run seed
//! plus the batch index (own ChaCha stream), and batch results are reduced
//! in batch order, so estimates are bit-identical for a given seed no
//! matter how the batches are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{GeomError, Point};
use crate::tolerances::MC_MIN_SAMPLES;

const BATCH: u64 = 1 << 14;

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch + 1);
    rng
}

/// Area of `{p ∈ bbox : indicator(p)}` by uniform sampling.
pub fn mc_measure<F>(
    indicator: F,
    bbox: (Point, Point),
    samples: u64,
    seed: u64,
) -> Result<McEstimate, GeomError>
where
    F: Fn(Point) -> bool + Sync,
{
    if samples < MC_MIN_SAMPLES {
        return Err(GeomError::InvalidInput(format!(
            "samples {samples} below minimum {MC_MIN_SAMPLES}"
        )));
    }
    let (lo, hi) = bbox;
    let (dx, dy) = (hi.x - lo.x, hi.y - lo.y);
    if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
        return Err(GeomError::InvalidInput(format!(
            "degenerate bbox ({dx} × {dy})"
        )));
    }
    let box_area = dx * dy;
    let n_batches = samples.div_ceil(BATCH);
    let hits: Vec<u64> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let count = BATCH.min(samples - b * BATCH);
            let mut h = 0u64;
            for _ in 0..count {
                let p = Point::new(
                    lo.x + dx * rng.random::<f64>(),
                    lo.y + dy * rng.random::<f64>(),
                );
                if indicator(p) {
                    h += 1;
                }
            }
            h
        })
        .collect();
    let total: u64 = hits.iter().sum();
    let p = total as f64 / samples as f64;
    let stderr = box_area * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(McEstimate {
        value: box_area * p,
        stderr,
        samples,
        seed,
    })
}

/// Coverage estimator for a union of equal-area regions.
///
/// Draws a region uniformly, a point uniformly inside it (caller-supplied
/// sampler), counts how many regions cover the point (caller-supplied
/// counter ≥ 1) and averages 1/χ: union = Σ areas · E[1/χ]. The estimate is
/// conditioned at any scale because no bounding box enters.
pub fn mc_union_coverage<S, C>(
    regions: usize,
    total_area: f64,
    sample_in: S,
    coverage: C,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, GeomError>
where
    S: Fn(usize, &mut ChaCha8Rng) -> Point + Sync,
    C: Fn(Point) -> u32 + Sync,
{
    if samples < MC_MIN_SAMPLES {
        return Err(GeomError::InvalidInput(format!(
            "samples {samples} below minimum {MC_MIN_SAMPLES}"
        )));
    }
    if regions == 0 {
        return Err(GeomError::InvalidInput("no regions".into()));
    }
    let n_batches = samples.div_ceil(BATCH);
    let partials: Vec<(f64, f64)> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let count = BATCH.min(samples - b * BATCH);
            let (mut s1, mut s2) = (0.0f64, 0.0f64);
            for _ in 0..count {
                let idx = rng.random_range(0..regions);
                let p = sample_in(idx, &mut rng);
                let chi = coverage(p).max(1) as f64;
                let w = 1.0 / chi;
                s1 += w;
                s2 += w * w;
            }
            (s1, s2)
        })
        .collect();
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for (a, b) in partials {
        s1 += a;
        s2 += b;
    }
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(McEstimate {
        value: total_area * mean,
        stderr: total_area * (var / n).sqrt(),
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_exact() {
        let est = mc_measure(
            |_| true,
            (Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            20_000,
            1,
        )
        .unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn quarter_disk_within_3_sigma() {
        let est = mc_measure(
            |p| p.x * p.x + p.y * p.y <= 1.0,
            (Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            1_000_000,
            42,
        )
        .unwrap();
        let want = std::f64::consts::FRAC_PI_4;
        assert!(
            (est.value - want).abs() <= 3.0 * est.stderr,
            "{} ± {} vs {want}",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn deterministic_under_seed() {
        let run = || {
            mc_measure(
                |p| p.x + p.y <= 1.0,
                (Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
                50_000,
                123,
            )
            .unwrap()
            .value
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_low_samples_and_bad_bbox() {
        assert!(mc_measure(|_| true, (Point::new(0.0, 0.0), Point::new(1.0, 1.0)), 100, 0).is_err());
        assert!(
            mc_measure(|_| true, (Point::new(0.0, 0.0), Point::new(0.0, 1.0)), 20_000, 0).is_err()
        );
    }

    #[test]
    fn coverage_estimator_on_overlapping_squares() {
        // Two unit squares overlapping in area 0.5: union = 1.5.
        let inside = |p: Point, x0: f64| p.x >= x0 && p.x <= x0 + 1.0 && p.y >= 0.0 && p.y <= 1.0;
        let est = mc_union_coverage(
            2,
            2.0,
            |idx, rng| {
                let x0 = if idx == 0 { 0.0 } else { 0.5 };
                Point::new(x0 + rng.random::<f64>(), rng.random::<f64>())
            },
            |p| (inside(p, 0.0) as u32) + (inside(p, 0.5) as u32),
            400_000,
            9,
        )
        .unwrap();
        assert!(
            (est.value - 1.5).abs() <= 3.0 * est.stderr,
            "{} ± {}",
            est.value,
            est.stderr
        );
    }
}
