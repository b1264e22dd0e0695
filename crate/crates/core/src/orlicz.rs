//! Convex gauge functions: evaluation (plain and log-space), Young
//! conjugates (numeric and closed-form), growth diagnostics, and exact
//! integrals of simple functions over disks and convex polygons.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::disk::disk_polygon_area;
use crate::geom::{clip, ConvexPolygon, Disk};
use crate::tolerances::{CONJUGATE_DOMAIN_CAP, CONJUGATE_ITERS, EMPTY_AREA_FACTOR};

#[derive(Debug, Error)]
pub enum OrliczError {
    #[error("argument must be nonnegative and finite, got {0}")]
    NegativeArgument(f64),
    #[error("invalid gauge function: {0}")]
    InvalidFunction(String),
    #[error("conjugate unbounded at s = {s}: objective still rising at domain cap {cap:e}")]
    UnboundedConjugate { s: f64, cap: f64 },
    #[error("simple-function regions overlap: terms {i} and {j} share area {area:e}")]
    OverlappingRegions { i: usize, j: usize, area: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// max(0, ln t); 0 below 1, total on [0, ∞).
pub fn ln_plus(t: f64) -> f64 {
    t.ln().max(0.0)
}

/// Gauge function catalog. All entries are increasing with value 0 at 0
/// and grow to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrliczFunction {
    /// coeff · t^p, p ≥ 1, coeff > 0.
    Power { p: f64, coeff: f64 },
    /// t · (1 + log₊^β t), β > 0. Convex for β ≥ 1; for β < 1 there is a
    /// small convexity dip just above t = 1 (the function is equivalent
    /// to a convex one), which the conjugate machinery tolerates.
    PhiBeta { beta: f64 },
    /// t · (1 + log₊ log₊ t).
    LogLog,
    /// Piecewise-linear through samples, linear extrapolation past the end.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl OrliczFunction {
    pub fn power(p: f64, coeff: f64) -> Result<Self, OrliczError> {
        if !(p >= 1.0 && p.is_finite() && coeff > 0.0 && coeff.is_finite()) {
            return Err(OrliczError::InvalidFunction(format!(
                "power needs p >= 1 and coeff > 0, got p={p}, coeff={coeff}"
            )));
        }
        Ok(OrliczFunction::Power { p, coeff })
    }

    pub fn phi_beta(beta: f64) -> Result<Self, OrliczError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(OrliczError::InvalidFunction(format!(
                "phi_beta needs beta > 0, got {beta}"
            )));
        }
        Ok(OrliczFunction::PhiBeta { beta })
    }

    pub fn loglog() -> Self {
        OrliczFunction::LogLog
    }

    /// Validates: starts at (0,0), strictly increasing abscissae,
    /// nondecreasing values, nondecreasing slopes, positive final slope.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self, OrliczError> {
        if samples.len() < 2 {
            return Err(OrliczError::InvalidFunction(
                "tabulated needs at least two samples".into(),
            ));
        }
        if samples[0] != (0.0, 0.0) {
            return Err(OrliczError::InvalidFunction(
                "tabulated must start at (0, 0)".into(),
            ));
        }
        let mut prev_slope = f64::NEG_INFINITY;
        for w in samples.windows(2) {
            let ((t0, y0), (t1, y1)) = (w[0], w[1]);
            if !(t1.is_finite() && y1.is_finite() && t1 > t0 && y1 >= y0 && y1 >= 0.0) {
                return Err(OrliczError::InvalidFunction(format!(
                    "tabulated samples must increase in t with nondecreasing values, got ({t0},{y0}) -> ({t1},{y1})"
                )));
            }
            let slope = (y1 - y0) / (t1 - t0);
            if slope + 1e-12 * (1.0 + prev_slope.abs()) < prev_slope {
                return Err(OrliczError::InvalidFunction(format!(
                    "tabulated slopes must be nondecreasing, got {prev_slope} then {slope}"
                )));
            }
            prev_slope = prev_slope.max(slope);
        }
        if prev_slope <= 0.0 {
            return Err(OrliczError::InvalidFunction(
                "tabulated needs a positive final slope".into(),
            ));
        }
        Ok(OrliczFunction::Tabulated { samples })
    }

    pub fn eval(&self, t: f64) -> Result<f64, OrliczError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(OrliczError::NegativeArgument(t));
        }
        Ok(self.eval_nn(t))
    }

    fn eval_nn(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::Power { p, coeff } => coeff * t.powf(*p),
            OrliczFunction::PhiBeta { beta } => {
                if t == 0.0 {
                    0.0
                } else {
                    t * (1.0 + ln_plus(t).powf(*beta))
                }
            }
            OrliczFunction::LogLog => t * (1.0 + ln_plus(ln_plus(t))),
            OrliczFunction::Tabulated { samples } => eval_tabulated(samples, t),
        }
    }

    /// ln Φ(e^{ln_t}); finite for any finite ln_t, −∞ at −∞.
    pub fn eval_ln(&self, ln_t: f64) -> f64 {
        match self {
            OrliczFunction::Power { p, coeff } => coeff.ln() + p * ln_t,
            OrliczFunction::PhiBeta { beta } => {
                let y = ln_t.max(0.0);
                let yb = y.powf(*beta);
                if yb.is_finite() {
                    ln_t + yb.ln_1p()
                } else {
                    ln_t + beta * y.ln()
                }
            }
            OrliczFunction::LogLog => {
                let z = ln_plus(ln_t.max(0.0));
                ln_t + z.ln_1p()
            }
            OrliczFunction::Tabulated { samples } => {
                if ln_t <= 700.0 {
                    eval_tabulated(samples, ln_t.exp()).ln()
                } else {
                    let (t0, y0) = samples[samples.len() - 2];
                    let (t1, y1) = samples[samples.len() - 1];
                    ((y1 - y0) / (t1 - t0)).ln() + ln_t
                }
            }
        }
    }

    /// Numeric Young conjugate sup{st − Φ(t) : 0 ≤ t ≤ domain_cap}.
    ///
    /// Coarse log-spaced scan brackets the global maximiser, then ternary
    /// search refines it; the scan keeps the search correct even where the
    /// objective has a spurious local maximum (β < 1 entries near t = 1).
    pub fn conjugate(&self, s: f64, domain_cap: f64) -> Result<ConjugateValue, OrliczError> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(OrliczError::NegativeArgument(s));
        }
        if !(domain_cap > 0.0 && domain_cap.is_finite()) {
            return Err(OrliczError::InvalidInput(format!(
                "domain cap must be positive and finite, got {domain_cap}"
            )));
        }
        let g = |t: f64| s * t - self.eval_nn(t);
        let (value, argmax, interior) = legendre_sup(&g, domain_cap);
        if !interior && g(domain_cap) > g(domain_cap * (1.0 - 1e-6)) {
            return Err(OrliczError::UnboundedConjugate { s, cap: domain_cap });
        }
        Ok(ConjugateValue {
            value,
            argmax,
            attained_interior: interior,
        })
    }

    /// ln of the Young conjugate in closed form (−∞ where the conjugate
    /// vanishes, +∞ where it is identically infinite). Tabulated entries
    /// fall back to the numeric transform.
    pub fn conjugate_ln(&self, s: f64) -> Result<f64, OrliczError> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(OrliczError::NegativeArgument(s));
        }
        if s == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        match self {
            OrliczFunction::Power { p, coeff } => {
                if *p == 1.0 {
                    Ok(if s <= *coeff {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    })
                } else {
                    // argmax t* = (s/(coeff·p))^{1/(p−1)}, value s·t*·(1−1/p)
                    let ln_t = (s.ln() - (coeff * p).ln()) / (p - 1.0);
                    Ok(s.ln() + ((p - 1.0) / p).ln() + ln_t)
                }
            }
            OrliczFunction::PhiBeta { beta } => Ok(phi_beta_conjugate_ln(*beta, s)),
            OrliczFunction::LogLog => Ok(loglog_conjugate_ln(s)),
            OrliczFunction::Tabulated { .. } => {
                let c = self.conjugate(s, CONJUGATE_DOMAIN_CAP)?;
                Ok(c.value.ln())
            }
        }
    }

    /// Doubling-growth check: sup of Φ(2t)/Φ(t) over a log grid on
    /// [t_min, t_max], or the witness where the ratio keeps climbing.
    pub fn delta2_check(&self, t_min: f64, t_max: f64) -> Result<Delta2, OrliczError> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(OrliczError::InvalidInput(format!(
                "need 0 < t_min < t_max, got {t_min}, {t_max}"
            )));
        }
        const N: usize = 512;
        let ln0 = t_min.ln();
        let ln1 = t_max.ln();
        let mut ratios = Vec::with_capacity(N);
        for i in 0..N {
            let t = (ln0 + (ln1 - ln0) * i as f64 / (N - 1) as f64).exp();
            let lo = self.eval_nn(t);
            if lo == 0.0 {
                continue;
            }
            ratios.push((t, self.eval_nn(2.0 * t) / lo));
        }
        if ratios.is_empty() {
            return Err(OrliczError::InvalidInput(
                "function vanishes on the whole grid".into(),
            ));
        }
        let (mut sup_t, mut sup) = ratios[0];
        for &(t, r) in &ratios {
            if r > sup {
                sup = r;
                sup_t = t;
            }
        }
        let tail = &ratios[ratios.len() - ratios.len() / 4..];
        let tail_climbing = tail.windows(2).all(|w| w[1].1 > w[0].1);
        let last = ratios[ratios.len() - 1];
        if tail_climbing && last.1 >= sup {
            return Ok(Delta2::Violated { witness: last.0 });
        }
        let _ = sup_t;
        Ok(Delta2::Satisfied { k: sup })
    }
}

/// Numeric conjugate outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateValue {
    pub value: f64,
    pub argmax: f64,
    /// Supremum was attained strictly below the domain cap.
    pub attained_interior: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Delta2 {
    Satisfied { k: f64 },
    Violated { witness: f64 },
}

/// Maximise g over [0, cap]: coarse log scan, then ternary refinement in
/// the bracketing interval. Returns (value, argmax, attained below cap).
fn legendre_sup(g: &dyn Fn(f64) -> f64, cap: f64) -> (f64, f64, bool) {
    const SCAN: usize = 512;
    let lo = (cap * 1e-30).min(1e-18).max(f64::MIN_POSITIVE);
    let step = (cap.ln() - lo.ln()) / (SCAN - 1) as f64;
    let mut grid = Vec::with_capacity(SCAN + 1);
    grid.push(0.0);
    for i in 0..SCAN {
        grid.push((lo.ln() + step * i as f64).exp());
    }
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    // Refine every competitive scan-local maximum: the objective can
    // carry both a kink maximum and a stationary one.
    let mut cands: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == grid.len() || vals[i] >= vals[i + 1])
        })
        .collect();
    cands.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
    cands.truncate(4);
    let mut value = 0.0f64;
    let mut argmax = 0.0f64;
    for &i in &cands {
        let mut a = if i == 0 { 0.0 } else { grid[i - 1] };
        let mut b = if i + 1 < grid.len() { grid[i + 1] } else { cap };
        for _ in 0..CONJUGATE_ITERS {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if g(m1) < g(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        let t = 0.5 * (a + b);
        let v = g(t);
        if v > value {
            value = v;
            argmax = t;
        }
    }
    (value, argmax, argmax < cap * (1.0 - 1e-9))
}

/// ln Ψ for Φ(t) = t(1+log₊^β t). The maximum is the best of the kink
/// candidate t = 1 and the stationary point on the branch where the
/// derivative increases (y ≥ max(0, 1−β) in y = ln t).
fn phi_beta_conjugate_ln(beta: f64, s: f64) -> f64 {
    if s <= 1.0 {
        return f64::NEG_INFINITY;
    }
    let kink = (s - 1.0).ln();
    let deriv = |y: f64| 1.0 + y.powf(beta) + beta * y.powf(beta - 1.0);
    let y_lo = (1.0 - beta).max(0.0);
    if deriv(y_lo) > s && (beta != 1.0 || s < 2.0) {
        // No stationary point with derivative ≥ s beyond the dip.
        return kink;
    }
    let mut a = y_lo;
    let mut b = y_lo.max(1.0) + 1.0;
    let mut guard = 0;
    while deriv(b) < s {
        b *= 2.0;
        guard += 1;
        if guard > 200 {
            return kink;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if deriv(m) < s {
            a = m;
        } else {
            b = m;
        }
    }
    let y = 0.5 * (a + b);
    // Ψ at the stationary point is β y^{β−1} e^y.
    let log_term = if beta == 1.0 { 0.0 } else { (beta - 1.0) * y.ln() };
    let stationary = y + beta.ln() + log_term;
    kink.max(stationary)
}

/// ln Ψ for Φ(t) = t(1+log₊log₊ t): 0 for s ≤ 1, the kink value e(s−1)
/// up to s = 2, then e^w/w with w ≥ 1 solving 1 + ln w + 1/w = s.
fn loglog_conjugate_ln(s: f64) -> f64 {
    if s <= 1.0 {
        return f64::NEG_INFINITY;
    }
    if s <= 2.0 {
        return 1.0 + (s - 1.0).ln();
    }
    // Solve x + e^{−x} = s − 1 for x = ln w ≥ 0; Newton from x₀ = s−1
    // descends monotonically (convex residual).
    let mut x = s - 1.0;
    for _ in 0..60 {
        let f = x + (-x).exp() - (s - 1.0);
        let fp = 1.0 - (-x).exp();
        if fp <= 0.0 {
            break;
        }
        let next = x - f / fp;
        if !next.is_finite() || (next - x).abs() <= 1e-15 * x.abs() {
            x = next.max(0.0);
            break;
        }
        x = next.max(0.0);
    }
    if x > 700.0 {
        return f64::INFINITY;
    }
    x.exp() - x
}

fn eval_tabulated(samples: &[(f64, f64)], t: f64) -> f64 {
    let (t_last, y_last) = samples[samples.len() - 1];
    if t >= t_last {
        let (t0, y0) = samples[samples.len() - 2];
        return y_last + (y_last - y0) / (t_last - t0) * (t - t_last);
    }
    let idx = samples.partition_point(|&(ti, _)| ti <= t);
    let (t0, y0) = samples[idx - 1];
    let (t1, y1) = samples[idx];
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// Smallest K with Ψ(s) ≤ K·e^s on [0, s_max] for this function's
/// conjugate, with the grid argmax. Uses the closed-form log conjugate.
pub fn exponential_envelope_constant(
    phi: &OrliczFunction,
    s_max: f64,
    grid: usize,
) -> Result<(f64, f64), OrliczError> {
    if !(s_max > 0.0 && s_max.is_finite()) || grid < 2 {
        return Err(OrliczError::InvalidInput(format!(
            "need positive s_max and grid >= 2, got {s_max}, {grid}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_s = 0.0;
    for i in 0..grid {
        let s = s_max * i as f64 / (grid - 1) as f64;
        let v = phi.conjugate_ln(s)? - s;
        if v > best {
            best = v;
            best_s = s;
        }
    }
    Ok((best.exp(), best_s))
}

/// Decay report for ψ/φ over the top two decades of a log grid on
/// (0, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LittleOReport {
    pub holds: bool,
    pub max_ratio_top: f64,
    pub t_max: f64,
    pub eps: f64,
}

pub fn is_little_o(
    psi: &OrliczFunction,
    phi: &OrliczFunction,
    t_max: f64,
    eps: f64,
) -> Result<LittleOReport, OrliczError> {
    if !(t_max > 100.0 && t_max.is_finite() && eps > 0.0) {
        return Err(OrliczError::InvalidInput(format!(
            "need t_max > 100 and eps > 0, got {t_max}, {eps}"
        )));
    }
    const N: usize = 256;
    let ln1 = t_max.ln();
    let ln0 = ln1 - 2.0 * std::f64::consts::LN_10;
    let mut max_ratio: f64 = 0.0;
    for i in 0..N {
        let ln_t = ln0 + (ln1 - ln0) * i as f64 / (N - 1) as f64;
        max_ratio = max_ratio.max((psi.eval_ln(ln_t) - phi.eval_ln(ln_t)).exp());
    }
    Ok(LittleOReport {
        holds: max_ratio < eps,
        max_ratio_top: max_ratio,
        t_max,
        eps,
    })
}

/// Region a simple function can charge.
#[derive(Debug, Clone)]
pub enum Region {
    Disk(Disk),
    Polygon(ConvexPolygon),
}

impl Region {
    pub fn area(&self) -> f64 {
        match self {
            Region::Disk(d) => d.area(),
            Region::Polygon(p) => p.area(),
        }
    }

    fn coord_scale(&self) -> f64 {
        match self {
            Region::Disk(d) => d.center.x.abs().max(d.center.y.abs()).max(d.radius),
            Region::Polygon(p) => p.coord_scale(),
        }
    }

    fn overlap_area(&self, other: &Region) -> f64 {
        match (self, other) {
            (Region::Polygon(a), Region::Polygon(b)) => clip::intersection_area(a, b),
            (Region::Disk(d), Region::Polygon(p)) | (Region::Polygon(p), Region::Disk(d)) => {
                disk_polygon_area(d, p)
            }
            (Region::Disk(a), Region::Disk(b)) => disk_overlap(a, b),
        }
    }
}

fn disk_overlap(a: &Disk, b: &Disk) -> f64 {
    let d = (a.center.x - b.center.x).hypot(a.center.y - b.center.y);
    let (r1, r2) = (a.radius, b.radius);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return std::f64::consts::PI * r * r;
    }
    let cos1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let cos2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let triangle = 0.5
        * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
            .max(0.0)
            .sqrt();
    r1 * r1 * cos1.acos() + r2 * r2 * cos2.acos() - triangle
}

/// Nonnegative simple function Σ cᵢ·χ_{Rᵢ} with pairwise disjoint regions.
#[derive(Debug, Clone)]
pub struct SimpleFunction {
    pub terms: Vec<(f64, Region)>,
}

/// ∫ φ(f) for a simple function: Σ φ(cᵢ)·|Rᵢ|, regions checked pairwise
/// disjoint up to rounding slack.
pub fn integral(phi: &OrliczFunction, f: &SimpleFunction) -> Result<f64, OrliczError> {
    for (c, _) in &f.terms {
        if !(*c > 0.0 && c.is_finite()) {
            return Err(OrliczError::InvalidInput(format!(
                "simple-function coefficients must be positive and finite, got {c}"
            )));
        }
    }
    for i in 0..f.terms.len() {
        for j in i + 1..f.terms.len() {
            let scale = f.terms[i].1.coord_scale().max(f.terms[j].1.coord_scale());
            let area = f.terms[i].1.overlap_area(&f.terms[j].1);
            if area > EMPTY_AREA_FACTOR * scale * scale {
                return Err(OrliczError::OverlappingRegions { i, j, area });
            }
        }
    }
    let mut sum = crate::geom::kernel::CompensatedSum::new();
    for (c, region) in &f.terms {
        sum.add(phi.eval(*c)? * region.area());
    }
    Ok(sum.value())
}
