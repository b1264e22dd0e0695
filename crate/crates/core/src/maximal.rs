//! Maximal-operator lower bounds over rotated-rectangle families: certified
//! superlevel mass vs gauge integrals, depth-weight/density/union constant
//! scans across levels, length-extension ratios, and a raster probe for the
//! weak (1,1) behaviour of the associated averaging basis.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::angles::TForm;
use crate::construct::{
    enumerate_subsets, subset_ln_levelsets, Construction, ConstructError, PhiSpec,
};
use crate::geom::clip::intersection_area;
use crate::geom::kernel::logsumexp;
use crate::geom::measure::SubsetProfile;
use crate::geom::{ConvexPolygon, Disk, GeomError, Point, RotatedRect};
use crate::orlicz::{OrliczError, OrliczFunction, Region, SimpleFunction};
use crate::tolerances::{
    CONSTRUCTION_K_CAP, EXACT_UNION_CAP, MAXIMAL_LOWER_TOL, REL_AREA_TOL,
};

#[derive(Debug, Error)]
pub enum MaximalError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capacity exceeded: size {n} over cap {cap}")]
    Capacity { n: usize, cap: usize },
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
}

/// ln of the disk coefficient that makes every family rectangle average the
/// scaled indicator to at least one: the reciprocal density floor.
pub fn probe_ln_value(c: &Construction) -> f64 {
    -c.consts.gamma_prime.ln() - c.ln_zeta_t2k
}

/// The scaled direction-disk indicator as a concrete simple function.
/// Needs the level's scales representable in plain f64.
pub fn probe_function(c: &Construction) -> Result<SimpleFunction, MaximalError> {
    let v = probe_ln_value(c).exp();
    let ell = c.ell();
    if !(v.is_finite() && v > 0.0 && ell.is_finite() && ell > 0.0) {
        return Err(MaximalError::InvalidInput(format!(
            "level {} is outside plain f64 range; use the log-domain bound",
            c.k
        )));
    }
    let disk = Disk::new(Point::new(0.0, 0.0), ell)?;
    Ok(SimpleFunction {
        terms: vec![(v, Region::Disk(disk))],
    })
}

/// Certified floor for the maximal averaging operator on the family union,
/// for f = const·χ_{B(0,ℓ)}: min over rectangles of const·|R∩B|/|R|.
/// |R∩B(0,ℓ)| is a quarter disk whenever ℓ ≤ L, so the minimum is exact.
pub fn maximal_lower_on_union(
    c: &Construction,
    f: &SimpleFunction,
) -> Result<f64, MaximalError> {
    let (coeff, region) = match f.terms.len() {
        0 => return Ok(0.0),
        1 => &f.terms[0],
        n => {
            return Err(MaximalError::InvalidInput(format!(
                "expected a single scaled disk indicator, got {n} terms"
            )))
        }
    };
    if !(*coeff >= 0.0 && coeff.is_finite()) {
        return Err(MaximalError::InvalidInput(format!(
            "coefficient must be nonnegative and finite, got {coeff}"
        )));
    }
    let disk = match region {
        Region::Disk(d) => d,
        Region::Polygon(_) => {
            return Err(MaximalError::InvalidInput(
                "only disk-supported indicators have a certified floor".into(),
            ))
        }
    };
    if disk.center.x != 0.0 || disk.center.y != 0.0 {
        return Err(MaximalError::InvalidInput(
            "the disk must be centered at the family corner".into(),
        ));
    }
    if !c.representable() {
        return Err(MaximalError::InvalidInput(format!(
            "level {} is outside plain f64 range; use the log-domain bound",
            c.k
        )));
    }
    let ell = c.ell();
    if (disk.radius - ell).abs() > REL_AREA_TOL * ell {
        return Err(MaximalError::InvalidInput(format!(
            "disk radius {} does not match the level width {ell}",
            disk.radius
        )));
    }
    if *coeff == 0.0 {
        return Ok(0.0);
    }
    Ok(coeff * (PI / 4.0) * (-c.dims.ln_shape).exp())
}

/// Log-domain form of the same floor for a coefficient given as ln c; valid
/// at any scale. For the probe coefficient this is ln(d/sandwich) ≥ 0.
pub fn maximal_lower_ln(c: &Construction, ln_coeff: f64) -> f64 {
    ln_coeff + (PI / 4.0).ln() - c.dims.ln_shape
}

/// One level of the superlevel-mass vs gauge-integral comparison.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub k: usize,
    /// Exact union mass of the level family — all of it sits under the
    /// maximal operator's unit superlevel set.
    pub superlevel_area: f64,
    pub ln_superlevel_area: f64,
    /// ∫φ(probe function) over the plane.
    pub phi_integral: f64,
    pub ln_phi_integral: f64,
    /// superlevel_area / phi_integral; scale-free, always plain.
    pub ratio: f64,
    /// Certified floor for the ratio.
    pub gamma1: f64,
    /// Index-growth normalizer entering the floor; max(1, measured sup).
    pub growth_rate: f64,
    pub pass: bool,
}

/// max(1, sup over indices of t(i)^β/i); 1 in closed form for the linear
/// map at β = 1 and the power map at β = 1/exponent.
fn power_growth_rate(t: &TForm, beta: f64) -> f64 {
    match t {
        TForm::Linear if (beta - 1.0).abs() <= 1e-12 => 1.0,
        TForm::Power { exponent } if (beta * exponent - 1.0).abs() <= 1e-12 => 1.0,
        _ => {
            let mut m = 1.0f64;
            for i in 1..=64usize {
                m = m.max(t.eval(i).powf(beta) / i as f64);
            }
            m
        }
    }
}

/// max(1, sup of ln t(i)/i); exactly max(1, ln base) for the exponential map.
fn log_growth_rate(t: &TForm) -> f64 {
    match t {
        TForm::Exponential { base } => base.ln().max(1.0),
        _ => {
            let mut m = 1.0f64;
            for i in 1..=64usize {
                m = m.max(t.eval(i).ln().max(0.0) / i as f64);
            }
            m
        }
    }
}

/// Ratio floor and growth normalizer for a catalog gauge.
fn ratio_floor(phi: &OrliczFunction, c: &Construction) -> Result<(f64, f64), MaximalError> {
    let ln_inv_zeta = -c.cert.zeta.ln();
    let g = c.consts.gamma * c.consts.gamma_prime;
    match phi {
        OrliczFunction::PhiBeta { beta } => {
            let rate = power_growth_rate(&c.cert.t_form, *beta);
            Ok((
                ln_inv_zeta.powf(-beta) * g / (2f64.powf(beta + 1.0) * rate),
                rate,
            ))
        }
        OrliczFunction::LogLog => {
            let rate = log_growth_rate(&c.cert.t_form);
            Ok((g / (4.0 * rate * ln_inv_zeta), rate))
        }
        _ => Err(MaximalError::InvalidInput(
            "no certified ratio floor for this gauge; use a catalog entry".into(),
        )),
    }
}

fn validate_family(cs: &[Construction]) -> Result<(), MaximalError> {
    if cs.is_empty() {
        return Err(MaximalError::InvalidInput(
            "at least one construction level is required".into(),
        ));
    }
    for c in cs {
        if c.k > CONSTRUCTION_K_CAP {
            return Err(MaximalError::Capacity {
                n: c.k,
                cap: CONSTRUCTION_K_CAP,
            });
        }
    }
    for w in cs.windows(2) {
        if w[1].k <= w[0].k {
            return Err(MaximalError::InvalidInput(
                "levels must be strictly increasing".into(),
            ));
        }
        if w[1].cert != w[0].cert {
            return Err(MaximalError::InvalidInput(
                "levels must share one certificate".into(),
            ));
        }
    }
    Ok(())
}

/// Per-level comparison of the certified superlevel mass against ∫φ(probe).
/// All areas are carried in logs; the ratio itself is scale-free.
pub fn blowup_series(
    constructions: &[Construction],
    phi: &OrliczFunction,
) -> Result<Vec<BlowupReport>, MaximalError> {
    validate_family(constructions)?;
    constructions
        .iter()
        .map(|c| {
            let (gamma1, growth_rate) = ratio_floor(phi, c)?;
            let ln_v = probe_ln_value(c);
            let u = c.union_ratio()?;
            let ln_y = u.ln() + c.area_ln();
            let ln_int = phi.eval_ln(ln_v) + PI.ln() + 2.0 * c.dims.ln_ell;
            let ratio = (ln_y - ln_int).exp();
            Ok(BlowupReport {
                k: c.k,
                superlevel_area: ln_y.exp(),
                ln_superlevel_area: ln_y,
                phi_integral: ln_int.exp(),
                ln_phi_integral: ln_int,
                ratio,
                gamma1,
                growth_rate,
                pass: ratio >= gamma1 * (1.0 - MAXIMAL_LOWER_TOL),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergencePoint {
    pub k: usize,
    pub value: f64,
}

/// ∫φ(probe)/∫ψ(T·probe) per level; the common support area cancels, so the
/// quotient is scale-free and stays plain at every level.
pub fn divergence_series(
    constructions: &[Construction],
    phi: &OrliczFunction,
    psi: &OrliczFunction,
    t_factor: f64,
) -> Result<Vec<DivergencePoint>, MaximalError> {
    validate_family(constructions)?;
    if !(t_factor > 0.0 && t_factor.is_finite()) {
        return Err(MaximalError::InvalidInput(format!(
            "scaling factor must be positive and finite, got {t_factor}"
        )));
    }
    Ok(constructions
        .iter()
        .map(|c| {
            let ln_v = probe_ln_value(c);
            DivergencePoint {
                k: c.k,
                value: (phi.eval_ln(ln_v) - psi.eval_ln(t_factor.ln() + ln_v)).exp(),
            }
        })
        .collect())
}

/// One level of the covering-family constant scan.
#[derive(Debug, Clone, Serialize)]
pub struct StokolosRow {
    pub k: usize,
    /// ln of the level's comparison scale ζ^{−t(j0+2k)}.
    pub ln_lambda: f64,
    /// ln of the depth-weight quotient max over subsets S of
    /// ∫ψ(Σ_S χ_R)/Σ_S |R|.
    pub ln_c1: f64,
    /// Scale × ball density: λ·|R∩B|/|R| = (π/4)/sandwich.
    pub c2: f64,
    /// ln of union/(φ(λ)·|B|).
    pub ln_c3: f64,
    pub subsets_exhaustive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StokolosReport {
    pub rows: Vec<StokolosRow>,
    /// Every rectangle of every level has the level's area (exact products).
    pub equal_areas_ok: bool,
    pub lambda_increasing: bool,
    /// Smallest feasible depth-weight constant over all levels and subsets.
    pub c1: f64,
    pub ln_c1: f64,
    /// Smallest feasible density constant over levels; never below π/(4d).
    pub c2: f64,
    /// Largest feasible union-growth constant over levels.
    pub c3: f64,
    pub ln_c3: f64,
    /// Factor-2 stability across rows, per constant. The depth-weight
    /// quotient decays geometrically with the level by construction, so its
    /// band is recorded but does not gate `pass`.
    pub c1_band_ok: bool,
    pub c2_band_ok: bool,
    pub c3_band_ok: bool,
    /// The comparison balls double as the union-growth reference sets.
    pub reference_is_ball: bool,
    pub pass: bool,
}

fn band_ok_ln(values: &[f64]) -> bool {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo <= std::f64::consts::LN_2 + 1e-9
}

/// Scans the three covering constants across levels: the depth-weight
/// quotient over contiguous-window and seeded random subsets, the ball
/// density scaled by λ, and the union mass against φ(λ) times the ball area.
pub fn stokolos_check(
    constructions: &[Construction],
    psi: &PhiSpec,
    target: &OrliczFunction,
    seed: u64,
) -> Result<StokolosReport, MaximalError> {
    validate_family(constructions)?;
    let max_n = constructions.iter().map(|c| c.k + 1).max().unwrap_or(0);
    if psi.ln_values.len() < max_n {
        return Err(MaximalError::InvalidInput(format!(
            "depth weight '{}' covers {} depths, need {max_n}",
            psi.name,
            psi.ln_values.len()
        )));
    }
    if psi.ln_values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(MaximalError::InvalidInput(format!(
            "depth weight '{}' has non-finite entries",
            psi.name
        )));
    }

    let mut rows = Vec::with_capacity(constructions.len());
    let mut equal_areas_ok = true;
    for c in constructions {
        let fan = c.fan()?;
        let ln_lambda = -c.ln_zeta_t2k;
        let (subsets, exhaustive) = enumerate_subsets(c.k, seed);
        let mut ln_c1 = f64::NEG_INFINITY;
        for subset in &subsets {
            let sub = fan.subfamily(subset)?;
            let ln_eqs = subset_ln_levelsets(&sub);
            let mut terms = Vec::with_capacity(subset.len());
            for (m_idx, ln_eq) in ln_eqs.iter().enumerate() {
                let ln_psi = psi.ln_values[m_idx];
                if *ln_eq == f64::NEG_INFINITY || ln_psi == f64::NEG_INFINITY {
                    continue;
                }
                terms.push(ln_psi + ln_eq);
            }
            let ln_quot = logsumexp(&terms) - (subset.len() as f64).ln();
            ln_c1 = ln_c1.max(ln_quot);
        }

        // Congruent by construction; checked on the exact side products.
        if let Some(rects) = c.rects() {
            let a0 = rects[0].area();
            if rects
                .iter()
                .any(|r| (r.area() - a0).abs() > REL_AREA_TOL * a0)
            {
                equal_areas_ok = false;
            }
        }

        let c2 = (PI / 4.0) / c.dims.sandwich;
        let ln_c3 =
            c.union_ratio()?.ln() + c.dims.ln_shape - PI.ln() - target.eval_ln(ln_lambda);
        rows.push(StokolosRow {
            k: c.k,
            ln_lambda,
            ln_c1,
            c2,
            ln_c3,
            subsets_exhaustive: exhaustive,
        });
    }

    let lambda_increasing = rows.windows(2).all(|w| w[1].ln_lambda > w[0].ln_lambda);
    let ln_c1 = rows.iter().map(|r| r.ln_c1).fold(f64::NEG_INFINITY, f64::max);
    let c2 = rows.iter().map(|r| r.c2).fold(f64::INFINITY, f64::min);
    let ln_c3 = rows.iter().map(|r| r.ln_c3).fold(f64::INFINITY, f64::min);
    let c1_band_ok = band_ok_ln(&rows.iter().map(|r| r.ln_c1).collect::<Vec<_>>());
    let c2_band_ok = band_ok_ln(&rows.iter().map(|r| r.c2.ln()).collect::<Vec<_>>());
    let c3_band_ok = band_ok_ln(&rows.iter().map(|r| r.ln_c3).collect::<Vec<_>>());
    let finite = ln_c1.is_finite() && c2 > 0.0 && c2.is_finite() && ln_c3.is_finite();
    Ok(StokolosReport {
        rows,
        equal_areas_ok,
        lambda_increasing,
        c1: ln_c1.exp(),
        ln_c1,
        c2,
        c3: ln_c3.exp(),
        ln_c3,
        c1_band_ok,
        c2_band_ok,
        c3_band_ok,
        reference_is_ball: true,
        pass: equal_areas_ok && lambda_increasing && finite && c2_band_ok && c3_band_ok,
    })
}

/// A rotated rectangle with its corner translated away from the origin.
#[derive(Debug, Clone, Serialize)]
pub struct PlacedRect {
    pub rect: RotatedRect,
    pub offset: Point,
}

impl PlacedRect {
    pub fn at_origin(rect: RotatedRect) -> Self {
        PlacedRect {
            rect,
            offset: Point::new(0.0, 0.0),
        }
    }

    fn polygon(&self) -> ConvexPolygon {
        translate(&self.rect.to_polygon(), self.offset)
    }

    fn extended(&self, factor: f64) -> ConvexPolygon {
        translate(&self.rect.extended_polygon(factor), self.offset)
    }
}

fn translate(p: &ConvexPolygon, by: Point) -> ConvexPolygon {
    ConvexPolygon::from_raw(
        p.vertices()
            .iter()
            .map(|v| Point::new(v.x + by.x, v.y + by.y))
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct KakeyaReport {
    pub n: usize,
    pub extension: f64,
    pub union_area: f64,
    pub extended_union_area: f64,
    /// |∪ extended| / |∪ original|.
    pub ratio: f64,
    /// min over pieces of |R ∩ R*|/|R*| — the averaged mass any extended
    /// piece sees of the original union; 1/extension for a single piece.
    pub maximal_check: f64,
}

/// Measures how much the union grows when every piece is lengthened about
/// its center by `extension` (width and center kept). Exact unions cap the
/// family size; squares are rejected because lengthening a square picks an
/// arbitrary axis.
pub fn kakeya_ratio(pieces: &[PlacedRect], extension: f64) -> Result<KakeyaReport, MaximalError> {
    if pieces.is_empty() {
        return Err(MaximalError::InvalidInput(
            "at least one rectangle is required".into(),
        ));
    }
    if pieces.len() > EXACT_UNION_CAP {
        return Err(MaximalError::Capacity {
            n: pieces.len(),
            cap: EXACT_UNION_CAP,
        });
    }
    if !(extension > 1.0 && extension.is_finite()) {
        return Err(MaximalError::InvalidInput(format!(
            "extension factor must exceed 1, got {extension}"
        )));
    }
    for p in pieces {
        if p.rect.len == p.rect.ell {
            return Err(MaximalError::InvalidInput(format!(
                "square piece ({} × {}): length and width must differ",
                p.rect.len, p.rect.ell
            )));
        }
        if !p.offset.is_finite() {
            return Err(MaximalError::InvalidInput("non-finite offset".into()));
        }
    }
    // The ratio and the check are scale-invariant; renormalizing to unit
    // max length keeps the clipping kernel away from its absolute guards
    // when the family lives at tiny (or huge) coordinates.
    let scale = pieces
        .iter()
        .map(|p| p.rect.len.max(p.rect.ell))
        .fold(0.0f64, f64::max);
    let s = 1.0 / scale;
    let mut scaled = Vec::with_capacity(pieces.len());
    for p in pieces {
        let rect = RotatedRect::new(p.rect.len * s, p.rect.ell * s, p.rect.theta)
            .map_err(|_| {
                MaximalError::InvalidInput(format!(
                    "piece {} × {} too extreme to renormalize",
                    p.rect.len, p.rect.ell
                ))
            })?;
        scaled.push(PlacedRect {
            rect,
            offset: Point::new(p.offset.x * s, p.offset.y * s),
        });
    }
    let polys: Vec<_> = scaled.iter().map(|p| p.polygon()).collect();
    let extended: Vec<_> = scaled.iter().map(|p| p.extended(extension)).collect();
    let back = scale * scale;
    let union_area = SubsetProfile::compute(&polys)?.union_area() * back;
    let extended_union_area = SubsetProfile::compute(&extended)?.union_area() * back;
    let mut maximal_check = f64::INFINITY;
    for (p, (poly, ext)) in scaled.iter().zip(polys.iter().zip(&extended)) {
        let share = intersection_area(poly, ext) / (extension * p.rect.area());
        maximal_check = maximal_check.min(share);
    }
    Ok(KakeyaReport {
        n: pieces.len(),
        extension,
        union_area,
        extended_union_area,
        ratio: extended_union_area / union_area,
        maximal_check,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weak11Report {
    pub trials: usize,
    pub grid: usize,
    /// max over trials of |{Mf > α}|·α/‖f‖₁.
    pub max_constant: f64,
    pub first_half_max: f64,
    /// Observed max doubled during the later trials — growth not ruled out.
    pub unbounded_trend: bool,
}

/// Estimates the weak (1,1) quotient of the axis-parallel averaging basis
/// built from the family's side lengths, on a 2048² raster. Random simple
/// functions and thresholds; a statistical probe, not a certificate.
pub fn weak11_probe(
    family: &[Construction],
    trials: usize,
    seed: u64,
) -> Result<Weak11Report, MaximalError> {
    weak11_probe_on_grid(family, trials, seed, 2048)
}

/// Same probe with an explicit raster resolution.
pub fn weak11_probe_on_grid(
    family: &[Construction],
    trials: usize,
    seed: u64,
    grid: usize,
) -> Result<Weak11Report, MaximalError> {
    validate_family(family)?;
    if trials < 100 {
        return Err(MaximalError::InvalidInput(format!(
            "at least 100 trials are required, got {trials}"
        )));
    }
    if !(64..=8192).contains(&grid) {
        return Err(MaximalError::InvalidInput(format!(
            "grid must sit in [64, 8192], got {grid}"
        )));
    }
    let mut windows = Vec::with_capacity(family.len());
    for c in family {
        if !c.representable() {
            return Err(MaximalError::InvalidInput(format!(
                "level {} is outside plain f64 range",
                c.k
            )));
        }
        let w = ((c.len() * grid as f64).round() as usize).clamp(1, grid);
        let h = ((c.ell() * grid as f64).round() as usize).clamp(1, grid);
        windows.push((w, h));
    }

    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || Raster::new(grid),
            |r, t| r.trial(seed.wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)), &windows),
        )
        .collect();

    let half = trials / 2;
    let first_half_max = ratios[..half].iter().fold(0.0f64, |a, &b| a.max(b));
    let max_constant = ratios.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(Weak11Report {
        trials,
        grid,
        max_constant,
        first_half_max,
        unbounded_trend: first_half_max > 0.0 && max_constant >= 2.0 * first_half_max,
    })
}

/// Scratch buffers for one probe thread.
struct Raster {
    n: usize,
    f: Vec<f64>,
    prefix: Vec<f64>,
    avg: Vec<f64>,
    dil: Vec<f64>,
    sup: Vec<f64>,
    col: Vec<f64>,
    deque: VecDeque<usize>,
}

impl Raster {
    fn new(n: usize) -> Self {
        Raster {
            n,
            f: vec![0.0; n * n],
            prefix: vec![0.0; (n + 1) * (n + 1)],
            avg: vec![0.0; n * n],
            dil: vec![0.0; n * n],
            sup: vec![0.0; n * n],
            col: vec![0.0; n],
            deque: VecDeque::new(),
        }
    }

    /// One random simple function + threshold; returns |{Mf > α}|·α/‖f‖₁.
    fn trial(&mut self, seed: u64, windows: &[(usize, usize)]) -> f64 {
        let Raster {
            n,
            f,
            prefix,
            avg,
            dil,
            sup,
            col,
            deque,
        } = self;
        let n = *n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        f.iter_mut().for_each(|v| *v = 0.0);
        let pieces = 1 + rng.random_range(0..4usize);
        let mut f_sup = 0.0f64;
        for _ in 0..pieces {
            let x0 = rng.random_range(0.0..0.7);
            let y0 = rng.random_range(0.0..0.7);
            let w = rng.random_range(0.05..0.3);
            let h = rng.random_range(0.05..0.3);
            let height = rng.random_range(0.1..4.0);
            let ix0 = (x0 * n as f64) as usize;
            let iy0 = (y0 * n as f64) as usize;
            let ix1 = (((x0 + w) * n as f64) as usize).clamp(ix0 + 1, n);
            let iy1 = (((y0 + h) * n as f64) as usize).clamp(iy0 + 1, n);
            for y in iy0..iy1 {
                for x in ix0..ix1 {
                    f[y * n + x] += height;
                }
            }
        }
        for &v in f.iter() {
            f_sup = f_sup.max(v);
        }
        let alpha = rng.random_range(0.05..1.05) * f_sup;

        for y in 0..n {
            let mut row = 0.0;
            for x in 0..n {
                row += f[y * n + x];
                prefix[(y + 1) * (n + 1) + x + 1] = prefix[y * (n + 1) + x + 1] + row;
            }
        }
        let l1 = prefix[(n + 1) * (n + 1) - 1];
        if l1 <= 0.0 {
            return 0.0;
        }

        sup.iter_mut().for_each(|v| *v = 0.0);
        for &(w, h) in windows {
            let inv = 1.0 / (w * h) as f64;
            for y in 0..n {
                for x in 0..n {
                    avg[y * n + x] = if x + w <= n && y + h <= n {
                        let (p, q) = (y * (n + 1) + x, (y + h) * (n + 1) + x);
                        (prefix[q + w] - prefix[q] - prefix[p + w] + prefix[p]) * inv
                    } else {
                        f64::NEG_INFINITY
                    };
                }
            }
            // Anchor max over each row window, then over each column window,
            // gives max over all placements covering the cell.
            for y in 0..n {
                sliding_max(&avg[y * n..(y + 1) * n], w, deque, |x, v| {
                    dil[y * n + x] = v
                });
            }
            for x in 0..n {
                for y in 0..n {
                    col[y] = dil[y * n + x];
                }
                sliding_max(col, h, deque, |y, v| {
                    let s = &mut sup[y * n + x];
                    *s = s.max(v);
                });
            }
        }

        let cell = 1.0 / (n as f64 * n as f64);
        let count = sup.iter().filter(|&&m| m > alpha).count();
        count as f64 * cell * alpha / (l1 * cell)
    }
}

/// dst(x) = max of src over the window [x−w+1, x]; −∞ entries mark invalid
/// anchors and never win.
fn sliding_max(src: &[f64], w: usize, deque: &mut VecDeque<usize>, mut emit: impl FnMut(usize, f64)) {
    deque.clear();
    for x in 0..src.len() {
        while let Some(&back) = deque.back() {
            if src[back] <= src[x] {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(x);
        if let Some(&front) = deque.front() {
            if front + w <= x {
                deque.pop_front();
            }
        }
        emit(x, src[*deque.front().expect("window is never empty")]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{derive_certificate, generate, AngleSequenceSpec, Regime};
    use crate::construct::{build_nested_family, phi_from_conjugate, phi_shifted_exp};
    use crate::orlicz::integral;

    fn family(regime: Regime, count: usize, kmax: usize) -> Vec<Construction> {
        let spec = AngleSequenceSpec::new(regime, count).unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        build_nested_family(&seq, &cert, kmax).unwrap()
    }

    fn lacunary(kmax: usize) -> Vec<Construction> {
        family(
            Regime::Lacunary {
                lambda: 0.25,
                mu: 0.35,
                m0: 0.25,
                ratios: None,
            },
            24,
            kmax,
        )
    }

    fn superlacunary(kmax: usize) -> Vec<Construction> {
        family(
            Regime::Superlacunary {
                d: 2,
                lambda: 0.9,
                mu: 0.95,
                m0: 0.9,
                ratios: None,
            },
            12,
            kmax,
        )
    }

    fn power(kmax: usize) -> Vec<Construction> {
        family(
            Regime::Power {
                d: 0.5,
                a: 0.02,
                b: 0.02,
                coeffs: None,
            },
            8,
            kmax,
        )
    }

    #[test]
    fn indicator_floor_matches_quarter_disk_density() {
        let c = lacunary(4).pop().unwrap();
        let f = SimpleFunction {
            terms: vec![(
                1.0,
                Region::Disk(Disk::new(Point::new(0.0, 0.0), c.ell()).unwrap()),
            )],
        };
        let got = maximal_lower_on_union(&c, &f).unwrap();
        let want = (PI / 4.0) * (c.ell() / c.len());
        assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn probe_average_reaches_one_at_every_scale() {
        for c in lacunary(6) {
            let f = probe_function(&c).unwrap();
            let got = maximal_lower_on_union(&c, &f).unwrap();
            assert!(got >= 1.0 - MAXIMAL_LOWER_TOL, "k={} got {got}", c.k);
            let want = c.consts.d_c / c.dims.sandwich;
            assert!((got - want).abs() <= 1e-9 * want);
        }
        // Far past plain f64: the log-domain floor still certifies ≥ 1.
        for c in superlacunary(5) {
            let ln_floor = maximal_lower_ln(&c, probe_ln_value(&c));
            assert!(ln_floor >= -1e-12, "k={} ln floor {ln_floor}", c.k);
        }
    }

    #[test]
    fn zero_function_floors_at_zero() {
        let c = lacunary(3).pop().unwrap();
        let zero = SimpleFunction { terms: vec![] };
        assert_eq!(maximal_lower_on_union(&c, &zero).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_shapes_are_rejected() {
        let c = lacunary(3).pop().unwrap();
        let disk = || Region::Disk(Disk::new(Point::new(0.0, 0.0), c.ell()).unwrap());
        let two = SimpleFunction {
            terms: vec![(1.0, disk()), (1.0, disk())],
        };
        assert!(matches!(
            maximal_lower_on_union(&c, &two),
            Err(MaximalError::InvalidInput(_))
        ));
        let poly = SimpleFunction {
            terms: vec![(
                1.0,
                Region::Polygon(RotatedRect::new(1.0, 0.5, 0.0).unwrap().to_polygon()),
            )],
        };
        assert!(matches!(
            maximal_lower_on_union(&c, &poly),
            Err(MaximalError::InvalidInput(_))
        ));
        let off_center = SimpleFunction {
            terms: vec![(
                1.0,
                Region::Disk(Disk::new(Point::new(0.1, 0.0), c.ell()).unwrap()),
            )],
        };
        assert!(matches!(
            maximal_lower_on_union(&c, &off_center),
            Err(MaximalError::InvalidInput(_))
        ));
        let wrong_radius = SimpleFunction {
            terms: vec![(
                1.0,
                Region::Disk(Disk::new(Point::new(0.0, 0.0), 2.0 * c.ell()).unwrap()),
            )],
        };
        assert!(matches!(
            maximal_lower_on_union(&c, &wrong_radius),
            Err(MaximalError::InvalidInput(_))
        ));
    }

    #[test]
    fn blowup_ratio_beats_floor_linear_regime() {
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        let reports = blowup_series(&lacunary(8), &phi).unwrap();
        assert_eq!(reports.len(), 8);
        for r in &reports {
            assert_eq!(r.growth_rate, 1.0);
            assert!(r.pass, "k={} ratio {} floor {}", r.k, r.ratio, r.gamma1);
            assert!(r.ratio >= r.gamma1);
        }
    }

    #[test]
    fn blowup_matches_direct_integral_at_plain_scale() {
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        let cs = lacunary(3);
        let reports = blowup_series(&cs, &phi).unwrap();
        for (c, r) in cs.iter().zip(&reports) {
            let direct = integral(&phi, &probe_function(c).unwrap()).unwrap();
            assert!(
                (r.phi_integral - direct).abs() <= 1e-9 * direct,
                "k={} series {} direct {direct}",
                r.k,
                r.phi_integral
            );
            let union = c.union_ratio().unwrap() * c.area_ln().exp();
            assert!((r.superlevel_area - union).abs() <= 1e-9 * union);
        }
    }

    #[test]
    fn blowup_ratio_beats_floor_exponential_regime() {
        let reports = blowup_series(&superlacunary(5), &OrliczFunction::loglog()).unwrap();
        for r in &reports {
            assert_eq!(r.growth_rate, 1.0);
            assert!(r.pass, "k={} ratio {} floor {}", r.k, r.ratio, r.gamma1);
            // Deep levels have vanished in plain f64 but not in logs.
            assert!(r.ln_superlevel_area.is_finite());
        }
    }

    #[test]
    fn blowup_ratio_beats_floor_power_regime() {
        let phi = OrliczFunction::phi_beta(2.0).unwrap();
        for r in blowup_series(&power(6), &phi).unwrap() {
            assert_eq!(r.growth_rate, 1.0);
            assert!(r.pass, "k={} ratio {} floor {}", r.k, r.ratio, r.gamma1);
        }
    }

    #[test]
    fn blowup_rejects_bad_inputs() {
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        assert!(matches!(
            blowup_series(&[], &phi),
            Err(MaximalError::InvalidInput(_))
        ));
        let mut mixed = lacunary(2);
        mixed.extend(superlacunary(3).drain(2..));
        assert!(matches!(
            blowup_series(&mixed, &phi),
            Err(MaximalError::InvalidInput(_))
        ));
        let power_gauge = OrliczFunction::power(2.0, 1.0).unwrap();
        assert!(matches!(
            blowup_series(&lacunary(2), &power_gauge),
            Err(MaximalError::InvalidInput(_))
        ));
    }

    #[test]
    fn divergence_grows_and_control_stays_bounded() {
        let cs = lacunary(8);
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        let linear = OrliczFunction::power(1.0, 1.0).unwrap();
        let series = divergence_series(&cs, &phi, &linear, 2.0).unwrap();
        for w in series.windows(2) {
            assert!(w[1].value > w[0].value);
        }
        assert!(series.last().unwrap().value > 10.0);
        let control = divergence_series(&cs, &phi, &phi, 2.0).unwrap();
        for p in &control {
            assert!(p.value <= 1.0, "k={} control {}", p.k, p.value);
        }
    }

    #[test]
    fn stokolos_linear_regime_constants() {
        let cs: Vec<_> = lacunary(8).drain(2..).collect();
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        let psi = phi_from_conjugate(&phi, 9).unwrap();
        let r = stokolos_check(&cs, &psi, &phi, 11).unwrap();
        assert!(r.pass);
        assert!(r.equal_areas_ok && r.lambda_increasing && r.reference_is_ball);
        let gp = cs[0].consts.gamma_prime;
        assert!(r.c2 >= gp * (1.0 - 1e-12), "c2 {} floor {gp}", r.c2);
        assert!(r.c2 <= (PI / 4.0) / cs[0].consts.c_c * (1.0 + 1e-12));
        assert!(r.c2_band_ok && r.c3_band_ok);
        assert!(r.c3 > 0.5 && r.c3 < 4.0, "c3 {}", r.c3);
        // The depth-weight quotient decays level by level; its band is
        // recorded as broken without failing the scan.
        assert!(!r.c1_band_ok);
        assert!(r.ln_c1.is_finite() && r.c1 > 0.0);
        for w in r.rows.windows(2) {
            assert!(w[1].ln_c1 < w[0].ln_c1);
        }
    }

    #[test]
    fn stokolos_exponential_regime_collapses_depth_weight() {
        // The numeric conjugate of the log-log gauge leaves the f64 domain
        // by depth 5; the shifted-exponential weight covers any depth.
        let cs: Vec<_> = superlacunary(5).drain(2..).collect();
        let psi = phi_shifted_exp(6);
        let r = stokolos_check(&cs, &psi, &OrliczFunction::loglog(), 7).unwrap();
        assert!(r.pass);
        assert!(r.c2_band_ok && r.c3_band_ok && !r.c1_band_ok);
        for w in r.rows.windows(2) {
            assert!(
                w[1].ln_c1 < w[0].ln_c1 - 100.0,
                "depth weight shed only {} nats",
                w[0].ln_c1 - w[1].ln_c1
            );
        }
    }

    #[test]
    fn stokolos_validates_depth_weight_length() {
        let cs = lacunary(5);
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        let short = phi_from_conjugate(&phi, 3).unwrap();
        assert!(matches!(
            stokolos_check(&cs, &short, &phi, 0),
            Err(MaximalError::InvalidInput(_))
        ));
    }

    #[test]
    fn kakeya_single_rect_triples_exactly() {
        let r = PlacedRect::at_origin(RotatedRect::new(1.0, 0.01, 0.3).unwrap());
        let out = kakeya_ratio(&[r], 3.0).unwrap();
        assert!((out.ratio - 3.0).abs() <= 1e-9);
        assert!((out.maximal_check - 1.0 / 3.0).abs() <= 1e-9);
    }

    #[test]
    fn kakeya_disjoint_pair_triples_exactly() {
        let a = PlacedRect::at_origin(RotatedRect::new(1.0, 0.02, 0.1).unwrap());
        let b = PlacedRect {
            rect: RotatedRect::new(1.0, 0.02, 1.2).unwrap(),
            offset: Point::new(50.0, 0.0),
        };
        let out = kakeya_ratio(&[a, b], 3.0).unwrap();
        assert!((out.ratio - 3.0).abs() <= 1e-9, "ratio {}", out.ratio);
        assert!((out.maximal_check - 1.0 / 3.0).abs() <= 1e-9);
    }

    #[test]
    fn kakeya_family_gains_more_than_extension() {
        let cs = lacunary(8);
        let reports: Vec<_> = cs
            .iter()
            .map(|c| {
                let pieces: Vec<_> = c
                    .rects()
                    .unwrap()
                    .into_iter()
                    .map(PlacedRect::at_origin)
                    .collect();
                kakeya_ratio(&pieces, 3.0).unwrap()
            })
            .collect();
        // Extending a corner fan gains slightly more than the factor; the
        // gain decays level by level until it drowns in clipping noise.
        for (c, r) in cs.iter().zip(&reports) {
            assert!((r.ratio - 3.0).abs() < 0.01, "ratio {}", r.ratio);
            // Clipped-polygon noise grows with the aspect ratio.
            let tol = 1e-9 + 8.0 * f64::EPSILON * c.dims.ln_shape.exp();
            assert!(r.maximal_check >= 1.0 / 3.0 - tol);
        }
        assert!(reports[0].ratio > 3.005);
        for w in reports[..6].windows(2) {
            assert!(w[1].ratio - 3.0 > 0.0, "gain vanished at {}", w[1].ratio);
            assert!(w[1].ratio < w[0].ratio, "gain grew to {}", w[1].ratio);
        }
        for r in &reports[6..] {
            assert!((r.ratio - 3.0).abs() < 1e-5, "tail ratio {}", r.ratio);
        }
    }

    #[test]
    fn kakeya_rejects_squares_and_oversized_families() {
        let sq = PlacedRect::at_origin(RotatedRect::new(1.0, 1.0, 0.2).unwrap());
        assert!(matches!(
            kakeya_ratio(&[sq], 3.0),
            Err(MaximalError::InvalidInput(_))
        ));
        let many: Vec<_> = (0..EXACT_UNION_CAP + 1)
            .map(|i| {
                PlacedRect::at_origin(
                    RotatedRect::new(1.0, 0.01, 1e-4 * (i + 1) as f64).unwrap(),
                )
            })
            .collect();
        assert!(matches!(
            kakeya_ratio(&many, 3.0),
            Err(MaximalError::Capacity { n, cap: EXACT_UNION_CAP }) if n == EXACT_UNION_CAP + 1
        ));
    }

    #[test]
    fn weak_probe_is_deterministic_and_bounded() {
        let cs = lacunary(2);
        let a = weak11_probe_on_grid(&cs, 100, 42, 256).unwrap();
        let b = weak11_probe_on_grid(&cs, 100, 42, 256).unwrap();
        assert_eq!(a, b);
        assert!(a.max_constant.is_finite() && a.max_constant > 0.0);
        assert!(a.max_constant < 1e3, "constant {}", a.max_constant);
        assert!(a.first_half_max <= a.max_constant);
        let c = weak11_probe_on_grid(&cs, 100, 43, 256).unwrap();
        assert!(c.max_constant != a.max_constant);
    }

    #[test]
    fn weak_probe_validates_inputs() {
        let cs = lacunary(2);
        assert!(matches!(
            weak11_probe_on_grid(&cs, 50, 1, 256),
            Err(MaximalError::InvalidInput(_))
        ));
        assert!(matches!(
            weak11_probe_on_grid(&cs, 100, 1, 32),
            Err(MaximalError::InvalidInput(_))
        ));
    }

    #[test]
    fn reports_serialize() {
        let phi = OrliczFunction::phi_beta(1.0).unwrap();
        let reports = blowup_series(&lacunary(2), &phi).unwrap();
        let json = serde_json::to_string(&reports).unwrap();
        assert!(json.contains("\"gamma1\""));
        let psi = phi_from_conjugate(&phi, 3).unwrap();
        let scan = stokolos_check(&lacunary(2), &psi, &phi, 5).unwrap();
        assert!(serde_json::to_string(&scan).unwrap().contains("\"c2\""));
    }
}
