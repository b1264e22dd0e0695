//! Nested rotated-rectangle families over certified direction sequences.
//!
//! A level-k family places k+1 congruent rectangles [0,L]×[0,ℓ], one per
//! certified angle, all sharing the corner at the origin. The aspect ratio
//! is pinned to the separation data by (L/ℓ)² = 4 + 16·C⁻²·ζ^(−2·t(j0+2k)),
//! which traps the scale-free product (L/ℓ)·ζ^(t(j0+2k)) between 4/C and
//! 2√(1+4C⁻²) at every level. Dimensions live in log form; concrete
//! polygons are materialized only when they fit in f64, and every check has
//! a log-space route that works at any scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::angles::{verify_certificate, AngleError, AngleSequence, SeparationCertificate};
use crate::geom::clip::intersection_area;
use crate::geom::disk::disk_polygon_area;
use crate::geom::fan::FanFamily;
use crate::geom::kernel::logsumexp;
use crate::geom::{Disk, GeomError, HalfRect, Point, RotatedRect};
use crate::orlicz::{OrliczError, OrliczFunction};
use crate::tolerances::{
    COORD_LN_CAP, CONSTRUCTION_K_CAP, GEOM_SHAPE_CAP, HALF_UNION_REL_TOL, PHI_BOUND_LN_TOL,
    QUARTER_DISK_REL_TOL, REL_AREA_TOL, SHAPE_REL_TOL,
};

use std::f64::consts::{LN_2, PI};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("level {k} exceeds the verification capacity {cap}")]
    Capacity { k: usize, cap: usize },
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
}

/// Constants determined by the separation constant C alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Lower sandwich bound 4/C.
    pub c_c: f64,
    /// Upper sandwich bound 2·√(1 + 4/C²); always exceeds `c_c` since
    /// d² − c² = 4.
    pub d_c: f64,
    /// Overlap-integral constant 2/(C·c_c), identically ½.
    pub e_c: f64,
    /// Union-mass constant c_c/(2π).
    pub gamma: f64,
    /// Per-rectangle density constant π/(4·d_c).
    pub gamma_prime: f64,
    /// Weighted-overlap constant; equal to `e_c`.
    pub gamma_dprime: f64,
}

impl DerivedConstants {
    pub fn from_separation(c: f64) -> Result<Self, ConstructError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ConstructError::InvalidInput(format!(
                "separation constant must be positive finite, got {c}"
            )));
        }
        let c_c = 4.0 / c;
        let d_c = 2.0 * (1.0 + 4.0 / (c * c)).sqrt();
        let e_c = 2.0 / (c * c_c);
        Ok(DerivedConstants {
            c_c,
            d_c,
            e_c,
            gamma: c_c / (2.0 * PI),
            gamma_prime: PI / (4.0 * d_c),
            gamma_dprime: e_c,
        })
    }
}

/// Log-domain dimensions of one level's rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalDims {
    pub ln_len: f64,
    pub ln_ell: f64,
    /// ln(L/ℓ); always exceeds ln 2.
    pub ln_shape: f64,
    /// (L/ℓ)·ζ^t at this level's exponent. Scale-free; when ζ^(2t)
    /// underflows it collapses to exactly 4/C.
    pub sandwich: f64,
}

/// Side lengths for level k under the length cap ε, in log form. The
/// aspect satisfies (L/ℓ)² = 4 + 16·C⁻²·ζ^(−2t) exactly, with t evaluated
/// at global index j0 + 2k.
pub fn build_interval_ln(
    cert: &SeparationCertificate,
    k: usize,
    ln_epsilon: f64,
) -> Result<IntervalDims, ConstructError> {
    if k == 0 {
        return Err(ConstructError::InvalidInput("level must be ≥ 1".into()));
    }
    if !ln_epsilon.is_finite() {
        return Err(ConstructError::InvalidInput(format!(
            "length cap must be positive finite, got ln ε = {ln_epsilon}"
        )));
    }
    let c = cert.c_sep;
    if !(c > 0.0 && c.is_finite()) {
        return Err(ConstructError::InvalidInput(format!(
            "certificate carries a bad separation constant {c}"
        )));
    }
    let ln_zeta_t = cert.ln_zeta_t(cert.j0 + 2 * k);
    let ln_shape = 0.5 * logsumexp(&[2.0 * LN_2, (16.0 / (c * c)).ln() - 2.0 * ln_zeta_t]);
    let sandwich = (4.0 * (2.0 * ln_zeta_t).exp() + 16.0 / (c * c)).sqrt();
    Ok(IntervalDims {
        ln_len: ln_epsilon,
        ln_ell: ln_epsilon - ln_shape,
        ln_shape,
        sandwich,
    })
}

/// Plain-scale wrapper over [`build_interval_ln`]; the returned pair may
/// overflow or underflow f64 at deep levels.
pub fn build_interval(
    cert: &SeparationCertificate,
    k: usize,
    epsilon: f64,
) -> Result<(f64, f64), ConstructError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ConstructError::InvalidInput(format!(
            "length cap must be positive finite, got {epsilon}"
        )));
    }
    let dims = build_interval_ln(cert, k, epsilon.ln())?;
    Ok((dims.ln_len.exp(), dims.ln_ell.exp()))
}

/// One level: k+1 congruent rectangles over the first k+1 certified
/// angles, plus the direction disk B(0, ℓ) they are measured against.
#[derive(Debug, Clone, Serialize)]
pub struct Construction {
    pub k: usize,
    pub dims: IntervalDims,
    pub ln_epsilon: f64,
    /// Strictly decreasing angles; local index i is global index j0 + i.
    pub thetas: Vec<f64>,
    pub tangents: Vec<f64>,
    /// t(j0 + 2k)·ln ζ, the exponent pinned to this level.
    pub ln_zeta_t2k: f64,
    pub cert: SeparationCertificate,
    pub consts: DerivedConstants,
}

impl Construction {
    /// L; may overflow/underflow f64 — `dims.ln_len` is the source of truth.
    pub fn len(&self) -> f64 {
        self.dims.ln_len.exp()
    }

    pub fn ell(&self) -> f64 {
        self.dims.ln_ell.exp()
    }

    /// ln|Q| = ln(L·ℓ).
    pub fn area_ln(&self) -> f64 {
        self.dims.ln_len + self.dims.ln_ell
    }

    /// Both side lengths are normal f64 values.
    pub fn representable(&self) -> bool {
        self.dims.ln_len < 709.0 && self.dims.ln_ell > -708.0
    }

    /// Whether polygon clipping and disk integration are safe: coordinates
    /// and their pairwise products stay inside f64 range.
    pub fn geometric_capable(&self) -> bool {
        self.dims.ln_shape <= GEOM_SHAPE_CAP.ln()
            && self.dims.ln_len.abs() <= COORD_LN_CAP
            && self.dims.ln_ell.abs() <= COORD_LN_CAP
    }

    pub fn rects(&self) -> Option<Vec<RotatedRect>> {
        if !self.representable() {
            return None;
        }
        let (l, e) = (self.len(), self.ell());
        self.thetas
            .iter()
            .map(|&th| RotatedRect::new(l, e, th).ok())
            .collect()
    }

    pub fn half_rects(&self) -> Option<Vec<HalfRect>> {
        self.rects()
            .map(|rs| rs.into_iter().map(HalfRect::new).collect())
    }

    /// The direction disk B(0, ℓ).
    pub fn direction_disk(&self) -> Option<Disk> {
        if !self.representable() {
            return None;
        }
        Disk::new(Point::new(0.0, 0.0), self.ell()).ok()
    }

    /// Closed-form measure engine for the family; exact at any scale.
    pub fn fan(&self) -> Result<FanFamily, GeomError> {
        FanFamily::new(self.tangents.clone(), self.dims.ln_shape)
    }

    /// |⋃ R| / |Q|.
    pub fn union_ratio(&self) -> Result<f64, GeomError> {
        Ok(self.fan()?.union_ratio())
    }

    /// ln|⋃ R|.
    pub fn union_area_ln(&self) -> Result<f64, GeomError> {
        Ok(self.union_ratio()?.ln() + self.area_ln())
    }
}

/// Level-k family from the first k+1 angles of a certified sequence, with
/// the length cap given in log form.
pub fn build_construction_ln(
    seq: &AngleSequence,
    cert: &SeparationCertificate,
    k: usize,
    ln_epsilon: f64,
) -> Result<Construction, ConstructError> {
    if k == 0 {
        return Err(ConstructError::InvalidInput("level must be ≥ 1".into()));
    }
    if seq.len() < k + 1 {
        return Err(ConstructError::InvalidInput(format!(
            "sequence has {} angles, level {k} needs {}",
            seq.len(),
            k + 1
        )));
    }
    let report = verify_certificate(seq, cert, k)?;
    if !report.separation_pass || !report.tangent_gap_pass {
        return Err(ConstructError::InvalidInput(format!(
            "sequence is not certified through index {k}: worst ln margin {:.3e}",
            report.worst_ln_margin.min(report.worst_tangent_ln_margin)
        )));
    }
    let dims = build_interval_ln(cert, k, ln_epsilon)?;
    Ok(Construction {
        k,
        dims,
        ln_epsilon,
        thetas: seq.thetas[..=k].to_vec(),
        tangents: seq.tangents[..=k].to_vec(),
        ln_zeta_t2k: cert.ln_zeta_t(cert.j0 + 2 * k),
        cert: cert.clone(),
        consts: DerivedConstants::from_separation(cert.c_sep)?,
    })
}

pub fn build_construction(
    seq: &AngleSequence,
    cert: &SeparationCertificate,
    k: usize,
    epsilon: f64,
) -> Result<Construction, ConstructError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ConstructError::InvalidInput(format!(
            "length cap must be positive finite, got {epsilon}"
        )));
    }
    build_construction_ln(seq, cert, k, epsilon.ln())
}

/// Levels 1..=kmax with ε₁ = 1 and ε_{k+1} = min(ℓ_k, 1/k), so each level's
/// rectangle fits inside the previous level's short side.
pub fn build_nested_family(
    seq: &AngleSequence,
    cert: &SeparationCertificate,
    kmax: usize,
) -> Result<Vec<Construction>, ConstructError> {
    if kmax < 2 {
        return Err(ConstructError::InvalidInput(
            "a nested family needs at least two levels".into(),
        ));
    }
    let mut out = Vec::with_capacity(kmax);
    let mut ln_eps = 0.0;
    for k in 1..=kmax {
        let c = build_construction_ln(seq, cert, k, ln_eps)?;
        ln_eps = c.dims.ln_ell.min(-(k as f64).ln());
        out.push(c);
    }
    Ok(out)
}

/// Nesting audit for a family built by [`build_nested_family`].
#[derive(Debug, Clone, Serialize)]
pub struct NestingReport {
    pub levels: usize,
    /// L_{k+1} ≤ ℓ_k and ℓ_{k+1} ≤ ℓ_k for every transition.
    pub inclusion_ok: bool,
    /// diam Q_k ≤ 1/(k−1) for k ≥ 2, checked in log form.
    pub diameter_ok: bool,
    pub strictly_shrinking: bool,
    /// Smallest log gap seen across transitions.
    pub worst_ln_slack: f64,
}

pub fn verify_nesting(family: &[Construction]) -> Result<NestingReport, ConstructError> {
    if family.len() < 2 {
        return Err(ConstructError::InvalidInput(
            "nesting audit needs at least two levels".into(),
        ));
    }
    for (i, c) in family.iter().enumerate() {
        if c.k != family[0].k + i {
            return Err(ConstructError::InvalidInput(
                "levels must be consecutive".into(),
            ));
        }
    }
    let mut inclusion_ok = true;
    let mut strictly_shrinking = true;
    let mut worst_ln_slack = f64::INFINITY;
    for w in family.windows(2) {
        let (a, b) = (&w[0].dims, &w[1].dims);
        inclusion_ok &= b.ln_len <= a.ln_ell && b.ln_ell <= a.ln_ell;
        strictly_shrinking &= b.ln_len < a.ln_len && b.ln_ell < a.ln_ell;
        worst_ln_slack = worst_ln_slack
            .min(a.ln_ell - b.ln_len)
            .min(a.ln_ell - b.ln_ell);
    }
    let mut diameter_ok = true;
    for c in family {
        if c.k >= 2 {
            // diam² = L² + ℓ²; ln diam = ln L + ½·ln(1 + (ℓ/L)²).
            let ln_diam = c.dims.ln_len + 0.5 * (-2.0 * c.dims.ln_shape).exp().ln_1p();
            diameter_ok &= ln_diam <= -((c.k - 1) as f64).ln() + 1e-12;
        }
    }
    Ok(NestingReport {
        levels: family.len(),
        inclusion_ok,
        diameter_ok,
        strictly_shrinking,
        worst_ln_slack,
    })
}

/// Depth weights φ(1), φ(2), … in log form; φ(m) = 0 encodes as −∞.
/// A level-k check consumes the first k+1 entries.
#[derive(Debug, Clone, Serialize)]
pub struct PhiSpec {
    pub name: String,
    pub ln_values: Vec<f64>,
    /// Whether a failed bound should fail the whole report.
    pub gating: bool,
}

/// φ(m) = m. Depth-one mass is uncontrolled for any weight with φ(1) > 0:
/// one rectangle alone contributes |Q| at depth one while the bound scales
/// it by ½·ζ^(t(j0+2k)−t(j0)). Recorded, never gating.
pub fn phi_identity(max_m: usize) -> PhiSpec {
    PhiSpec {
        name: "identity".into(),
        ln_values: (1..=max_m).map(|m| (m as f64).ln()).collect(),
        gating: false,
    }
}

/// φ(m) = e^m − e, the exponential weight vanishing at depth one.
pub fn phi_shifted_exp(max_m: usize) -> PhiSpec {
    let ln_values = (1..=max_m)
        .map(|m| {
            if m == 1 {
                f64::NEG_INFINITY
            } else {
                m as f64 + (-(1.0 - m as f64).exp()).ln_1p()
            }
        })
        .collect();
    PhiSpec {
        name: "shifted-exp".into(),
        ln_values,
        gating: true,
    }
}

/// φ(m) = Ψ(m) where Ψ is the convex conjugate of `target`.
pub fn phi_from_conjugate(
    target: &OrliczFunction,
    max_m: usize,
) -> Result<PhiSpec, ConstructError> {
    let mut ln_values = Vec::with_capacity(max_m);
    for m in 1..=max_m {
        let v = target.conjugate_ln(m as f64)?;
        if v == f64::INFINITY {
            return Err(ConstructError::InvalidInput(format!(
                "conjugate weight is unbounded at depth {m}"
            )));
        }
        ln_values.push(v);
    }
    Ok(PhiSpec {
        name: "conjugate".into(),
        ln_values,
        gating: true,
    })
}

/// Default weight set: the identity (recorded) and the vanishing
/// exponential (gating).
pub fn standard_phi_specs(max_m: usize) -> Vec<PhiSpec> {
    vec![phi_identity(max_m), phi_shifted_exp(max_m)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Geometric,
    Analytic,
}

/// One weight's integral-bound audit over direction subsets:
/// ∫φ(χ_S) ≤ e·|Q|·Σ_j φ(j+1)·Σ_{r≥j} ζ^(t(j0+2k)−t(j0+i_r)).
#[derive(Debug, Clone, Serialize)]
pub struct PhiBoundCheck {
    pub name: String,
    pub gating: bool,
    pub subsets_checked: usize,
    /// Every nonempty subset was enumerated (k ≤ 12); otherwise all
    /// contiguous windows plus seeded random subsets.
    pub exhaustive: bool,
    pub pass: bool,
    /// Worst ln(lhs) − ln(rhs) over subsets; ≤ 0 is good.
    pub worst_ln_margin: f64,
    pub worst_subset: Vec<usize>,
    pub worst_ln_lhs: f64,
    pub worst_ln_rhs: f64,
}

/// Family-level verification: interval shape, sandwich bounds, far-half
/// disjointness and union mass, weighted-overlap integral bounds, and the
/// per-depth window bound.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructionReport {
    pub k: usize,
    pub route: Route,
    /// 0 < 2ℓ < L ≤ ε, in log form.
    pub interval_ok: bool,
    pub sandwich: f64,
    pub sandwich_ok: bool,
    /// Far halves are pairwise disjoint.
    pub half_disjoint: bool,
    /// Worst measured pairwise overlap relative to |Q| (geometric route).
    pub max_half_overlap_rel: Option<f64>,
    /// Worst ln margin of the pairwise gap criterion
    /// tan δ ≥ 2/√((L/ℓ)²−4); ≥ 0 certifies disjointness at any scale.
    pub worst_gap_ln_margin: f64,
    /// |⋃ half| / |Q|; (k+1)/2 when the halves are disjoint.
    pub half_union_ratio: f64,
    pub half_union_ok: bool,
    /// |⋃ R| / |Q| with its k/2 floor.
    pub full_union_ratio: f64,
    pub full_union_ok: bool,
    pub phi_bounds: Vec<PhiBoundCheck>,
    /// |{χ = j+1}| ≤ ℓ²·Σ_s 1/tan(α_s − α_{s+j}) for each depth j ≥ 1.
    pub depth_window_ok: bool,
    pub worst_depth_margin: f64,
    /// Every check except non-gating weight rows.
    pub pass: bool,
}

/// Direction-density verification: union mass against the disk, per-
/// rectangle quarter-disk density, equal areas, and the weighted-overlap
/// bounds under the density constant.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub k: usize,
    pub route: Route,
    /// |⋃ R| ≥ γ·k·ζ^(−t)·|B(0,ℓ)|, both sides divided by |Q|.
    pub union_ratio: f64,
    pub union_floor: f64,
    pub union_ok: bool,
    /// Worst ln(|R∩B|/|R|) − ln(γ′·ζ^t) over rectangles.
    pub worst_density_ln_margin: f64,
    pub density_ok: bool,
    /// Max relative error of |R∩B(0,ℓ)| against πℓ²/4 (geometric route).
    pub max_quarter_rel_err: Option<f64>,
    pub equal_areas_ok: bool,
    pub max_area_rel_err: Option<f64>,
    pub phi_bounds: Vec<PhiBoundCheck>,
    pub pass: bool,
}

fn check_capacity(k: usize) -> Result<(), ConstructError> {
    if k > CONSTRUCTION_K_CAP {
        return Err(ConstructError::Capacity {
            k,
            cap: CONSTRUCTION_K_CAP,
        });
    }
    Ok(())
}

/// Nonempty index subsets of {0..=k}: everything for k ≤ 12, otherwise all
/// contiguous windows plus 64 seeded random subsets.
pub(crate) fn enumerate_subsets(k: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let n = k + 1;
    if n <= 13 {
        let subsets = (1u32..(1 << n))
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        return (subsets, true);
    }
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        for b in a..n {
            subsets.push((a..=b).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let mut mask = rng.random::<u64>() & ((1u64 << n) - 1);
        if mask == 0 {
            mask = 1;
        }
        subsets.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
    }
    (subsets, false)
}

/// ln(|{χ = m}| / |Q|) for m = 1..=n, finite at any scale.
pub(crate) fn subset_ln_levelsets(fan: &FanFamily) -> Vec<f64> {
    (1..=fan.n())
        .map(|m| {
            if m == 1 {
                let r = fan.levelset_eq_ratio(1);
                if r > 0.0 {
                    r.ln()
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                let v = fan.levelset_eq(m);
                if v > 0.0 {
                    v.ln() - fan.ln_shape()
                } else {
                    f64::NEG_INFINITY
                }
            }
        })
        .collect()
}

fn phi_bound_checks(
    c: &Construction,
    fan: &FanFamily,
    phis: &[PhiSpec],
    seed: u64,
    e_const: f64,
) -> Result<Vec<PhiBoundCheck>, ConstructError> {
    for phi in phis {
        if phi.ln_values.len() < c.k + 1 {
            return Err(ConstructError::InvalidInput(format!(
                "weight '{}' has {} values, level {} needs {}",
                phi.name,
                phi.ln_values.len(),
                c.k,
                c.k + 1
            )));
        }
        if phi.ln_values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(ConstructError::InvalidInput(format!(
                "weight '{}' has non-finite values",
                phi.name
            )));
        }
    }
    let (subsets, exhaustive) = enumerate_subsets(c.k, seed);
    let mut out: Vec<PhiBoundCheck> = phis
        .iter()
        .map(|p| PhiBoundCheck {
            name: p.name.clone(),
            gating: p.gating,
            subsets_checked: subsets.len(),
            exhaustive,
            pass: true,
            worst_ln_margin: f64::NEG_INFINITY,
            worst_subset: Vec::new(),
            worst_ln_lhs: f64::NEG_INFINITY,
            worst_ln_rhs: f64::NEG_INFINITY,
        })
        .collect();
    let mut lhs_terms = Vec::new();
    let mut rhs_terms = Vec::new();
    for subset in &subsets {
        let sub = fan.subfamily(subset)?;
        let ln_eq = subset_ln_levelsets(&sub);
        // Suffix sums Σ_{r≥j} ζ^(t_{2k}−t_{i_r}), kept in log space: the
        // exponent gaps reach the thousands on exponential index maps.
        let mut ln_w = vec![0.0; subset.len()];
        let mut suffix = f64::NEG_INFINITY;
        for j in (0..subset.len()).rev() {
            let delta = c.ln_zeta_t2k - c.cert.ln_zeta_t(c.cert.j0 + subset[j]);
            suffix = if suffix == f64::NEG_INFINITY {
                delta
            } else {
                let m = delta.max(suffix);
                m + (delta.min(suffix) - m).exp().ln_1p()
            };
            ln_w[j] = suffix;
        }
        for (phi, check) in phis.iter().zip(out.iter_mut()) {
            lhs_terms.clear();
            rhs_terms.clear();
            for j in 0..subset.len() {
                let f = phi.ln_values[j];
                if f > f64::NEG_INFINITY {
                    if ln_eq[j] > f64::NEG_INFINITY {
                        lhs_terms.push(f + ln_eq[j]);
                    }
                    rhs_terms.push(f + ln_w[j]);
                }
            }
            let ln_lhs = logsumexp(&lhs_terms);
            let ln_rhs = e_const.ln() + logsumexp(&rhs_terms);
            // A vanished lhs passes whatever the rhs is; avoids −∞ − −∞.
            let margin = if ln_lhs == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                ln_lhs - ln_rhs
            };
            if margin > check.worst_ln_margin || check.worst_subset.is_empty() {
                check.worst_ln_margin = margin;
                check.worst_subset = subset.clone();
                check.worst_ln_lhs = ln_lhs;
                check.worst_ln_rhs = ln_rhs;
            }
        }
    }
    for check in &mut out {
        // −∞ margin means every lhs vanished; that is a pass.
        check.pass = !(check.worst_ln_margin > PHI_BOUND_LN_TOL);
    }
    Ok(out)
}

/// ln of the pairwise-gap threshold 2/√((L/ℓ)²−4).
fn gap_ln_threshold(ln_shape: f64) -> f64 {
    LN_2 - ln_shape - 0.5 * (-4.0 * (-2.0 * ln_shape).exp()).ln_1p()
}

pub fn verify_construction(
    c: &Construction,
    phis: &[PhiSpec],
    seed: u64,
) -> Result<ConstructionReport, ConstructError> {
    check_capacity(c.k)?;
    let consts = &c.consts;
    let dims = &c.dims;
    let fan = c.fan()?;

    let interval_ok = LN_2 + dims.ln_ell < dims.ln_len && dims.ln_len <= c.ln_epsilon;
    let sandwich_ok = dims.sandwich >= consts.c_c * (1.0 - SHAPE_REL_TOL)
        && dims.sandwich <= consts.d_c * (1.0 + SHAPE_REL_TOL);

    let ln_thresh = gap_ln_threshold(dims.ln_shape);
    let mut worst_gap_ln_margin = f64::INFINITY;
    for i in 0..fan.n() {
        for j in i + 1..fan.n() {
            worst_gap_ln_margin = worst_gap_ln_margin.min(fan.tan_gap(i, j).ln() - ln_thresh);
        }
    }

    let route = if c.geometric_capable() {
        Route::Geometric
    } else {
        Route::Analytic
    };
    let n = c.k + 1;
    let (half_disjoint, max_half_overlap_rel, half_union_ratio) = match route {
        Route::Geometric => {
            let halves = c.half_rects().ok_or_else(|| {
                ConstructError::InvalidInput("geometric route without representable sides".into())
            })?;
            let polys: Vec<_> = halves.iter().map(|h| h.to_polygon()).collect();
            let q_area = c.area_ln().exp();
            let mut max_rel: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    max_rel = max_rel.max(intersection_area(&polys[i], &polys[j]) / q_area);
                }
            }
            // Disjointness is measured on polygons; the union mass uses the
            // exact side products (vertex rounding costs ~ε·(L/ℓ) in the
            // shoelace value, swamping the identity at thin shapes).
            let sum: f64 = halves.iter().map(|h| h.area()).sum();
            (max_rel <= REL_AREA_TOL, Some(max_rel), sum / q_area)
        }
        // The gap criterion proves disjointness, so the union mass is the
        // plain sum of the halves.
        Route::Analytic => (worst_gap_ln_margin >= 0.0, None, n as f64 / 2.0),
    };
    let half_expected = n as f64 / 2.0;
    let half_union_ok =
        half_disjoint && (half_union_ratio - half_expected).abs() <= HALF_UNION_REL_TOL * half_expected;

    let full_union_ratio = fan.union_ratio();
    let full_union_ok = full_union_ratio >= (c.k as f64 / 2.0) * (1.0 - REL_AREA_TOL)
        && full_union_ratio + HALF_UNION_REL_TOL * half_expected >= half_union_ratio;

    let phi_bounds = phi_bound_checks(c, &fan, phis, seed, consts.e_c)?;

    let mut worst_depth_margin = f64::NEG_INFINITY;
    for m in 2..=n {
        let lhs = fan.levelset_eq(m).max(0.0);
        let mut rhs = 0.0;
        for s in 0..=n - m {
            rhs += 1.0 / fan.tan_gap(s, s + m - 1);
        }
        worst_depth_margin = worst_depth_margin.max((lhs - rhs) / rhs.max(f64::MIN_POSITIVE));
    }
    let depth_window_ok = n == 1 || worst_depth_margin <= REL_AREA_TOL;

    let pass = interval_ok
        && sandwich_ok
        && half_disjoint
        && half_union_ok
        && full_union_ok
        && depth_window_ok
        && phi_bounds.iter().all(|p| p.pass || !p.gating);
    Ok(ConstructionReport {
        k: c.k,
        route,
        interval_ok,
        sandwich: dims.sandwich,
        sandwich_ok,
        half_disjoint,
        max_half_overlap_rel,
        worst_gap_ln_margin,
        half_union_ratio,
        half_union_ok,
        full_union_ratio,
        full_union_ok,
        phi_bounds,
        depth_window_ok,
        worst_depth_margin,
        pass,
    })
}

pub fn verify_direction_density(
    c: &Construction,
    phis: &[PhiSpec],
    seed: u64,
) -> Result<DensityReport, ConstructError> {
    check_capacity(c.k)?;
    let consts = &c.consts;
    let dims = &c.dims;
    let fan = c.fan()?;

    // |⋃R| ≥ γ·k·ζ^(−t)·πℓ² divided by |Q| is union_ratio ≥ γ·k·π/sandwich.
    let union_ratio = fan.union_ratio();
    let union_floor = consts.gamma * c.k as f64 * PI / dims.sandwich;
    let union_ok = union_ratio >= union_floor * (1.0 - REL_AREA_TOL);

    // Density bound per rectangle: the intersection with B(0,ℓ) is the
    // quarter disk πℓ²/4 whenever ℓ ≤ L, so |R∩B|/|R| = (π/4)/(L/ℓ) and
    // the γ′·ζ^t floor is exactly the sandwich ≤ d_c statement.
    let bound_ln = consts.gamma_prime.ln() + c.ln_zeta_t2k;
    let analytic_margin = (PI / 4.0).ln() - dims.ln_shape - bound_ln;

    let route = if c.geometric_capable() {
        Route::Geometric
    } else {
        Route::Analytic
    };
    let (worst_density_ln_margin, max_quarter_rel_err, equal_areas_ok, max_area_rel_err) =
        match route {
            Route::Geometric => {
                let rects = c.rects().ok_or_else(|| {
                    ConstructError::InvalidInput(
                        "geometric route without representable sides".into(),
                    )
                })?;
                let disk = c.direction_disk().ok_or_else(|| {
                    ConstructError::InvalidInput("direction disk not representable".into())
                })?;
                let q_area = c.area_ln().exp();
                let quarter = PI * c.ell() * c.ell() / 4.0;
                let mut worst_margin = f64::INFINITY;
                let mut max_quarter = 0.0f64;
                let mut max_area = 0.0f64;
                let mut products_equal = true;
                for r in &rects {
                    let poly = r.to_polygon();
                    let q = disk_polygon_area(&disk, &poly);
                    max_quarter = max_quarter.max((q - quarter).abs() / quarter);
                    max_area = max_area.max((poly.area() - r.area()).abs() / r.area());
                    products_equal &= (r.area() - q_area).abs() <= REL_AREA_TOL * q_area;
                    worst_margin = worst_margin.min((q / q_area).ln() - bound_ln);
                }
                // Shoelace noise grows like ε·(L/ℓ) on thin rectangles;
                // the equality itself is carried by the side products.
                let poly_noise = REL_AREA_TOL.max(8.0 * f64::EPSILON * dims.ln_shape.exp());
                (
                    worst_margin,
                    Some(max_quarter),
                    products_equal && max_area <= poly_noise,
                    Some(max_area),
                )
            }
            // All rectangles share one log-dimension pair by construction.
            Route::Analytic => (analytic_margin, None, true, None),
        };
    let density_ok = worst_density_ln_margin >= -QUARTER_DISK_REL_TOL
        && max_quarter_rel_err.map_or(true, |e| e <= QUARTER_DISK_REL_TOL);

    let phi_bounds = phi_bound_checks(c, &fan, phis, seed, consts.gamma_dprime)?;

    let pass = union_ok
        && density_ok
        && equal_areas_ok
        && phi_bounds.iter().all(|p| p.pass || !p.gating);
    Ok(DensityReport {
        k: c.k,
        route,
        union_ratio,
        union_floor,
        union_ok,
        worst_density_ln_margin,
        density_ok,
        max_quarter_rel_err,
        equal_areas_ok,
        max_area_rel_err,
        phi_bounds,
        pass,
    })
}
