//! Central tolerance and capacity constants.
//!
//! Every tolerance used by a verification routine lives here so that checks
//! across modules stay consistent and tests can reference the same pinned
//! values.

/// Relative tolerance for exact-geometry equality assertions, scaled by the
/// largest input area involved.
pub const REL_AREA_TOL: f64 = 1e-12;

/// Relative tolerance for the chain-intersection identity (full chain vs
/// extreme pair).
pub const CHAIN_REL_TOL: f64 = 1e-12;

/// Relative tolerance on the shape-sandwich value.
pub const SHAPE_REL_TOL: f64 = 1e-12;

/// Relative tolerance for the depth partition identity
/// Σ m·|{χ=m}| = Σ area(Rᵢ).
pub const PARTITION_REL_TOL: f64 = 1e-10;

/// Relative tolerance for the quarter-disk intersection value πℓ²/4.
pub const QUARTER_DISK_REL_TOL: f64 = 1e-9;

/// Relative tolerance for the half-rectangle union value (k+1)|Q|/2.
pub const HALF_UNION_REL_TOL: f64 = 1e-9;

/// Clipped polygons whose area falls below this factor times the input scale
/// are normalized to the empty marker.
pub const EMPTY_AREA_FACTOR: f64 = 1e-14;

/// Guard against near-zero denominators in edge-line intersection.
pub const CLIP_DENOM_GUARD: f64 = 1e-30;

/// Capacity cap for subset-walk measures (2^n subsets).
pub const EXACT_UNION_CAP: usize = 24;

/// Construction verification capacity (k ≤ this for exact geometry paths).
pub const CONSTRUCTION_K_CAP: usize = 20;

/// Minimum sample count accepted by the Monte-Carlo oracle.
pub const MC_MIN_SAMPLES: u64 = 10_000;

/// Relative accuracy target of the numeric Legendre transform.
pub const CONJUGATE_REL_TOL: f64 = 1e-8;

/// Default search cap for the numeric Legendre transform.
pub const CONJUGATE_DOMAIN_CAP: f64 = 1e16;

/// Ternary-search iterations for the numeric Legendre transform.
pub const CONJUGATE_ITERS: u32 = 200;

/// Additive slack for Young's inequality property checks.
pub const YOUNG_TOL: f64 = 1e-6;

/// Ratio threshold for "Ψ = o(Φ) at infinity" grid tests.
pub const LITTLE_O_EPS: f64 = 1e-3;

/// Tail-ratio distance from 1 below which a sequence is declared
/// non-lacunary.
pub const LACUNARITY_TOL: f64 = 1e-3;

/// Tolerance for the maximal-operator lower bound on f_k (value ≥ 1).
pub const MAXIMAL_LOWER_TOL: f64 = 1e-9;

/// Largest shape ratio for which squared terms in the clipping and disk
/// kernels stay inside f64 range; beyond this the analytic log-space routes
/// take over.
pub const GEOM_SHAPE_CAP: f64 = 1e100;

/// Fan closed-form guard: pairwise gaps must satisfy sin δ ≥ (ℓ/L)·(1+this).
pub const FAN_GUARD_MARGIN: f64 = 1e-6;

/// Largest shape ratio at which explicit-vertex polygons remain faithful:
/// the thin side must span well over an ulp of the long side, or corner
/// rounding silently deforms the outline.
pub const POLY_ASPECT_CAP: f64 = 1e12;

/// Log-space slack accepted by the weighted-overlap integral bound:
/// pass iff ln(lhs) ≤ ln(rhs) + this.
pub const PHI_BOUND_LN_TOL: f64 = 1e-9;

/// |ln x| window for coordinates entering the clipping and disk kernels;
/// keeps every intermediate product of two coordinates inside f64 range.
pub const COORD_LN_CAP: f64 = 345.0;
