//! Randomized invariants: measure-kernel identities, angle-sequence
//! certificates, construction reports, convex-gauge inequalities and the
//! maximal-operator series, each quantified over generated inputs.

use proptest::prelude::*;
use proptest::test_runner::Config as ProptestConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbl_core::angles::{
    derive_certificate, generate, verify_certificate, AngleSequenceSpec, Regime,
};
use rbl_core::config::{BuiltinRegime, RunConfig};
use rbl_core::construct::{
    build_nested_family, verify_construction, verify_direction_density, verify_nesting,
};
use rbl_core::geom::clip::{chain_vs_extremes, intersection_area, CHAIN_IDENTITY_TOL};
use rbl_core::geom::mc::mc_measure;
use rbl_core::geom::measure::SubsetProfile;
use rbl_core::geom::{ConvexPolygon, Point, RotatedRect};
use rbl_core::maximal::{blowup_series, divergence_series, maximal_lower_ln, probe_ln_value};
use rbl_core::orlicz::OrliczFunction;
use rbl_core::report::{Anchor, CheckRow, Method};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

prop_compose! {
    fn rect()(len in 0.2f64..30.0, frac in 0.02f64..0.45, theta in 0.0f64..FRAC_PI_2)
        -> RotatedRect
    {
        RotatedRect::new(len, len * frac, theta).unwrap()
    }
}

prop_compose! {
    fn lacunary_regime()(lambda in 0.08f64..0.55, gap in 0.05f64..0.35, f in 0.5f64..1.0)
        -> Regime
    {
        let mu = (lambda + gap).min(0.95);
        Regime::Lacunary { lambda, mu, m0: lambda * f, ratios: None }
    }
}

prop_compose! {
    fn superlacunary_regime()(
        d in 2u32..=3,
        lambda in 0.5f64..0.85,
        gap in 0.03f64..0.1,
        f in 0.5f64..1.0,
    ) -> Regime {
        let mu = (lambda + gap).min(0.95);
        Regime::Superlacunary { d, lambda, mu, m0: lambda * f, ratios: None }
    }
}

prop_compose! {
    fn power_regime()(d in 0.25f64..0.75, a in 0.01f64..0.08, stretch in 1.0f64..1.5)
        -> Regime
    {
        Regime::Power { d, a, b: (a * stretch).min(0.11), coeffs: None }
    }
}

fn gauge_catalog() -> Vec<OrliczFunction> {
    vec![
        OrliczFunction::phi_beta(1.0).unwrap(),
        OrliczFunction::phi_beta(2.0).unwrap(),
        OrliczFunction::loglog(),
        OrliczFunction::power(2.0, 0.5).unwrap(),
        OrliczFunction::power(1.5, 1.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(cfg(192))]

    #[test]
    fn rotated_rect_area_is_rotation_invariant(r in rect()) {
        let poly_area = r.to_polygon().area();
        let exact = r.len * r.ell;
        prop_assert!(
            (poly_area - exact).abs() <= 1e-12 * exact,
            "area {poly_area} vs {exact}"
        );
    }

    #[test]
    fn intersection_is_monotone_and_union_dominates(a in rect(), b in rect()) {
        let (pa, pb) = (a.to_polygon(), b.to_polygon());
        let inter = intersection_area(&pa, &pb);
        let cap = pa.area().min(pb.area());
        prop_assert!(inter <= cap * (1.0 + 1e-12) + 1e-15);
        let profile = SubsetProfile::compute(&[pa.clone(), pb.clone()]).unwrap();
        let union = profile.union_area();
        prop_assert!(union >= pa.area().max(pb.area()) * (1.0 - 1e-12));
    }

    #[test]
    fn chain_intersection_matches_extremes(
        len in 2.0f64..40.0,
        frac in 0.01f64..0.4,
        mut angles in proptest::collection::vec(0.0f64..FRAC_PI_4, 3..6),
    ) {
        angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assume!(angles.windows(2).all(|w| w[1] - w[0] > 1e-4));
        let rects: Vec<RotatedRect> = angles
            .iter()
            .map(|&t| RotatedRect::new(len, len * frac, t).unwrap())
            .collect();
        let (full, extremes) = chain_vs_extremes(&rects).unwrap();
        prop_assert!(
            (full - extremes).abs() <= CHAIN_IDENTITY_TOL * extremes.max(f64::MIN_POSITIVE),
            "chain {full} vs extremes {extremes}"
        );
    }

    #[test]
    fn depth_mass_partitions_total_area(
        rects in proptest::collection::vec(rect(), 2..5),
    ) {
        let polys: Vec<ConvexPolygon> = rects.iter().map(RotatedRect::to_polygon).collect();
        let profile = SubsetProfile::compute(&polys).unwrap();
        let total: f64 = rects.iter().map(RotatedRect::area).sum();
        prop_assert!(
            (profile.depth_mass() - total).abs() <= 1e-10 * total,
            "depth mass {} vs Σ areas {total}",
            profile.depth_mass()
        );
    }
}

proptest! {
    #![proptest_config(cfg(6))]

    // 4σ rather than 3σ: this sweep reseeds every run, so it leaves headroom
    // beyond the fixed-seed 3σ agreement checks.
    #[test]
    fn exact_union_matches_rejection_sampling(
        rects in proptest::collection::vec(rect(), 2..4),
        seed in any::<u64>(),
    ) {
        let polys: Vec<ConvexPolygon> = rects.iter().map(RotatedRect::to_polygon).collect();
        let exact = SubsetProfile::compute(&polys).unwrap().union_area();
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &polys {
            let (a, b) = p.bbox();
            lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        let est = mc_measure(
            |p| polys.iter().any(|poly| poly.contains(p)),
            (lo, hi),
            1_000_000,
            seed,
        )
        .unwrap();
        prop_assert!(
            (est.value - exact).abs() <= 4.0 * est.stderr + 1e-9,
            "mc {} ± {} vs exact {exact}",
            est.value,
            est.stderr
        );
    }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn generated_sequences_decrease_within_range(
        regime in prop_oneof![lacunary_regime(), superlacunary_regime(), power_regime()],
    ) {
        let spec = AngleSequenceSpec::new(regime, 10).unwrap();
        let Ok(seq) = generate(&spec) else { return Ok(()) };
        prop_assert!(seq.thetas.iter().all(|&t| t > 0.0 && t <= FRAC_PI_4 + 1e-15));
        prop_assert!(seq.thetas.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(seq.ln_tangents.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn lacunary_certificate_holds_for_fifty_terms(regime in lacunary_regime()) {
        let spec = AngleSequenceSpec::new(regime, 50).unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        let report = verify_certificate(&seq, &cert, seq.thetas.len() - 1).unwrap();
        prop_assert!(report.separation_pass, "worst margin {}", report.worst_ln_margin);
        prop_assert!(report.tangent_gap_pass);
    }

    #[test]
    fn superlacunary_certificate_holds_while_representable(
        regime in superlacunary_regime(),
        count in 5usize..8,
    ) {
        let spec = AngleSequenceSpec::new(regime, count).unwrap();
        let Ok(seq) = generate(&spec) else { return Ok(()) };
        let cert = derive_certificate(&spec).unwrap();
        let report = verify_certificate(&seq, &cert, seq.thetas.len() - 1).unwrap();
        prop_assert!(report.separation_pass, "worst margin {}", report.worst_ln_margin);
        prop_assert!(report.tangent_gap_pass);
    }

    #[test]
    fn tangent_gap_cleares_half_the_tangent_difference(
        theta in 0.0f64..FRAC_PI_4,
        shrink in 0.05f64..0.95,
    ) {
        // tan(θ_j − θ_k) ≥ ½(m_j − m_k) whenever m_j ≤ 1.
        let m_j = theta.tan();
        let m_k = m_j * shrink;
        let gap = (theta - m_k.atan()).tan();
        prop_assert!(gap >= 0.5 * (m_j - m_k) * (1.0 - 1e-12));
    }

    #[test]
    fn power_tail_inequalities_hold_past_start_index(regime in power_regime()) {
        let (d, b) = match regime {
            Regime::Power { d, b, .. } => (d, b),
            _ => unreachable!(),
        };
        let spec = AngleSequenceSpec::new(regime, 12).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        for j in cert.j0.max(1)..cert.j0 + 40 {
            let jf = j as f64;
            let diff = jf.powf(d) - (jf - 1.0).powf(d);
            prop_assert!(
                diff >= d / (2.0 * jf.powf(1.0 - d)),
                "increment bound fails at j={j}"
            );
            let lhs_ln = (2.0 / d).ln() + (1.0 - d) * jf.ln();
            let rhs_ln = (0.5f64).ln() - jf.powf(d) * b.ln();
            prop_assert!(lhs_ln <= rhs_ln, "tail bound fails at j={j}");
        }
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn random_lacunary_constructions_verify(regime in lacunary_regime(), seed in any::<u64>()) {
        let spec = AngleSequenceSpec::new(regime, 12).unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        let fam = build_nested_family(&seq, &cert, 4).unwrap();
        for c in &fam {
            let r = verify_construction(c, &[], seed).unwrap();
            prop_assert!(r.pass, "k={}: {:?}", c.k, r);
            prop_assert!(r.worst_gap_ln_margin >= 0.0);
            let d = verify_direction_density(c, &[], seed).unwrap();
            prop_assert!(d.pass, "k={}: {:?}", c.k, d);
        }
        let nest = verify_nesting(&fam).unwrap();
        prop_assert!(nest.inclusion_ok && nest.diameter_ok && nest.strictly_shrinking);
        prop_assert!(nest.worst_ln_slack >= 0.0);
    }

    #[test]
    fn maximal_floor_reaches_one_on_random_families(
        regime in lacunary_regime(),
    ) {
        let spec = AngleSequenceSpec::new(regime, 12).unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        let fam = build_nested_family(&seq, &cert, 4).unwrap();
        for c in &fam {
            let floor_ln = maximal_lower_ln(c, probe_ln_value(c));
            prop_assert!(floor_ln >= -1e-9, "k={}: floor ln {floor_ln}", c.k);
        }
    }

    #[test]
    fn blowup_ratio_clears_certified_floor(regime in lacunary_regime()) {
        let spec = AngleSequenceSpec::new(regime, 12).unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        let fam = build_nested_family(&seq, &cert, 5).unwrap();
        let gauge = OrliczFunction::phi_beta(1.0).unwrap();
        for b in blowup_series(&fam, &gauge).unwrap() {
            prop_assert!(b.pass && b.ratio >= b.gamma1 * (1.0 - 1e-9),
                "k={}: ratio {} floor {}", b.k, b.ratio, b.gamma1);
        }
    }
}

proptest! {
    #![proptest_config(cfg(8))]

    #[test]
    fn divergence_series_grows_against_small_controls(regime in lacunary_regime()) {
        let spec = AngleSequenceSpec::new(regime, 16).unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        let fam = build_nested_family(&seq, &cert, 8).unwrap();
        let gauge = OrliczFunction::phi_beta(1.0).unwrap();
        let linear = OrliczFunction::power(1.0, 1.0).unwrap();
        let div = divergence_series(&fam, &gauge, &linear, 1.0).unwrap();
        prop_assert!(div.iter().all(|p| p.value.is_finite() && p.value > 0.0));
        // Increasing tail: the quotient diverges once the levels deepen.
        let tail = &div[div.len() - 3..];
        prop_assert!(tail.windows(2).all(|w| w[1].value > w[0].value));
        prop_assert!(div.last().unwrap().value > div.first().unwrap().value);
    }
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn pairing_inequality_on_wide_rectangle(
        which in 0usize..5,
        t in 0.0f64..100.0,
        s in 0.0f64..100.0,
    ) {
        let f = &gauge_catalog()[which];
        let phi = if t > 0.0 { f.eval_ln(t.ln()).exp() } else { 0.0 };
        let psi = f.conjugate_ln(s).unwrap().exp();
        prop_assert!(
            s * t <= phi + psi + 1e-6 * (1.0 + s * t),
            "st = {} vs Φ+Ψ = {}",
            s * t,
            phi + psi
        );
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn biconjugate_recovers_gauge_from_below(which in 0usize..5, t in 0.05f64..15.0) {
        let f = &gauge_catalog()[which];
        let phi = f.eval_ln(t.ln()).exp();
        // Two-stage grid supremum of s·t − Ψ(s).
        let sup = |lo: f64, hi: f64, steps: usize| {
            let mut best = (f64::NEG_INFINITY, lo);
            for i in 0..=steps {
                let s = lo + (hi - lo) * i as f64 / steps as f64;
                let v = s * t - f.conjugate_ln(s).unwrap().exp();
                if v > best.0 {
                    best = (v, s);
                }
            }
            best
        };
        let coarse = sup(0.0, 60.0, 6_000);
        let fine = sup((coarse.1 - 0.02).max(0.0), coarse.1 + 0.02, 4_000);
        let biconj = coarse.0.max(fine.0);
        prop_assert!(biconj <= phi * (1.0 + 1e-6) + 1e-6, "Φ** {biconj} above Φ {phi}");
        prop_assert!(
            biconj >= phi - 1e-3 * phi.max(1.0),
            "Φ** {biconj} does not recover Φ {phi}"
        );
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn gauges_are_monotone_convex_on_grids(which in 0usize..5, span in 5.0f64..40.0) {
        let f = &gauge_catalog()[which];
        let n = 64;
        let h = span / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let t = h * i as f64;
                if t > 0.0 { f.eval_ln(t.ln()).exp() } else { 0.0 }
            })
            .collect();
        prop_assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        for w in vals.windows(3) {
            prop_assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-10, "concave kink near {w:?}");
        }
    }

    #[test]
    fn smaller_beta_gauges_vanish_relatively(
        beta_lo in 0.5f64..2.0,
        bump in 0.3f64..1.5,
    ) {
        let lo = OrliczFunction::phi_beta(beta_lo).unwrap();
        let hi = OrliczFunction::phi_beta(beta_lo + bump).unwrap();
        // Ratio along a log grid up to 10¹²: strictly falling, final < half.
        let ratios: Vec<f64> = (2..=12)
            .map(|e| {
                let ln_t = (10.0f64).powi(e).ln();
                (lo.eval_ln(ln_t) - hi.eval_ln(ln_t)).exp()
            })
            .collect();
        prop_assert!(ratios.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(ratios.last().unwrap() < &(ratios[0] * 0.5));
    }
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn row_passes_iff_margin_clears_tolerance(
        lhs in -1.0e6f64..1.0e6,
        rhs in -1.0e6f64..1.0e6,
        tol in 0.0f64..10.0,
    ) {
        let row = CheckRow::ge("r", Anchor::MaximalFloor, lhs, rhs, tol, true, Method::Exact, 1);
        prop_assert_eq!(row.pass, lhs - rhs >= -tol);
    }
}

/// Builtin families keep the probe's maximal floor at one across k = 1..10.
#[test]
fn builtin_maximal_floor_across_regimes() {
    for regime in [
        BuiltinRegime::Lacunary,
        BuiltinRegime::Superlacunary,
        BuiltinRegime::Power,
    ] {
        let cfg = RunConfig::builtin(regime);
        let spec = cfg.angle_spec().unwrap();
        let seq = generate(&spec).unwrap();
        let cert = derive_certificate(&spec).unwrap();
        for c in &build_nested_family(&seq, &cert, 10).unwrap() {
            let floor_ln = maximal_lower_ln(c, probe_ln_value(c));
            assert!(floor_ln >= -1e-9, "k={}: floor ln {floor_ln}", c.k);
        }
    }
}

/// Margins that fail to evaluate must never count as passing.
#[test]
fn undefined_margins_fail_closed() {
    let row = CheckRow::new(
        "nan",
        Anchor::MaximalFloor,
        f64::NAN,
        1.0,
        f64::NAN,
        1.0,
        true,
        Method::Exact,
        7,
    );
    assert!(!row.pass);
}

/// Half-rect disjointness quantified over certified random pairs, checked
/// through a fresh sampler rather than the clipping kernel: no sampled
/// point may land in two far halves at once.
#[test]
fn certified_half_rects_share_no_sampled_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..64 {
        let ell = 0.1 + rng.random::<f64>();
        let shape = 2.01 + 40.0 * rng.random::<f64>();
        let len = shape * ell;
        let delta_min = (1.0 / (0.25 * shape * shape - 1.0).sqrt()).atan();
        let lo = rng.random::<f64>() * (FRAC_PI_2 - delta_min) * 0.99;
        let hi = lo + delta_min + (FRAC_PI_2 - lo - delta_min) * 0.99 * rng.random::<f64>();
        let halves = [
            RotatedRect::new(len, ell, lo).unwrap(),
            RotatedRect::new(len, ell, hi).unwrap(),
        ];
        let polys: Vec<ConvexPolygon> = halves
            .iter()
            .map(|r| r.span_polygon(r.len / 2.0, r.len))
            .collect();
        for _ in 0..2_000 {
            let pick = usize::from(rng.random::<f64>() < 0.5);
            let r = &halves[pick];
            let (sin, cos) = r.theta.sin_cos();
            let u = r.len / 2.0 + r.len / 2.0 * rng.random::<f64>();
            let v = r.ell * rng.random::<f64>();
            let p = Point::new(u * cos - v * sin, u * sin + v * cos);
            let depth = polys.iter().filter(|poly| poly.contains(p)).count();
            assert!(depth <= 1, "point {p:?} sits in both far halves");
        }
    }
}
