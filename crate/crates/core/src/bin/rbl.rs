//! Command-line driver: builds certified angle families, runs the
//! verification pipeline, and writes check rows, summaries, and series
//! under the output directory.
//!
//! Exit codes: 0 all gating checks pass, 1 a gating check failed,
//! 2 configuration error, 3 capacity exceeded. `RBL_THREADS` caps the
//! worker pool; outputs are byte-identical for identical config + seed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rbl_core::angles::{
    derive_certificate, generate, verify_certificate, AngleSequence, AngleSequenceSpec,
    CertificateReport, SeparationCertificate,
};
use rand::Rng;
use rbl_core::config::{BuiltinRegime, ConfigError, RunConfig};
use rbl_core::construct::{
    build_construction, build_nested_family, verify_construction, verify_direction_density,
    verify_nesting, Construction,
};
use rbl_core::geom::mc::mc_union_coverage;
use rbl_core::geom::{ConvexPolygon, Point, RotatedRect};
use rbl_core::maximal::{
    blowup_series, divergence_series, kakeya_ratio, maximal_lower_ln, probe_ln_value,
    stokolos_check, weak11_probe_on_grid, PlacedRect,
};
use rbl_core::report::{
    write_blowup_csv, write_rows_csv, write_summary_json, write_xy_csv, Anchor, BlowupCsvRow,
    CheckRow, Method, RunSummary,
};
use rbl_core::tolerances::{
    MAXIMAL_LOWER_TOL, PHI_BOUND_LN_TOL, POLY_ASPECT_CAP, QUARTER_DISK_REL_TOL, REL_AREA_TOL,
};

#[derive(Parser)]
#[command(name = "rbl", version, about = "Rotated-rectangle maximal-operator verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run config; omitting it selects the built-in regime defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default: config `out`, else ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Monte-Carlo sample count for cross-checks.
    #[arg(long, global = true, value_name = "N")]
    samples: Option<u64>,
    /// Replaces the config's top level.
    #[arg(long, global = true, value_name = "N")]
    kmax: Option<usize>,
    /// Built-in parameter set; conflicts with --config.
    #[arg(long, global = true, value_enum, conflicts_with = "config")]
    regime: Option<RegimeArg>,
    /// Also write plottable (x, y) series.
    #[arg(long, global = true)]
    plot_data: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the angle sequence and its separation certificate.
    GenAngles,
    /// Run the full verification pipeline over the configured levels.
    Verify,
    /// Superlevel-mass series against the certified floor.
    Blowup,
    /// Covering-constant scan across levels.
    Stokolos,
    /// Extension-ratio scan across levels.
    Kakeya,
    /// Empirical weak-type probe on a raster grid.
    ProbeWeak11,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Lacunary,
    Superlacunary,
    Power,
}

impl From<RegimeArg> for BuiltinRegime {
    fn from(arg: RegimeArg) -> Self {
        match arg {
            RegimeArg::Lacunary => BuiltinRegime::Lacunary,
            RegimeArg::Superlacunary => BuiltinRegime::Superlacunary,
            RegimeArg::Power => BuiltinRegime::Power,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Capacity { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<rbl_core::angles::AngleError> for CliError {
    fn from(e: rbl_core::angles::AngleError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<rbl_core::construct::ConstructError> for CliError {
    fn from(e: rbl_core::construct::ConstructError) -> Self {
        let code = match e {
            rbl_core::construct::ConstructError::Capacity { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<rbl_core::maximal::MaximalError> for CliError {
    fn from(e: rbl_core::maximal::MaximalError) -> Self {
        let code = match e {
            rbl_core::maximal::MaximalError::Capacity { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<rbl_core::geom::GeomError> for CliError {
    fn from(e: rbl_core::geom::GeomError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<rbl_core::report::ReportError> for CliError {
    fn from(e: rbl_core::report::ReportError) -> Self {
        CliError::config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("rbl: {}", e.message);
        return ExitCode::from(e.code);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rbl: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    match std::env::var("RBL_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| CliError::config(format!("RBL_THREADS must be a positive integer, got `{v}`")))?;
            if n == 0 {
                return Err(CliError::config("RBL_THREADS must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::config(format!("RBL_THREADS: {e}"))),
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match (&cli.config, cli.regime) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(regime)) => RunConfig::builtin(regime.into()),
        (None, None) => RunConfig::builtin(BuiltinRegime::Lacunary),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    if let Some(kmax) = cli.kmax {
        config.k_max = kmax;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = resolve_config(cli)?;
    let out = config.out_dir(cli.out.as_deref());
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::config(format!("create {}: {e}", out.display())))?;
    match cli.command {
        Command::GenAngles => cmd_gen_angles(&config, &out),
        Command::Verify => cmd_verify(&config, &out),
        Command::Blowup => cmd_blowup(&config, &out, cli.plot_data),
        Command::Stokolos => cmd_stokolos(&config, &out),
        Command::Kakeya => cmd_kakeya(&config, &out),
        Command::ProbeWeak11 => cmd_probe_weak11(&config, &out),
    }
}

/// Generated sequence, certificate, and levels shared by the commands.
struct Prepared {
    seq: AngleSequence,
    cert: SeparationCertificate,
    constructions: Vec<Construction>,
}

fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let spec = config.angle_spec()?;
    let seq = generate(&spec)?;
    let cert = derive_certificate(&spec)?;
    let mut constructions = Vec::new();
    if config.k_min <= config.k_max {
        let family = if config.k_max >= 2 {
            build_nested_family(&seq, &cert, config.k_max)?
        } else {
            vec![build_construction(&seq, &cert, config.k_max, 1.0)?]
        };
        constructions = family
            .into_iter()
            .filter(|c| c.k >= config.k_min)
            .collect();
    }
    Ok(Prepared {
        seq,
        cert,
        constructions,
    })
}

fn certificate_rows(
    seq: &AngleSequence,
    cert: &SeparationCertificate,
    tolerance_factor: f64,
    seed: u64,
) -> Result<(CertificateReport, Vec<CheckRow>), CliError> {
    let report = verify_certificate(seq, cert, seq.len() - 1)?;
    let tol = tolerance_factor * PHI_BOUND_LN_TOL;
    let rows = vec![
        CheckRow::ge(
            "separation",
            Anchor::CertificateSeparation,
            report.worst_ln_margin,
            0.0,
            tol,
            true,
            Method::Exact,
            seed,
        ),
        CheckRow::ge(
            "tangent-gap",
            Anchor::CertificateTangentGap,
            report.worst_tangent_ln_margin,
            0.0,
            tol,
            true,
            Method::Exact,
            seed,
        ),
    ];
    Ok((report, rows))
}

fn write_outputs(
    out: &Path,
    command: &str,
    config: &RunConfig,
    rows: &[CheckRow],
) -> Result<RunSummary, CliError> {
    write_rows_csv(&out.join("checks.csv"), rows)?;
    let summary = RunSummary::collect(
        command,
        config.regime_name(),
        config.seed,
        config.k_min,
        config.k_max,
        rows,
    );
    write_summary_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Serialize)]
struct AnglesFile<'a> {
    spec: AngleSequenceSpec,
    seed: u64,
    j0: usize,
    thetas: &'a [f64],
    tangents: &'a [f64],
    ln_tangents: &'a [f64],
    certificate: &'a SeparationCertificate,
    report: &'a CertificateReport,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("serialize: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::config(format!("write {}: {e}", path.display())))
}

fn cmd_gen_angles(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let spec = config.angle_spec()?;
    let seq = generate(&spec)?;
    let cert = derive_certificate(&spec)?;
    let (report, rows) = certificate_rows(&seq, &cert, config.tolerance_factor, config.seed)?;
    let file = AnglesFile {
        spec,
        seed: config.seed,
        j0: seq.j0,
        thetas: &seq.thetas,
        tangents: &seq.tangents,
        ln_tangents: &seq.ln_tangents,
        certificate: &cert,
        report: &report,
    };
    write_json(&out.join("angles.json"), &file)?;
    let summary = write_outputs(out, "gen-angles", config, &rows)?;
    Ok(summary.pass)
}

fn cmd_verify(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let prepared = prepare(config)?;
    let tf = config.tolerance_factor;
    let seed = config.seed;
    let gauge = config.gauge()?;
    let weights = config.weights(config.k_max + 1)?;

    let (_, mut rows) = certificate_rows(&prepared.seq, &prepared.cert, tf, seed)?;

    for c in &prepared.constructions {
        let k = c.k;
        let report = verify_construction(c, &weights, seed)?;
        rows.push(CheckRow::flag(
            format!("interval-shape k={k}"),
            Anchor::IntervalShape,
            report.interval_ok,
            true,
            seed,
        ));
        let sandwich_margin = (report.sandwich - c.consts.c_c).min(c.consts.d_c - report.sandwich);
        rows.push(CheckRow::new(
            format!("sandwich k={k}"),
            Anchor::ScaleSandwich,
            report.sandwich,
            c.consts.c_c,
            sandwich_margin,
            tf * MAXIMAL_LOWER_TOL * c.consts.c_c,
            true,
            Method::Exact,
            seed,
        ));
        rows.push(CheckRow::ge(
            format!("half-gap k={k}"),
            Anchor::HalfDisjointness,
            report.worst_gap_ln_margin,
            0.0,
            tf * PHI_BOUND_LN_TOL,
            true,
            Method::Exact,
            seed,
        ));
        rows.push(CheckRow::flag(
            format!("half-disjoint k={k}"),
            Anchor::HalfDisjointness,
            report.half_disjoint,
            true,
            seed,
        ));
        rows.push(CheckRow::ge(
            format!("half-union k={k}"),
            Anchor::HalfUnionMass,
            report.half_union_ratio,
            (k as f64 + 1.0) / 2.0,
            tf * REL_AREA_TOL * (k as f64 + 1.0),
            true,
            Method::Exact,
            seed,
        ));
        rows.push(CheckRow::ge(
            format!("full-union k={k}"),
            Anchor::FullUnionMass,
            report.full_union_ratio,
            k as f64 / 2.0,
            tf * REL_AREA_TOL * (k as f64 + 1.0),
            true,
            Method::Exact,
            seed,
        ));
        // Relative window excess; ≤ 0 is good, so the row margin negates.
        rows.push(CheckRow::new(
            format!("depth-window k={k}"),
            Anchor::DepthWindowBound,
            report.worst_depth_margin,
            0.0,
            -report.worst_depth_margin,
            tf * REL_AREA_TOL,
            true,
            Method::Exact,
            seed,
        ));
        for phi in &report.phi_bounds {
            rows.push(CheckRow::new(
                format!("overlap k={k} w={}", phi.name),
                Anchor::OverlapWeightBound,
                phi.worst_ln_lhs,
                phi.worst_ln_rhs,
                -phi.worst_ln_margin,
                tf * PHI_BOUND_LN_TOL,
                phi.gating,
                Method::Exact,
                seed,
            ));
        }

        let density = verify_direction_density(c, &weights, seed)?;
        rows.push(CheckRow::ge(
            format!("union-floor k={k}"),
            Anchor::UnionFloor,
            density.union_ratio,
            density.union_floor,
            tf * REL_AREA_TOL * density.union_floor.max(1.0),
            true,
            Method::Exact,
            seed,
        ));
        rows.push(CheckRow::ge(
            format!("density k={k}"),
            Anchor::DirectionDensity,
            density.worst_density_ln_margin,
            0.0,
            tf * PHI_BOUND_LN_TOL,
            true,
            Method::Exact,
            seed,
        ));
        if let Some(err) = density.max_quarter_rel_err {
            rows.push(CheckRow::new(
                format!("quarter-disk k={k}"),
                Anchor::QuarterDiskDensity,
                err,
                0.0,
                -err,
                tf * QUARTER_DISK_REL_TOL,
                true,
                Method::Exact,
                seed,
            ));
        }
        rows.push(CheckRow::flag(
            format!("equal-areas k={k}"),
            Anchor::EqualAreas,
            density.equal_areas_ok,
            true,
            seed,
        ));
        for phi in &density.phi_bounds {
            rows.push(CheckRow::new(
                format!("density-overlap k={k} w={}", phi.name),
                Anchor::OverlapWeightBound,
                phi.worst_ln_lhs,
                phi.worst_ln_rhs,
                -phi.worst_ln_margin,
                tf * PHI_BOUND_LN_TOL,
                phi.gating,
                Method::Exact,
                seed,
            ));
        }

        // Monte-Carlo cross-check of the exact union on plain-geometry
        // levels, in unit-length coordinates so thin shapes stay
        // well-conditioned; 4σ plus the exact-method dust.
        if c.geometric_capable() {
            if let Some(row) = union_mc_row(c, config.samples, tf, seed)? {
                rows.push(row);
            }
        }

        rows.push(CheckRow::ge(
            format!("maximal-floor k={k}"),
            Anchor::MaximalFloor,
            maximal_lower_ln(c, probe_ln_value(c)),
            0.0,
            tf * MAXIMAL_LOWER_TOL,
            true,
            Method::Exact,
            seed,
        ));
    }

    if prepared.constructions.len() > 1 {
        let nesting = verify_nesting(&prepared.constructions)?;
        rows.push(CheckRow::flag(
            "nesting inclusion",
            Anchor::NestedShrinking,
            nesting.inclusion_ok,
            true,
            seed,
        ));
        rows.push(CheckRow::flag(
            "nesting diameter",
            Anchor::NestedShrinking,
            nesting.diameter_ok,
            true,
            seed,
        ));
        rows.push(CheckRow::ge(
            "nesting slack",
            Anchor::NestedShrinking,
            nesting.worst_ln_slack,
            0.0,
            tf * PHI_BOUND_LN_TOL,
            true,
            Method::Exact,
            seed,
        ));
    }

    if !prepared.constructions.is_empty() {
        for psi in weights.iter().filter(|w| w.gating) {
            let report = stokolos_check(&prepared.constructions, psi, &gauge, seed)?;
            rows.extend(stokolos_rows(&report, &psi.name, tf, seed));
        }
        for report in blowup_series(&prepared.constructions, &gauge)? {
            rows.push(CheckRow::ge(
                format!("superlevel-floor k={}", report.k),
                Anchor::SuperlevelFloor,
                report.ratio,
                report.gamma1,
                tf * MAXIMAL_LOWER_TOL * report.gamma1,
                true,
                Method::Exact,
                seed,
            ));
        }
    }

    let summary = write_outputs(out, "verify", config, &rows)?;
    Ok(summary.pass)
}

/// Coverage-sampling cross-check of the exact union mass, in unit-length
/// coordinates (the comparison is scale-free).
fn union_mc_row(
    c: &Construction,
    samples: u64,
    tf: f64,
    seed: u64,
) -> Result<Option<CheckRow>, CliError> {
    if c.dims.ln_shape > POLY_ASPECT_CAP.ln() {
        return Ok(None);
    }
    let Some(rects) = c.rects() else {
        return Ok(None);
    };
    let scale = c.len();
    let normalized: Vec<RotatedRect> = rects
        .iter()
        .map(|r| RotatedRect::new(r.len / scale, r.ell / scale, r.theta))
        .collect::<Result<_, _>>()?;
    let polys: Vec<ConvexPolygon> = normalized.iter().map(RotatedRect::to_polygon).collect();
    // Closed-form reference: |⋃R|/L² = union_ratio·ℓ/L.
    let exact = c.union_ratio()? * (c.dims.ln_ell - c.dims.ln_len).exp();
    let total_area: f64 = normalized.iter().map(|r| r.len * r.ell).sum();
    let mc_seed = seed.wrapping_add(c.k as u64);
    let est = mc_union_coverage(
        polys.len(),
        total_area,
        |idx, rng| {
            let r = &normalized[idx];
            let (sin, cos) = r.theta.sin_cos();
            let u = r.len * rng.random::<f64>();
            let v = r.ell * rng.random::<f64>();
            Point::new(u * cos - v * sin, u * sin + v * cos)
        },
        |p| polys.iter().filter(|poly| poly.contains(p)).count() as u32,
        samples,
        mc_seed,
    )?;
    // Overlap mass thinner than ~1/samples leaves the sample variance at
    // zero; the Poisson zero-count allowance ln(10⁴)·total/n keeps the
    // comparison honest there.
    let resolution = 9.21 * total_area / samples as f64;
    Ok(Some(CheckRow::new(
        format!("union-mc k={}", c.k),
        Anchor::FullUnionMass,
        est.value,
        exact,
        4.0 * est.stderr + resolution - (est.value - exact).abs(),
        tf * REL_AREA_TOL * exact,
        true,
        Method::MonteCarlo { stderr: est.stderr },
        mc_seed,
    )))
}

fn stokolos_rows(
    report: &rbl_core::maximal::StokolosReport,
    w: &str,
    tf: f64,
    seed: u64,
) -> Vec<CheckRow> {
    let mut rows = vec![
        CheckRow::flag(
            format!("covering equal-areas w={w}"),
            Anchor::EqualAreas,
            report.equal_areas_ok,
            true,
            seed,
        ),
        CheckRow::flag(
            format!("covering scale-order w={w}"),
            Anchor::CoveringConstants,
            report.lambda_increasing,
            true,
            seed,
        ),
        CheckRow::flag(
            format!("covering c2-band w={w}"),
            Anchor::CoveringConstants,
            report.c2_band_ok,
            true,
            seed,
        ),
        CheckRow::flag(
            format!("covering c3-band w={w}"),
            Anchor::CoveringConstants,
            report.c3_band_ok,
            true,
            seed,
        ),
        // The depth-weight constant decays with the level by design, so
        // its band is recorded without gating.
        CheckRow::flag(
            format!("covering c1-band w={w}"),
            Anchor::CoveringConstants,
            report.c1_band_ok,
            false,
            seed,
        ),
    ];
    for (name, value) in [
        ("c1", report.c1),
        ("c2", report.c2),
        ("c3", report.c3),
    ] {
        rows.push(CheckRow::new(
            format!("covering {name} w={w}"),
            Anchor::CoveringConstants,
            value,
            0.0,
            value,
            tf * REL_AREA_TOL,
            false,
            Method::Exact,
            seed,
        ));
    }
    rows
}

fn cmd_blowup(config: &RunConfig, out: &Path, plot: bool) -> Result<bool, CliError> {
    let prepared = prepare(config)?;
    let gauge = config.gauge()?;
    let controls = config.controls()?;
    let tf = config.tolerance_factor;
    let seed = config.seed;

    let reports = if prepared.constructions.is_empty() {
        Vec::new()
    } else {
        blowup_series(&prepared.constructions, &gauge)?
    };
    let mut divergences: Vec<(String, Vec<f64>)> = Vec::new();
    for (name, psi) in &controls {
        let series = if prepared.constructions.is_empty() {
            Vec::new()
        } else {
            divergence_series(&prepared.constructions, &gauge, psi, config.t_factor)?
        };
        divergences.push((name.clone(), series.into_iter().map(|p| p.value).collect()));
    }

    let mut csv_rows = Vec::with_capacity(reports.len());
    let mut rows = Vec::new();
    for (i, report) in reports.iter().enumerate() {
        csv_rows.push(BlowupCsvRow {
            k: report.k,
            superlevel_area: report.superlevel_area,
            ln_superlevel_area: report.ln_superlevel_area,
            phi_integral: report.phi_integral,
            ln_phi_integral: report.ln_phi_integral,
            ratio: report.ratio,
            gamma1: report.gamma1,
            divergence: divergences[0].1[i],
        });
        rows.push(CheckRow::ge(
            format!("superlevel-floor k={}", report.k),
            Anchor::SuperlevelFloor,
            report.ratio,
            report.gamma1,
            tf * MAXIMAL_LOWER_TOL * report.gamma1,
            true,
            Method::Exact,
            seed,
        ));
        for (name, series) in &divergences {
            rows.push(CheckRow::new(
                format!("divergence k={} psi={name}", report.k),
                Anchor::DivergenceSeries,
                series[i],
                0.0,
                series[i],
                0.0,
                false,
                Method::Exact,
                seed,
            ));
        }
    }
    write_blowup_csv(&out.join("blowup.csv"), &csv_rows)?;
    if plot {
        let points: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| (r.k as f64, r.ratio))
            .collect();
        write_xy_csv(&out.join("blowup_xy.csv"), "k", "ratio", &points)?;
    }
    let summary = write_outputs(out, "blowup", config, &rows)?;
    Ok(summary.pass)
}

#[derive(Serialize)]
struct StokolosFile {
    weight: String,
    report: rbl_core::maximal::StokolosReport,
}

fn cmd_stokolos(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let prepared = prepare(config)?;
    if prepared.constructions.is_empty() {
        let summary = write_outputs(out, "stokolos", config, &[])?;
        return Ok(summary.pass);
    }
    let gauge = config.gauge()?;
    let weights = config.weights(config.k_max + 1)?;
    let tf = config.tolerance_factor;
    let seed = config.seed;
    let mut rows = Vec::new();
    let mut files = Vec::new();
    for psi in weights.iter().filter(|w| w.gating) {
        let report = stokolos_check(&prepared.constructions, psi, &gauge, seed)?;
        rows.extend(stokolos_rows(&report, &psi.name, tf, seed));
        files.push(StokolosFile {
            weight: psi.name.clone(),
            report,
        });
    }
    write_json(&out.join("stokolos.json"), &files)?;
    let summary = write_outputs(out, "stokolos", config, &rows)?;
    Ok(summary.pass)
}

#[derive(Serialize)]
struct KakeyaLevel {
    k: usize,
    report: rbl_core::maximal::KakeyaReport,
}

fn cmd_kakeya(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let prepared = prepare(config)?;
    let tf = config.tolerance_factor;
    let seed = config.seed;
    let extension = config.extension;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for c in &prepared.constructions {
        let Some(rects) = c.rects() else {
            continue;
        };
        let aspect = c.len() / c.ell();
        let pieces: Vec<PlacedRect> = rects.into_iter().map(PlacedRect::at_origin).collect();
        let report = kakeya_ratio(&pieces, extension)?;
        // Clipped-polygon noise grows with the aspect ratio.
        let noise = MAXIMAL_LOWER_TOL + 8.0 * f64::EPSILON * aspect;
        rows.push(CheckRow::ge(
            format!("extension-ratio k={}", c.k),
            Anchor::ExtensionRatio,
            report.ratio,
            extension,
            tf * noise * extension,
            true,
            Method::Exact,
            seed,
        ));
        rows.push(CheckRow::ge(
            format!("extension-average k={}", c.k),
            Anchor::MaximalFloor,
            report.maximal_check,
            1.0 / extension,
            tf * noise,
            true,
            Method::Exact,
            seed,
        ));
        levels.push(KakeyaLevel { k: c.k, report });
    }
    write_json(&out.join("kakeya.json"), &levels)?;
    let summary = write_outputs(out, "kakeya", config, &rows)?;
    Ok(summary.pass)
}

fn cmd_probe_weak11(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let prepared = prepare(config)?;
    let family: Vec<Construction> = prepared
        .constructions
        .into_iter()
        .filter(Construction::representable)
        .collect();
    if family.is_empty() {
        return Err(CliError::config(
            "no level in the configured range has plain-float geometry",
        ));
    }
    let report = weak11_probe_on_grid(&family, config.trials, config.seed, config.grid)?;
    // Diagnostic only: the probe records its numbers without gating.
    let rows = vec![
        CheckRow::new(
            "weak-type max-constant",
            Anchor::WeakTypeTrend,
            report.max_constant,
            0.0,
            report.max_constant,
            0.0,
            false,
            Method::Exact,
            config.seed,
        ),
        CheckRow::flag(
            "weak-type bounded-trend",
            Anchor::WeakTypeTrend,
            !report.unbounded_trend,
            false,
            config.seed,
        ),
    ];
    write_json(&out.join("weak11.json"), &report)?;
    let summary = write_outputs(out, "probe-weak11", config, &rows)?;
    Ok(summary.pass)
}
