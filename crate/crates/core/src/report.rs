//! Verification rows and deterministic emitters.
//!
//! Every command reduces its findings to a flat list of [`CheckRow`]s: one
//! inequality or flag per row, each citing an anchor from the fixed
//! [`Anchor`] registry. Rows go to CSV ('.'-decimal, stable column order),
//! run-level summaries to JSON. Nothing here reads the clock or the
//! environment, so identical inputs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Fixed registry of check families. Each row cites exactly one entry, so
/// downstream tooling can join rows across runs without parsing ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anchor {
    CertificateSeparation,
    CertificateTangentGap,
    IntervalShape,
    ScaleSandwich,
    HalfDisjointness,
    HalfUnionMass,
    FullUnionMass,
    OverlapWeightBound,
    DepthWindowBound,
    NestedShrinking,
    UnionFloor,
    DirectionDensity,
    QuarterDiskDensity,
    EqualAreas,
    MaximalFloor,
    SuperlevelFloor,
    DivergenceSeries,
    CoveringConstants,
    ExtensionRatio,
    WeakTypeTrend,
}

impl Anchor {
    pub const ALL: [Anchor; 20] = [
        Anchor::CertificateSeparation,
        Anchor::CertificateTangentGap,
        Anchor::IntervalShape,
        Anchor::ScaleSandwich,
        Anchor::HalfDisjointness,
        Anchor::HalfUnionMass,
        Anchor::FullUnionMass,
        Anchor::OverlapWeightBound,
        Anchor::DepthWindowBound,
        Anchor::NestedShrinking,
        Anchor::UnionFloor,
        Anchor::DirectionDensity,
        Anchor::QuarterDiskDensity,
        Anchor::EqualAreas,
        Anchor::MaximalFloor,
        Anchor::SuperlevelFloor,
        Anchor::DivergenceSeries,
        Anchor::CoveringConstants,
        Anchor::ExtensionRatio,
        Anchor::WeakTypeTrend,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Anchor::CertificateSeparation => "certificate-separation",
            Anchor::CertificateTangentGap => "certificate-tangent-gap",
            Anchor::IntervalShape => "interval-shape",
            Anchor::ScaleSandwich => "scale-sandwich",
            Anchor::HalfDisjointness => "half-disjointness",
            Anchor::HalfUnionMass => "half-union-mass",
            Anchor::FullUnionMass => "full-union-mass",
            Anchor::OverlapWeightBound => "overlap-weight-bound",
            Anchor::DepthWindowBound => "depth-window-bound",
            Anchor::NestedShrinking => "nested-shrinking",
            Anchor::UnionFloor => "union-floor",
            Anchor::DirectionDensity => "direction-density",
            Anchor::QuarterDiskDensity => "quarter-disk-density",
            Anchor::EqualAreas => "equal-areas",
            Anchor::MaximalFloor => "maximal-floor",
            Anchor::SuperlevelFloor => "superlevel-floor",
            Anchor::DivergenceSeries => "divergence-series",
            Anchor::CoveringConstants => "covering-constants",
            Anchor::ExtensionRatio => "extension-ratio",
            Anchor::WeakTypeTrend => "weak-type-trend",
        }
    }
}

impl Serialize for Anchor {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

/// How a row's numbers were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo { stderr: f64 },
}

impl Method {
    fn csv_cells(self) -> (&'static str, String) {
        match self {
            Method::Exact => ("exact", String::new()),
            Method::MonteCarlo { stderr } => ("monte-carlo", format!("{stderr}")),
        }
    }
}

/// One verified inequality: pass ⟺ margin ≥ −tolerance, so a NaN margin
/// always fails.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub anchor: Anchor,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Recorded-only rows never gate the run's exit code.
    pub gating: bool,
    pub method: Method,
    pub seed: u64,
}

impl CheckRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        anchor: Anchor,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
        gating: bool,
        method: Method,
        seed: u64,
    ) -> Self {
        CheckRow {
            id: id.into(),
            anchor,
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            gating,
            method,
            seed,
        }
    }

    /// Row for lhs ≥ rhs with margin = lhs − rhs.
    #[allow(clippy::too_many_arguments)]
    pub fn ge(
        id: impl Into<String>,
        anchor: Anchor,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        gating: bool,
        method: Method,
        seed: u64,
    ) -> Self {
        CheckRow::new(id, anchor, lhs, rhs, lhs - rhs, tolerance, gating, method, seed)
    }

    /// Row for an already-decided flag; margin is 0 or −1.
    pub fn flag(id: impl Into<String>, anchor: Anchor, ok: bool, gating: bool, seed: u64) -> Self {
        let lhs = if ok { 1.0 } else { 0.0 };
        CheckRow::new(id, anchor, lhs, 1.0, lhs - 1.0, 0.0, gating, Method::Exact, seed)
    }
}

/// Run-level verdict: pass ⟺ every gating row passed.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub regime: String,
    pub seed: u64,
    pub k_min: usize,
    pub k_max: usize,
    pub rows: usize,
    pub gating_rows: usize,
    pub failed_gating: Vec<String>,
    /// Non-gating rows that missed their margin; informational.
    pub failed_recorded: Vec<String>,
    pub pass: bool,
}

impl RunSummary {
    pub fn collect(
        command: impl Into<String>,
        regime: impl Into<String>,
        seed: u64,
        k_min: usize,
        k_max: usize,
        rows: &[CheckRow],
    ) -> Self {
        let mut failed_gating = Vec::new();
        let mut failed_recorded = Vec::new();
        let mut gating_rows = 0;
        for row in rows {
            if row.gating {
                gating_rows += 1;
                if !row.pass {
                    failed_gating.push(row.id.clone());
                }
            } else if !row.pass {
                failed_recorded.push(row.id.clone());
            }
        }
        RunSummary {
            command: command.into(),
            regime: regime.into(),
            seed,
            k_min,
            k_max,
            rows: rows.len(),
            gating_rows,
            pass: failed_gating.is_empty(),
            failed_gating,
            failed_recorded,
        }
    }
}

/// Shortest round-trip decimal, always '.'-separated.
fn cell(v: f64) -> String {
    format!("{v}")
}

pub fn write_rows_csv(path: &Path, rows: &[CheckRow]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "id",
        "anchor",
        "lhs",
        "rhs",
        "margin",
        "tolerance",
        "pass",
        "gating",
        "method",
        "stderr",
        "seed",
    ])?;
    for row in rows {
        let (method, stderr) = row.method.csv_cells();
        w.write_record([
            row.id.as_str(),
            row.anchor.label(),
            &cell(row.lhs),
            &cell(row.rhs),
            &cell(row.margin),
            &cell(row.tolerance),
            if row.pass { "true" } else { "false" },
            if row.gating { "true" } else { "false" },
            method,
            &stderr,
            &row.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json(path: &Path, summary: &RunSummary) -> Result<(), ReportError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One superlevel-series sample; plain and log forms carry the same data,
/// but the plain columns flush to 0/∞ outside plain-f64 range.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupCsvRow {
    pub k: usize,
    pub superlevel_area: f64,
    pub ln_superlevel_area: f64,
    pub phi_integral: f64,
    pub ln_phi_integral: f64,
    pub ratio: f64,
    pub gamma1: f64,
    pub divergence: f64,
}

pub fn write_blowup_csv(path: &Path, rows: &[BlowupCsvRow]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "k",
        "superlevel_area",
        "ln_superlevel_area",
        "phi_integral",
        "ln_phi_integral",
        "ratio",
        "gamma1",
        "divergence",
    ])?;
    for row in rows {
        w.write_record([
            &row.k.to_string(),
            &cell(row.superlevel_area),
            &cell(row.ln_superlevel_area),
            &cell(row.phi_integral),
            &cell(row.ln_phi_integral),
            &cell(row.ratio),
            &cell(row.gamma1),
            &cell(row.divergence),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column series for plotting.
pub fn write_xy_csv(
    path: &Path,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([x_label, y_label])?;
    for (x, y) in points {
        w.write_record([&cell(*x), &cell(*y)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_labels_are_unique_and_kebab() {
        let mut seen = std::collections::HashSet::new();
        for a in Anchor::ALL {
            let label = a.label();
            assert!(seen.insert(label));
            assert!(label
                .chars()
                .all(|c| c.is_ascii_lowercase() || c == '-'));
        }
        assert_eq!(seen.len(), Anchor::ALL.len());
    }

    #[test]
    fn pass_follows_margin_and_tolerance() {
        let seed = 7;
        let ok = CheckRow::ge("a", Anchor::UnionFloor, 1.0, 0.9, 0.0, true, Method::Exact, seed);
        assert!(ok.pass && ok.margin > 0.0);
        let slack = CheckRow::ge("b", Anchor::UnionFloor, 0.9, 1.0, 0.2, true, Method::Exact, seed);
        assert!(slack.pass);
        let tight = CheckRow::ge("c", Anchor::UnionFloor, 0.9, 1.0, 0.0, true, Method::Exact, seed);
        assert!(!tight.pass);
        let nan = CheckRow::ge(
            "d",
            Anchor::UnionFloor,
            f64::NAN,
            1.0,
            1.0,
            true,
            Method::Exact,
            seed,
        );
        assert!(!nan.pass);
        assert!(CheckRow::flag("e", Anchor::EqualAreas, true, true, seed).pass);
        assert!(!CheckRow::flag("f", Anchor::EqualAreas, false, true, seed).pass);
    }

    #[test]
    fn summary_separates_gating_from_recorded() {
        let rows = vec![
            CheckRow::flag("g1", Anchor::HalfDisjointness, true, true, 1),
            CheckRow::flag("g2", Anchor::HalfUnionMass, false, true, 1),
            CheckRow::flag("r1", Anchor::CoveringConstants, false, false, 1),
        ];
        let s = RunSummary::collect("verify", "lacunary", 1, 1, 3, &rows);
        assert!(!s.pass);
        assert_eq!(s.gating_rows, 2);
        assert_eq!(s.failed_gating, vec!["g2"]);
        assert_eq!(s.failed_recorded, vec!["r1"]);
        let all_ok = RunSummary::collect("verify", "lacunary", 1, 1, 3, &rows[..1]);
        assert!(all_ok.pass && all_ok.failed_gating.is_empty());
    }

    #[test]
    fn csv_uses_dot_decimal_and_stable_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            CheckRow::ge(
                "sandwich k=3",
                Anchor::ScaleSandwich,
                2.5,
                0.5,
                1e-9,
                true,
                Method::Exact,
                42,
            ),
            CheckRow::ge(
                "union k=3",
                Anchor::UnionFloor,
                0.75,
                0.25,
                0.0,
                true,
                Method::MonteCarlo { stderr: 0.125 },
                42,
            ),
        ];
        write_rows_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "id,anchor,lhs,rhs,margin,tolerance,pass,gating,method,stderr,seed"
        );
        assert_eq!(
            lines.next().unwrap(),
            "sandwich k=3,scale-sandwich,2.5,0.5,2,0.000000001,true,true,exact,,42"
        );
        assert_eq!(
            lines.next().unwrap(),
            "union k=3,union-floor,0.75,0.25,0.5,0,true,true,monte-carlo,0.125,42"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn summary_json_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        let rows = [CheckRow::flag("ok", Anchor::NestedShrinking, true, true, 9)];
        let s = RunSummary::collect("verify", "power", 9, 0, 4, &rows);
        write_summary_json(&path, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "verify");
        assert_eq!(v["seed"], 9);
        assert_eq!(v["pass"], true);
        assert!(v.get("timestamp").is_none());
    }

    #[test]
    fn blowup_and_xy_series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let rows = vec![BlowupCsvRow {
            k: 2,
            superlevel_area: 0.5,
            ln_superlevel_area: -0.6931471805599453,
            phi_integral: 0.25,
            ln_phi_integral: -1.3862943611198906,
            ratio: 2.0,
            gamma1: 0.0224,
            divergence: 31.5,
        }];
        write_blowup_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("k,superlevel_area,ln_superlevel_area,"));
        assert!(text.contains("2,0.5,-0.6931471805599453,0.25,"));

        let xy = dir.path().join("plot.csv");
        write_xy_csv(&xy, "k", "ratio", &[(1.0, 2.0), (2.0, 2.5)]).unwrap();
        let text = std::fs::read_to_string(&xy).unwrap();
        assert_eq!(text, "k,ratio\n1,2\n2,2.5\n");
    }
}
