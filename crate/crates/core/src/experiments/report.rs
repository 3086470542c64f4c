use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentKind, ReportFormat};
use crate::error::{Error, Result};
use crate::theory::TheoryValues;

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

pub(crate) fn r12(x: f64) -> f64 {
    round_sig(x, 12)
}

/// Resolved configuration as echoed into every report. Output routing
/// (`out`, `format`) is deliberately absent so the report depends only on
/// what was simulated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub kind: ExperimentKind,
    pub d: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub p: f64,
    pub trials: u32,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_threshold: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_lo: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_hi: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub progeny_cap: Option<u64>,
}

/// One trial's measurements. Which fields are set depends on the kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_components: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dist_w: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceeds_bound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w1_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w1_components: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1_merged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub union_open_edges: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survived: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub progeny: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explored: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges_queried: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Int(v) => v as f64,
            Cell::Float(v) => v,
            Cell::Bool(b) => f64::from(u8::from(b)),
        }
    }

    fn render(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(b) => u8::from(b).to_string(),
        }
    }
}

/// CSV column order per experiment kind.
pub fn columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Supercritical => &[
            "trial",
            "l1",
            "l2",
            "n_components",
            "w_density",
            "gap_count",
            "max_dist_w",
        ],
        ExperimentKind::Subcritical => &["trial", "l1", "l2", "n_components", "exceeds_bound"],
        ExperimentKind::Sprinkling => &[
            "trial",
            "l1",
            "n_components",
            "w1_size",
            "w1_components",
            "g1_merged",
            "merge_ok",
            "union_open_edges",
        ],
        ExperimentKind::Gw => &["trial", "survived", "progeny", "generations"],
        ExperimentKind::Hitprob => &["trial", "hit", "explored", "edges_queried"],
    }
}

impl TrialRow {
    pub fn new(trial: u32) -> Self {
        TrialRow {
            trial,
            ..Default::default()
        }
    }

    pub fn get(&self, column: &str) -> Option<Cell> {
        use Cell::*;
        match column {
            "trial" => Some(Int(u64::from(self.trial))),
            "l1" => self.l1.map(Int),
            "l2" => self.l2.map(Int),
            "n_components" => self.n_components.map(Int),
            "w_density" => self.w_density.map(Float),
            "gap_count" => self.gap_count.map(Int),
            "max_dist_w" => self.max_dist_w.map(Int),
            "exceeds_bound" => self.exceeds_bound.map(Bool),
            "w1_size" => self.w1_size.map(Int),
            "w1_components" => self.w1_components.map(Int),
            "g1_merged" => self.g1_merged.map(Bool),
            "merge_ok" => self.merge_ok.map(Bool),
            "union_open_edges" => self.union_open_edges.map(Int),
            "survived" => self.survived.map(Bool),
            "progeny" => self.progeny.map(Int),
            "generations" => self.generations.map(Int),
            "hit" => self.hit.map(Bool),
            "explored" => self.explored.map(Int),
            "edges_queried" => self.edges_queried.map(Int),
            _ => None,
        }
    }

    fn set(&mut self, column: &str, raw: &str) -> std::result::Result<(), String> {
        fn int(raw: &str) -> std::result::Result<Option<u64>, String> {
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse().map(Some).map_err(|e| format!("`{raw}`: {e}"))
        }
        fn float(raw: &str) -> std::result::Result<Option<f64>, String> {
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse().map(Some).map_err(|e| format!("`{raw}`: {e}"))
        }
        fn flag(raw: &str) -> std::result::Result<Option<bool>, String> {
            match raw {
                "" => Ok(None),
                "0" => Ok(Some(false)),
                "1" => Ok(Some(true)),
                other => Err(format!("`{other}` is not 0 or 1")),
            }
        }
        match column {
            "trial" => {
                self.trial = raw.parse().map_err(|e| format!("`{raw}`: {e}"))?;
            }
            "l1" => self.l1 = int(raw)?,
            "l2" => self.l2 = int(raw)?,
            "n_components" => self.n_components = int(raw)?,
            "w_density" => self.w_density = float(raw)?,
            "gap_count" => self.gap_count = int(raw)?,
            "max_dist_w" => self.max_dist_w = int(raw)?,
            "exceeds_bound" => self.exceeds_bound = flag(raw)?,
            "w1_size" => self.w1_size = int(raw)?,
            "w1_components" => self.w1_components = int(raw)?,
            "g1_merged" => self.g1_merged = flag(raw)?,
            "merge_ok" => self.merge_ok = flag(raw)?,
            "union_open_edges" => self.union_open_edges = int(raw)?,
            "survived" => self.survived = flag(raw)?,
            "progeny" => self.progeny = int(raw)?,
            "generations" => self.generations = int(raw)?,
            "hit" => self.hit = flag(raw)?,
            "explored" => self.explored = int(raw)?,
            "edges_queried" => self.edges_queried = int(raw)?,
            other => return Err(format!("unknown column `{other}`")),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub count: u64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-column statistics over the rows, skipping unset cells.
pub fn aggregate_rows(kind: ExperimentKind, rows: &[TrialRow]) -> BTreeMap<String, Aggregate> {
    let mut out = BTreeMap::new();
    for &col in columns(kind).iter().filter(|&&c| c != "trial") {
        let values: Vec<f64> = rows.iter().filter_map(|r| r.get(col)).map(|c| c.as_f64()).collect();
        if values.is_empty() {
            continue;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        out.insert(
            col.to_string(),
            Aggregate {
                count: values.len() as u64,
                mean: r12(mean),
                std_dev: r12(var.sqrt()),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            },
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    pub theory: TheoryValues,
    pub summary: BTreeMap<String, f64>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub rows: Vec<TrialRow>,
}

impl ExperimentReport {
    pub fn kind(&self) -> ExperimentKind {
        self.config.kind
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }
}

pub fn to_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is always serializable");
    s.push('\n');
    s
}

fn json_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Comment lines carry the config, theory values and summary as
/// `# section.key=value`; then one header line and one line per trial.
pub fn to_csv(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for (section, value) in [
        ("config", serde_json::to_value(&report.config)),
        ("theory", serde_json::to_value(&report.theory)),
        ("summary", serde_json::to_value(&report.summary)),
    ] {
        if let Ok(serde_json::Value::Object(map)) = value {
            for (k, v) in map {
                let _ = writeln!(out, "# {section}.{k}={}", json_scalar(&v));
            }
        }
    }
    let cols = columns(report.kind());
    out.push_str(&cols.join(","));
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = cols
            .iter()
            .map(|c| row.get(c).map(|cell| cell.render()).unwrap_or_default())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Reads back the per-trial rows of a CSV report.
pub fn parse_csv(text: &str) -> Result<(ExperimentKind, Vec<TrialRow>)> {
    let malformed = |message: String| Error::Parse {
        what: "CSV report",
        message,
    };
    let mut kind = None;
    let mut header: Option<Vec<&str>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(k) = comment.trim().strip_prefix("config.kind=") {
                kind = Some(k.parse::<ExperimentKind>().map_err(malformed)?);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match &header {
            None => header = Some(fields),
            Some(cols) => {
                if fields.len() != cols.len() {
                    return Err(malformed(format!(
                        "line {}: {} fields, expected {}",
                        lineno + 1,
                        fields.len(),
                        cols.len()
                    )));
                }
                let mut row = TrialRow::default();
                for (col, raw) in cols.iter().zip(&fields) {
                    row.set(col, raw)
                        .map_err(|e| malformed(format!("line {}: {col}: {e}", lineno + 1)))?;
                }
                rows.push(row);
            }
        }
    }
    let kind = kind.ok_or_else(|| malformed("missing `# config.kind=` line".into()))?;
    Ok((kind, rows))
}

pub fn write_report(report: &ExperimentReport, path: &Path, format: ReportFormat) -> Result<()> {
    let body = match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => to_csv(report),
    };
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.123_456_789_012_345, 12), 0.123_456_789_012);
        assert_eq!(round_sig(123_456_789.987_654_3, 12), 123_456_789.988);
        assert_eq!(round_sig(0.0, 12), 0.0);
        assert_eq!(round_sig(-2.6e-20, 1), -3e-20);
    }

    fn sample_report() -> ExperimentReport {
        let rows: Vec<TrialRow> = (0..3)
            .map(|t| TrialRow {
                l1: Some(100 + u64::from(t)),
                l2: Some(7),
                n_components: Some(40),
                w_density: Some(r12(0.79 + f64::from(t) / 3.0e3)),
                gap_count: Some(0),
                max_dist_w: if t == 1 { None } else { Some(2) },
                ..TrialRow::new(t)
            })
            .collect();
        ExperimentReport {
            config: ConfigEcho {
                kind: ExperimentKind::Supercritical,
                d: 8,
                c: Some(2.0),
                eps: None,
                p: 0.25,
                trials: 3,
                seed: 0,
                w_threshold: Some(64),
                gap_lo: Some(16),
                gap_hi: Some(2),
                p2_exponent: None,
                p1: None,
                p2: None,
                progeny_cap: None,
            },
            theory: TheoryValues::default(),
            summary: BTreeMap::new(),
            aggregates: aggregate_rows(ExperimentKind::Supercritical, &rows),
            rows,
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let report = sample_report();
        let csv = to_csv(&report);
        assert!(csv.contains("# config.kind=supercritical\n"));
        assert!(csv.contains("\ntrial,l1,l2,n_components,w_density,gap_count,max_dist_w\n"));
        assert!(csv.contains("\n1,101,7,40,0.790333333333,0,\n"));
        let (kind, rows) = parse_csv(&csv).unwrap();
        assert_eq!(kind, ExperimentKind::Supercritical);
        assert_eq!(rows, report.rows);
    }

    #[test]
    fn aggregates_skip_missing_cells() {
        let report = sample_report();
        let dist = report.aggregates["max_dist_w"];
        assert_eq!(dist.count, 2);
        assert_eq!((dist.mean, dist.std_dev), (2.0, 0.0));
        let l1 = report.aggregates["l1"];
        assert_eq!((l1.mean, l1.std_dev, l1.min, l1.max), (101.0, 1.0, 100.0, 102.0));
        assert!(!report.aggregates.contains_key("trial"));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_csv("trial,l1\n0,1\n").is_err());
        assert!(parse_csv("# config.kind=gw\ntrial,survived\n0,2\n").is_err());
        assert!(parse_csv("# config.kind=gw\ntrial,survived\n0\n").is_err());
    }

    #[test]
    fn write_report_surfaces_path() {
        let err = write_report(
            &sample_report(),
            Path::new("/nonexistent-dir/report.json"),
            ReportFormat::Json,
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/report.json"));
        assert_eq!(err.exit_code(), 2);
    }

    proptest! {
        #[test]
        fn gw_rows_round_trip(raw in proptest::collection::vec((any::<bool>(), 1u64..100_000, 0u64..500), 1..40)) {
            let rows: Vec<TrialRow> = raw
                .iter()
                .enumerate()
                .map(|(t, &(s, prog, gens))| TrialRow {
                    survived: Some(s),
                    progeny: Some(prog),
                    generations: Some(gens),
                    ..TrialRow::new(t as u32)
                })
                .collect();
            let mut report = sample_report();
            report.config.kind = ExperimentKind::Gw;
            report.aggregates = aggregate_rows(ExperimentKind::Gw, &rows);
            report.rows = rows;
            let (kind, parsed) = parse_csv(&to_csv(&report)).unwrap();
            prop_assert_eq!(kind, ExperimentKind::Gw);
            prop_assert_eq!(parsed, report.rows);
        }
    }
}
