//! CSV and JSON report files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::localization::LocalizationRecord;
use super::rh::RHRecord;
use super::scan::{ScanGap, ScanRecord, ScanVerdict, STABILITY_GROWTH};
use crate::error::{Error, Result};
use crate::geometry::ChordArcCertificate;

/// JSON schema of `summary.json`.
pub const SUMMARY_SCHEMA: &str = include_str!("../../schema/summary.schema.json");

pub const TOOL: &str = "pellipt";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub domain: String,
    pub h: f64,
    #[serde(flatten)]
    pub certificate: ChordArcCertificate,
}

/// An identity asserted inline while the run was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Records {
    pub rh: Vec<RHRecord>,
    pub scan: Vec<ScanRecord>,
    pub verdicts: Vec<ScanVerdict>,
    pub localization: Vec<LocalizationRecord>,
    pub gaps: Vec<ScanGap>,
}

impl Records {
    pub fn is_empty(&self) -> bool {
        self.rh.is_empty() && self.scan.is_empty() && self.localization.is_empty() && self.verdicts.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RecordCounts {
    pub rh: usize,
    pub scan: usize,
    pub localization: usize,
    pub gaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration.
    pub config: Value,
    pub operator: Option<String>,
    pub domain: Option<String>,
    pub certificates: Vec<CertificateEntry>,
    pub verdicts: Vec<ScanVerdict>,
    pub stability_threshold: f64,
    pub checks: Vec<Check>,
    pub records: RecordCounts,
    pub results: Value,
    pub errors: Vec<String>,
}

impl Summary {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            operator: None,
            domain: None,
            certificates: Vec::new(),
            verdicts: Vec::new(),
            stability_threshold: STABILITY_GROWTH,
            checks: Vec::new(),
            records: RecordCounts::default(),
            results: Value::Null,
            errors: Vec::new(),
        }
    }

    /// Records `check` and fails with `Invariant` if it did not pass.
    pub fn assert(&mut self, check: Check) -> Result<()> {
        let failed = (!check.passed).then(|| format!("{}: {}", check.name, check.detail));
        self.checks.push(check);
        match failed {
            Some(msg) => Err(Error::Invariant(msg)),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn joined(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn to_label<T: Serialize>(x: &T) -> Result<String> {
    Ok(match serde_json::to_value(x)? {
        Value::String(s) => s,
        other => other.to_string(),
    })
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rh_csv(path: &Path, records: &[RHRecord]) -> Result<()> {
    let header = [
        "operator", "drift_k", "kind", "ball", "radius", "q", "p", "lhs", "rhs", "ratio", "level", "h", "degenerate",
    ];
    let rows = records
        .iter()
        .map(|r| {
            Ok(vec![
                r.operator.clone(),
                num(r.drift_k),
                to_label(&r.kind)?,
                r.ball.clone(),
                num(r.radius),
                num(r.q),
                num(r.p),
                num(r.lhs),
                num(r.rhs),
                opt(r.ratio),
                r.level.to_string(),
                num(r.h),
                r.degenerate.to_string(),
            ])
        })
        .collect::<Result<_>>()?;
    write_table(path, &header, rows)
}

pub fn write_scan_csv(path: &Path, records: &[ScanRecord]) -> Result<()> {
    let header = [
        "operator", "domain", "p", "family", "estimate", "constant_ratio", "level", "h", "predicted_endpoint",
        "inside_range", "missing",
    ];
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.operator.clone(),
                r.domain.clone(),
                num(r.p),
                r.family.clone(),
                num(r.estimate),
                num(r.constant_ratio),
                r.level.to_string(),
                num(r.h),
                r.predicted_endpoint.to_string(),
                r.inside_range.to_string(),
                r.missing.to_string(),
            ]
        })
        .collect();
    write_table(path, &header, rows)
}

pub fn write_verdicts_csv(path: &Path, verdicts: &[ScanVerdict]) -> Result<()> {
    let header = ["operator", "p", "verdict", "growth", "inside_range", "consistent", "threshold"];
    let rows = verdicts
        .iter()
        .map(|v| {
            Ok(vec![
                v.operator.clone(),
                num(v.p),
                to_label(&v.verdict)?,
                joined(&v.growth),
                v.inside_range.to_string(),
                v.consistent.map(|c| c.to_string()).unwrap_or_default(),
                num(v.threshold),
            ])
        })
        .collect::<Result<_>>()?;
    write_table(path, &header, rows)
}

pub fn write_localization_csv(path: &Path, records: &[LocalizationRecord]) -> Result<()> {
    let header = [
        "center", "d", "m", "escalated", "p", "q", "a", "lhs", "rhs", "ratio", "missing", "h", "degenerate",
    ];
    let rows = records
        .iter()
        .map(|r| {
            vec![
                joined(&r.center),
                num(r.d),
                r.m.to_string(),
                r.escalated.to_string(),
                num(r.p),
                num(r.q),
                num(r.a),
                num(r.lhs),
                num(r.rhs),
                opt(r.ratio),
                r.missing.to_string(),
                num(r.h),
                r.degenerate.to_string(),
            ]
        })
        .collect();
    write_table(path, &header, rows)
}

/// Writes `summary.json` into `dir`.
pub fn write_summary(summary: &Summary, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("summary.json");
    fs::write(&path, summary.to_json()?)?;
    Ok(path)
}

/// Writes one CSV per nonempty record type plus `summary.json`.
///
/// Fails without touching the file system when there are no records.
pub fn report_emit(records: &Records, summary: &Summary, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Config("no records to report".into()));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut summary = summary.clone();
    summary.records = RecordCounts {
        rh: records.rh.len(),
        scan: records.scan.len(),
        localization: records.localization.len(),
        gaps: records.gaps.len(),
    };
    if summary.verdicts.is_empty() {
        summary.verdicts = records.verdicts.clone();
    }
    if !records.rh.is_empty() {
        let p = dir.join("rh.csv");
        write_rh_csv(&p, &records.rh)?;
        written.push(p);
    }
    if !records.scan.is_empty() {
        let p = dir.join("scan.csv");
        write_scan_csv(&p, &records.scan)?;
        written.push(p);
    }
    if !records.verdicts.is_empty() {
        let p = dir.join("verdicts.csv");
        write_verdicts_csv(&p, &records.verdicts)?;
        written.push(p);
    }
    if !records.localization.is_empty() {
        let p = dir.join("localization.csv");
        write_localization_csv(&p, &records.localization)?;
        written.push(p);
    }
    written.push(write_summary(&summary, dir)?);
    Ok(written)
}
