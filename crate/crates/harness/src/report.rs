//! Machine-readable suite reports. Reports hold no timings or host data, so
//! equal configurations give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub dictionary_seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            dictionary_seed: cfg.dictionary_seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Statistics of one sweep element (usually one atom).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

impl Row {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Change of a headline statistic when the dictionary or the grid is doubled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub name: String,
    pub base: f64,
    pub refined: f64,
    pub relative_change: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl StabilityCheck {
    pub fn new(name: impl Into<String>, base: f64, refined: f64, tolerance: f64) -> Self {
        let relative_change = if base == refined {
            0.0
        } else {
            (refined - base).abs() / base.abs()
        };
        Self {
            name: name.into(),
            base,
            refined,
            relative_change,
            tolerance,
            pass: relative_change <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// Passes when `value <= threshold`.
    AtMost,
    /// Passes when `value >= threshold`.
    AtLeast,
    /// Passes when `|value - threshold| <= tolerance`.
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Criterion {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::AtMost,
            threshold,
            tolerance: 0.0,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            threshold,
            tolerance: 0.0,
            pass: value >= threshold,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::Within,
            threshold: target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// Boolean outcome recorded as `1` (holds) or `0`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub provenance: Provenance,
    pub parameters: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
    pub aggregates: BTreeMap<String, f64>,
    pub stability: Vec<StabilityCheck>,
    pub criteria: Vec<Criterion>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, cfg: &ExperimentConfig) -> Self {
        Self {
            suite: suite.into(),
            provenance: Provenance::of(cfg),
            parameters: BTreeMap::new(),
            rows: Vec::new(),
            aggregates: BTreeMap::new(),
            stability: Vec::new(),
            criteria: Vec::new(),
            notes: Vec::new(),
            pass: false,
        }
    }

    pub fn param(&mut self, key: &str, value: f64) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn aggregate(&mut self, key: &str, value: f64) {
        self.aggregates.insert(key.to_string(), value);
    }

    pub fn criterion(&mut self, c: Criterion) {
        self.criteria.push(c);
    }

    pub fn criterion_named(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Sets the verdict: every criterion and every stability check passes.
    pub fn finalize(mut self) -> Self {
        self.pass = !self.criteria.is_empty()
            && self.criteria.iter().all(|c| c.pass)
            && self.stability.iter().all(|s| s.pass);
        self
    }

    /// Replaces non-finite numbers, which JSON cannot carry, by a note.
    fn sanitized(&self) -> Self {
        let mut out = self.clone();
        let mut dropped = Vec::new();
        let mut scrub = |scope: &str, map: &mut BTreeMap<String, f64>| {
            map.retain(|k, v| {
                let keep = v.is_finite();
                if !keep {
                    dropped.push(format!("{scope}.{k} = {v}"));
                }
                keep
            });
        };
        scrub("parameters", &mut out.parameters);
        scrub("aggregates", &mut out.aggregates);
        for row in &mut out.rows {
            let scope = format!("rows[{}]", row.label);
            scrub(&scope, &mut row.values);
        }
        for d in dropped {
            out.notes.push(format!("non-finite value omitted: {d}"));
        }
        // verdict fields must stay present; clamp them instead
        let mut clamped = Vec::new();
        let mut clamp = |scope: String, v: &mut f64| {
            if !v.is_finite() {
                clamped.push(format!("{scope} = {v}"));
                *v = if *v < 0.0 { f64::MIN } else { f64::MAX };
            }
        };
        for c in &mut out.criteria {
            clamp(format!("criteria[{}].value", c.name), &mut c.value);
            clamp(format!("criteria[{}].threshold", c.name), &mut c.threshold);
        }
        for s in &mut out.stability {
            clamp(format!("stability[{}].base", s.name), &mut s.base);
            clamp(format!("stability[{}].refined", s.name), &mut s.refined);
            clamp(
                format!("stability[{}].relative_change", s.name),
                &mut s.relative_change,
            );
        }
        for c in clamped {
            out.notes.push(format!("non-finite value clamped: {c}"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(HarnessError::Config(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

pub fn to_json(report: &VerificationReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&report.sanitized())
        .map_err(|e| HarnessError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Long-format table `section,label,key,value`, one fact per line.
pub fn to_csv(report: &VerificationReport) -> String {
    let r = report.sanitized();
    let mut out = String::from("section,label,key,value\n");
    let mut line = |section: &str, label: &str, key: &str, value: &str| {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            section,
            csv_field(label),
            csv_field(key),
            csv_field(value)
        );
    };
    line("suite", "", "name", &r.suite);
    line("suite", "", "pass", &r.pass.to_string());
    line("provenance", "", "config_hash", &r.provenance.config_hash);
    line("provenance", "", "seed", &r.provenance.seed.to_string());
    line(
        "provenance",
        "",
        "dictionary_seed",
        &r.provenance.dictionary_seed.to_string(),
    );
    line("provenance", "", "version", &r.provenance.version);
    for (k, v) in &r.parameters {
        line("parameter", "", k, &v.to_string());
    }
    for row in &r.rows {
        for (k, v) in &row.values {
            line("row", &row.label, k, &v.to_string());
        }
    }
    for (k, v) in &r.aggregates {
        line("aggregate", "", k, &v.to_string());
    }
    for s in &r.stability {
        line("stability", &s.name, "base", &s.base.to_string());
        line("stability", &s.name, "refined", &s.refined.to_string());
        line(
            "stability",
            &s.name,
            "relative_change",
            &s.relative_change.to_string(),
        );
        line("stability", &s.name, "tolerance", &s.tolerance.to_string());
        line("stability", &s.name, "pass", &s.pass.to_string());
    }
    for c in &r.criteria {
        line("criterion", &c.name, "value", &c.value.to_string());
        line("criterion", &c.name, "threshold", &c.threshold.to_string());
        line("criterion", &c.name, "tolerance", &c.tolerance.to_string());
        line("criterion", &c.name, "pass", &c.pass.to_string());
    }
    for (i, n) in r.notes.iter().enumerate() {
        line("note", &i.to_string(), "text", n);
    }
    out
}

/// Writes `report` to `path` in the requested format.
pub fn emit_report(report: &VerificationReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => to_json(report)?,
        ReportFormat::Csv => to_csv(report),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

pub fn read_report(path: &Path) -> Result<VerificationReport> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse(e.to_string()))
}
