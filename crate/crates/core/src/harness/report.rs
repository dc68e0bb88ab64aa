//! Experiment reports, verdicts and the CSV series writer.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Relative drift under refinement below which a sup counts as bounded.
pub const DRIFT_TOL: f64 = 0.25;
/// Scales in a monotone tail needed for an unbounded trend.
pub const TREND_SCALES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    UnboundedTrend,
    Vacuous,
    /// Neither stable nor monotonically growing.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::UnboundedTrend => "unbounded-trend",
            Verdict::Vacuous => "vacuous",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Bounded when consecutive values differ by less than [`DRIFT_TOL`].
pub fn drift(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0.0, f64::max)
}

/// The last [`TREND_SCALES`] values increase strictly.
pub fn monotone_tail(values: &[f64]) -> bool {
    values.len() >= TREND_SCALES && values[values.len() - TREND_SCALES..].windows(2).all(|w| w[1] > w[0])
}

/// Verdict for a refinement series of a sup-type constant.
pub fn refinement_verdict(values: &[f64]) -> Verdict {
    if values.is_empty() {
        Verdict::Vacuous
    } else if values.iter().all(|v| v.is_finite()) && drift(values) < DRIFT_TOL {
        Verdict::Bounded
    } else if monotone_tail(values) {
        Verdict::UnboundedTrend
    } else {
        Verdict::Inconclusive
    }
}

/// One hypothesis check run before an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreCheck {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub detail: String,
}

/// One CSV row: `experiment, series, label, scale, value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub series: String,
    pub label: String,
    pub scale: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub prechecks: Vec<PreCheck>,
    pub constants: BTreeMap<String, f64>,
    pub series: Vec<SeriesRow>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Verdict>,
    pub notes: Vec<String>,
    /// Extra CSV files written next to the report, keyed by file name.
    #[serde(skip)]
    pub attachments: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, subcommand: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            subcommand: subcommand.into(),
            parameters: BTreeMap::new(),
            prechecks: Vec::new(),
            constants: BTreeMap::new(),
            series: Vec::new(),
            verdict: Verdict::Vacuous,
            expected: None,
            notes: Vec::new(),
            attachments: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    pub fn constant(&mut self, key: impl Into<String>, value: f64) {
        self.constants.insert(key.into(), value);
    }

    pub fn push(&mut self, series: &str, label: impl Into<String>, scale: f64, value: f64) {
        self.series.push(SeriesRow {
            series: series.to_string(),
            label: label.into(),
            scale,
            value,
        });
    }

    pub fn precheck(&mut self, name: impl Into<String>, passed: bool, value: Option<f64>, detail: impl Into<String>) {
        self.prechecks.push(PreCheck {
            name: name.into(),
            passed,
            value,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Values of one series in insertion order.
    pub fn values(&self, series: &str) -> Vec<f64> {
        self.series.iter().filter(|r| r.series == series).map(|r| r.value).collect()
    }

    pub fn matches_expectation(&self) -> bool {
        self.expected.is_none_or(|e| e == self.verdict)
    }

    /// Writes `report.json`, `series.csv` and the attachments into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        let mut csv = fs::File::create(dir.join("series.csv"))?;
        self.write_csv(&mut csv)?;
        for (name, text) in &self.attachments {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "experiment,series,label,scale,value")?;
        for r in &self.series {
            writeln!(w, "{},{},{},{},{}", self.experiment, r.series, r.label, r.scale, r.value)?;
        }
        Ok(())
    }
}
