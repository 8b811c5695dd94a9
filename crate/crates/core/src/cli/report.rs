use serde::{Deserialize, Serialize};

use super::config::{Format, RunConfig};
use super::CliError;
use crate::geometry::GeometryReport;
use crate::intelligent::{FamilyKind, TheoremReport};
use crate::pbur::PburReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: bool,
    /// The uncertainty ratio that came closest to failing its check:
    /// farthest from one for saturating families, smallest for sweeps.
    pub worst_ratio: Option<f64>,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub kind: FamilyKind,
    pub lambda1: f64,
    pub lambda2: f64,
    pub orthogonality_parameter: f64,
    pub pbur: PburReport,
    pub theorem: TheoremReport,
    pub geometry: GeometryReport,
    pub max_uncertainty_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub dimension: usize,
    pub lambda2: f64,
    pub fs_length: f64,
    pub geodesic_distance: f64,
    /// S − S₀.
    pub gap: f64,
    /// `None` when the endpoints are too close for the ratio to exist.
    pub ratio: Option<f64>,
    pub quadrature_error: Option<f64>,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub trials: usize,
    pub violations: usize,
    pub min_gap: f64,
    pub median_gap: f64,
    pub max_gap: f64,
    pub per_trial: Vec<TrialResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub lambda: f64,
    #[serde(rename = "delta_A")]
    pub delta_a: f64,
    pub fidelity_to_start: f64,
    #[serde(rename = "cumulative_S")]
    pub cumulative_s: f64,
    #[serde(rename = "cumulative_S0_chord")]
    pub cumulative_s0_chord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<FamilyResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.summary.pass {
            0
        } else {
            1
        }
    }

    /// JSON report, or CSV rows: the trace table for trace-path, the checks
    /// otherwise.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self)?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                if self.trace.is_empty() {
                    for c in &self.checks {
                        w.serialize(c)?;
                    }
                } else {
                    for r in &self.trace {
                        w.serialize(r)?;
                    }
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }

    pub fn parse_json(s: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(s)?)
    }
}
