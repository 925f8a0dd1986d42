//! Report records and their JSON / CSV encodings.
//!
//! Records are written in input order. The only non-reproducible field is
//! `wall_ms`.

use std::path::Path;

use anyhow::{Context, Result};
use dehaze_core::MetricReport;
use serde::{Deserialize, Serialize};

use crate::config::{Method, ReportFormat, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub e: Option<f64>,
    pub r_bar: Option<f64>,
    pub sigma: f64,
    pub alpha_dc: f64,
    pub beta_hl: Option<f64>,
}

impl From<MetricReport> for Metrics {
    fn from(m: MetricReport) -> Self {
        Self { e: m.e, r_bar: m.r_bar, sigma: m.sigma, alpha_dc: m.alpha_dc, beta_hl: m.beta_hl }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub input: String,
    pub method: Method,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub params: Settings,
    pub wall_ms: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessPair {
    pub hazy: String,
    pub dehazed: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessReport {
    pub params: Settings,
    pub pairs: Vec<AssessPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub input: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub t: Option<f64>,
    pub depth: Option<String>,
    pub scatter: Option<f64>,
    pub k: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub records: Vec<SynthRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatePair {
    pub pair_name: String,
    pub hazy: String,
    pub clean: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub params: Settings,
    pub pairs: Vec<ValidatePair>,
    /// Mean score over successful pairs.
    pub mean: Option<f64>,
}

fn num(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

const PARAM_COLUMNS: [&str; 15] = [
    "method", "format", "omega", "patch", "k0", "t_floor", "avg_radius", "gf_radius", "gf_eps", "window",
    "top_fraction", "directions", "min_cluster", "edge_threshold", "min_gradient",
];

fn param_values(s: &Settings) -> Vec<String> {
    vec![
        s.method.as_str().to_owned(),
        s.format.extension().to_owned(),
        s.omega.to_string(),
        s.patch.to_string(),
        s.k0.to_string(),
        s.t_floor.to_string(),
        s.avg_radius.to_string(),
        s.gf_radius.to_string(),
        s.gf_eps.to_string(),
        format!("{:?}", s.window).to_lowercase(),
        s.top_fraction.to_string(),
        s.directions.to_string(),
        s.min_cluster.to_string(),
        s.edge_threshold.to_string(),
        s.min_gradient.to_string(),
    ]
}

fn metric_values(m: Option<&Metrics>) -> Vec<String> {
    match m {
        Some(m) => vec![num(m.e), num(m.r_bar), m.sigma.to_string(), m.alpha_dc.to_string(), num(m.beta_hl)],
        None => vec![String::new(); 5],
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Failed => "failed",
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

const METRIC_COLUMNS: [&str; 5] = ["e", "r_bar", "sigma", "alpha_dc", "beta_hl"];

impl RunReport {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut header = vec!["input", "status", "wall_ms", "outputs"];
        header.extend(METRIC_COLUMNS);
        header.push("error");
        header.extend(PARAM_COLUMNS);
        let rows = self.records.iter().map(|r| {
            let mut row = vec![r.input.clone(), status_str(r.status).into(), r.wall_ms.to_string(), r.outputs.join(";")];
            row.extend(metric_values(r.metrics.as_ref()));
            row.push(r.error.clone().unwrap_or_default());
            row.extend(param_values(&r.params));
            row
        });
        csv_bytes(&header, rows)
    }
}

impl AssessReport {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut header = vec!["hazy", "dehazed", "status"];
        header.extend(METRIC_COLUMNS);
        header.push("error");
        header.extend(PARAM_COLUMNS);
        let rows = self.pairs.iter().map(|p| {
            let mut row = vec![p.hazy.clone(), p.dehazed.clone(), status_str(p.status).into()];
            row.extend(metric_values(p.metrics.as_ref()));
            row.push(p.error.clone().unwrap_or_default());
            row.extend(param_values(&self.params));
            row
        });
        csv_bytes(&header, rows)
    }

    /// Metric-by-method table: one row per (image, metric), one column per
    /// dehazed candidate.
    pub fn comparison_table(&self) -> String {
        use std::collections::BTreeMap;
        use std::fmt::Write;
        let mut by_image: BTreeMap<&str, Vec<&AssessPair>> = BTreeMap::new();
        for p in &self.pairs {
            by_image.entry(p.hazy.as_str()).or_default().push(p);
        }
        let mut out = String::new();
        for (hazy, pairs) in by_image {
            let _ = write!(out, "{:<24}{:<12}", "image", "assessment");
            for p in &pairs {
                let _ = write!(out, "{:>16}", short_name(&p.dehazed));
            }
            out.push('\n');
            for (k, name) in ["e", "r_bar", "sigma", "alpha", "beta"].iter().enumerate() {
                let _ = write!(out, "{:<24}{:<12}", if k == 0 { short_name(hazy) } else { String::new() }, name);
                for p in &pairs {
                    let v = p.metrics.and_then(|m| match k {
                        0 => m.e,
                        1 => m.r_bar,
                        2 => Some(m.sigma),
                        3 => Some(m.alpha_dc),
                        _ => m.beta_hl,
                    });
                    match v {
                        Some(v) => {
                            let _ = write!(out, "{v:>16.5}");
                        }
                        None => {
                            let _ = write!(out, "{:>16}", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
        out
    }
}

fn short_name(path: &str) -> String {
    Path::new(path).file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.to_owned())
}

impl SynthReport {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let header = ["input", "status", "t", "depth", "scatter", "k", "outputs", "error"];
        let rows = self.records.iter().map(|r| {
            vec![
                r.input.clone(),
                status_str(r.status).into(),
                num(r.t),
                r.depth.clone().unwrap_or_default(),
                num(r.scatter),
                r.k.to_string(),
                r.outputs.join(";"),
                r.error.clone().unwrap_or_default(),
            ]
        });
        csv_bytes(&header, rows)
    }
}

impl ValidateReport {
    /// Fixed two-column layout `pair_name,score`; failed pairs have an empty score.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let rows = self.pairs.iter().map(|p| vec![p.pair_name.clone(), num(p.score)]);
        csv_bytes(&["pair_name", "score"], rows)
    }
}

/// Serializes `report` as JSON or CSV into `path`.
pub fn write_report<T: Serialize>(
    path: &Path,
    format: ReportFormat,
    report: &T,
    csv: impl FnOnce(&T) -> Result<Vec<u8>>,
) -> Result<()> {
    let bytes = match format {
        ReportFormat::Json => {
            let mut b = serde_json::to_vec_pretty(report)?;
            b.push(b'\n');
            b
        }
        ReportFormat::Csv => csv(report)?,
    };
    std::fs::write(path, bytes).with_context(|| format!("cannot write report {}", path.display()))
}
