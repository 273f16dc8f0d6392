//! Experiment reports and their JSON/CSV serializations.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::stats::EstimateWithCI;
use crate::Result;

use super::ExperimentSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(crate::Error::InvalidGrid(format!(
                "unknown format {other:?}"
            ))),
        }
    }
}

/// The grid coordinates of one cell; unset fields are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub cols: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
}

/// One grid cell: its primary estimate/bound/ratio plus any named
/// secondary quantities, a verdict when the experiment defines one per
/// cell, and an error when the cell could not be evaluated.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CellReport {
    pub params: CellParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateWithCI>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub estimates: BTreeMap<String, EstimateWithCI>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Full record of one campaign. Rerunning the embedded spec reproduces the
/// report byte for byte; every verdict is recomputable from the stored
/// estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub toolchain: String,
    #[serde(rename = "masterSeed")]
    pub master_seed: u64,
    pub cells: Vec<CellReport>,
    #[serde(rename = "globalVerdicts")]
    pub global_verdicts: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub fitted: BTreeMap<String, f64>,
    pub pass: bool,
}

pub fn emit_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// One CSV row per grid cell.
pub fn emit_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "experiment",
        "n",
        "N",
        "k",
        "m",
        "estimate",
        "se",
        "bound",
        "ratio",
        "verdict",
    ])?;
    let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for cell in &report.cells {
        w.write_record([
            report.spec.name.as_str().to_string(),
            opt_u(cell.params.n),
            opt_u(cell.params.cols),
            opt_u(cell.params.k),
            opt_u(cell.params.m),
            opt_f(cell.estimate.as_ref().map(|e| e.mean)),
            opt_f(cell.estimate.as_ref().map(|e| e.se)),
            opt_f(cell.bound),
            opt_f(cell.ratio),
            cell.verdict.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| crate::Error::Csv(e.to_string()))
}

/// Write the report in the requested format.
pub fn emit(report: &ExperimentReport, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    let text = match format {
        OutputFormat::Json => emit_json(report)?,
        OutputFormat::Csv => emit_csv(report)?,
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}
