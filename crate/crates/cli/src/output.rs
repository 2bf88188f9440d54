//! Result files. Every float goes through [`sig9`] before it is written, so
//! the CSV and JSON carry the same numbers.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mrmc_core::sweep::{ConfigResult, PlanSummary, RelaxationPoint, RunStats};
use serde::Serialize;

pub const RESULT_COLUMNS: [&str; 11] = [
    "channels",
    "radios",
    "capacity",
    "E",
    "E0",
    "throughput",
    "EE",
    "EE_star",
    "EE_fraction",
    "status",
    "wall_ms",
];

pub const RELAX_COLUMNS: [&str; 9] = ["rho", "target", "E", "E0", "throughput", "EE", "EE_star", "EE_fraction", "status"];

/// Round to 9 significant digits.
pub fn sig9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.8e}").parse().unwrap()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| sig9(x).to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub channels: usize,
    pub radios: usize,
    pub capacity: Option<f64>,
    #[serde(rename = "E")]
    pub e: Option<f64>,
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    pub throughput: Option<f64>,
    #[serde(rename = "EE")]
    pub ee: Option<f64>,
    #[serde(rename = "EE_star")]
    pub ee_star: Option<f64>,
    #[serde(rename = "EE_fraction")]
    pub ee_fraction: Option<f64>,
    pub status: &'static str,
    pub wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub plan: Option<PlanSummary>,
    pub stats: RunStats,
}

impl ResultRow {
    pub fn new(r: &ConfigResult, timing: bool) -> Self {
        let report = r.report.as_ref();
        let round = |v: Option<f64>| v.map(sig9);
        let mut stats = r.solver_stats.clone();
        if !timing {
            stats.wall_ms = 0.0;
        }
        ResultRow {
            channels: r.config.channels,
            radios: r.config.radios,
            capacity: round(report.map(|_| r.capacity)),
            e: round(report.map(|x| x.e_transmission)),
            e0: round(report.map(|x| x.e_sleep)),
            throughput: round(report.map(|x| x.throughput)),
            ee: round(report.map(|x| x.efficiency)),
            ee_star: round(report.and_then(|x| x.upper_bound)),
            ee_fraction: round(report.and_then(|x| x.efficiency_fraction)),
            status: r.status.as_str(),
            wall_ms: timing.then(|| sig9(r.solver_stats.wall_ms)),
            error: r.error.clone(),
            plan: r.plan.clone(),
            stats,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.channels.to_string(),
            self.radios.to_string(),
            cell(self.capacity),
            cell(self.e),
            cell(self.e0),
            cell(self.throughput),
            cell(self.ee),
            cell(self.ee_star),
            cell(self.ee_fraction),
            self.status.to_string(),
            cell(self.wall_ms),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxRow {
    pub rho: f64,
    pub target: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub throughput: f64,
    #[serde(rename = "EE")]
    pub ee: f64,
    #[serde(rename = "EE_star")]
    pub ee_star: Option<f64>,
    #[serde(rename = "EE_fraction")]
    pub ee_fraction: Option<f64>,
    pub status: &'static str,
    pub plan: PlanSummary,
}

impl RelaxRow {
    pub fn new(p: &RelaxationPoint) -> Self {
        RelaxRow {
            rho: sig9(p.rho),
            target: sig9(p.target),
            e: sig9(p.report.e_transmission),
            e0: sig9(p.report.e_sleep),
            throughput: sig9(p.report.throughput),
            ee: sig9(p.report.efficiency),
            ee_star: p.report.upper_bound.map(sig9),
            ee_fraction: p.report.efficiency_fraction.map(sig9),
            status: p.status.as_str(),
            plan: p.plan.clone(),
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            cell(Some(self.rho)),
            cell(Some(self.target)),
            cell(Some(self.e)),
            cell(Some(self.e0)),
            cell(Some(self.throughput)),
            cell(Some(self.ee)),
            cell(self.ee_star),
            cell(self.ee_fraction),
            self.status.to_string(),
        ]
    }
}

fn write_csv(path: &Path, header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn write_results(dir: &Path, rows: &[ResultRow]) -> Result<()> {
    write_csv(&dir.join("results.csv"), &RESULT_COLUMNS, rows.iter().map(ResultRow::record))?;
    write_json(&dir.join("results.json"), &rows)
}

pub fn write_relaxation(dir: &Path, rows: &[RelaxRow]) -> Result<()> {
    write_csv(&dir.join("relax.csv"), &RELAX_COLUMNS, rows.iter().map(RelaxRow::record))?;
    write_json(&dir.join("relax.json"), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.5 / 1.01).to_string(), "0.495049505");
        assert_eq!(sig9(123456789012.0).to_string(), "123456789000");
        assert_eq!(sig9(1.0).to_string(), "1");
        assert_eq!(sig9(0.0), 0.0);
        assert_eq!(sig9(-2.0 / 3.0).to_string(), "-0.666666667");
    }

    #[test]
    fn json_and_csv_text_agree() {
        for v in [1.0 / 3.0, 2.0 / 3.0 * 1e-7, 12345.678912345, 0.1 + 0.2] {
            let r = sig9(v);
            let json: f64 = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            let csv: f64 = cell(Some(v)).parse().unwrap();
            assert_eq!(json, csv);
        }
    }

    #[test]
    fn missing_values_are_blank() {
        assert_eq!(cell(None), "");
    }
}
