//! Comparison report assembly and its table / CSV / JSON renderings.
//!
//! Every float is rounded to 6 decimals when a row is built, so the JSON and
//! CSV forms carry the same values.

use std::fmt::Write;

use isoclust_core::quality::QualityReport;
use isoclust_core::Algorithm;
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;

pub const CSV_HEADER: &str =
    "dataset,algorithm,initial_k,final_k,silhouette_mean,silhouette_x100,sse,runtime_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub algorithm: String,
    pub initial_k: usize,
    /// Most common final cluster count across runs (smallest on ties).
    pub final_k: usize,
    /// Mean over runs of the mean silhouette.
    pub silhouette_mean: Option<f64>,
    pub silhouette_x100: Option<f64>,
    pub silhouette_best: Option<f64>,
    pub silhouette_std: Option<f64>,
    /// Lowest SSE over runs.
    pub sse: f64,
    /// Mean wall time per run; absent with `--no-timing`.
    pub runtime_ms: Option<f64>,
    pub runs: usize,
    /// All runs finished with the same cluster count.
    pub final_k_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub dataset: String,
    pub initial_k: usize,
    pub rows: Vec<ReportRow>,
}

fn round6(x: f64) -> f64 {
    format!("{x:.6}").parse().unwrap_or(x)
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn modal_k(runs: &[QualityReport]) -> usize {
    let mut ks: Vec<usize> = runs.iter().map(|r| r.final_k).collect();
    ks.sort_unstable();
    let mut best = (ks[0], 0);
    for chunk in ks.chunk_by(|a, b| a == b) {
        if chunk.len() > best.1 {
            best = (chunk[0], chunk.len());
        }
    }
    best.0
}

/// Summarizes the runs of one algorithm. `runs` must be non-empty.
pub fn aggregate(
    dataset: &str,
    algorithm: Algorithm,
    initial_k: usize,
    runs: &[QualityReport],
    timing: bool,
) -> ReportRow {
    let sils: Vec<f64> = runs.iter().filter_map(|r| r.silhouette_mean).collect();
    let stats = mean_std(&sils);
    let best = sils.iter().copied().reduce(f64::max);
    let final_k = modal_k(runs);
    let runtime = runs
        .iter()
        .map(|r| r.elapsed.as_secs_f64() * 1e3)
        .sum::<f64>()
        / runs.len() as f64;
    ReportRow {
        dataset: dataset.to_string(),
        algorithm: algorithm.name().to_string(),
        initial_k,
        final_k,
        silhouette_mean: stats.map(|s| round6(s.0)),
        silhouette_x100: stats.map(|s| round6(100.0 * s.0)),
        silhouette_best: best.map(round6),
        silhouette_std: stats.map(|s| round6(s.1)),
        sse: round6(runs.iter().map(|r| r.sse).fold(f64::INFINITY, f64::min)),
        runtime_ms: timing.then(|| round6(runtime)),
        runs: runs.len(),
        final_k_agree: runs.iter().all(|r| r.final_k == final_k),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{}",
                csv_field(&r.dataset),
                r.algorithm,
                r.initial_k,
                r.final_k,
                opt(r.silhouette_mean),
                opt(r.silhouette_x100),
                r.sse,
                opt(r.runtime_ms),
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dataset: {}", self.dataset);
        let _ = writeln!(out, "initial clusters: {}", self.initial_k);
        let _ = writeln!(
            out,
            "{:<16} {:>7} {:>10} {:>10} {:>10} {:>10} {:>14} {:>12}",
            "algorithm",
            "final_k",
            "sil_mean",
            "sil_best",
            "sil_std",
            "sil_x100",
            "sse",
            "runtime_ms"
        );
        for r in &self.rows {
            let k = if r.final_k_agree {
                r.final_k.to_string()
            } else {
                format!("{}*", r.final_k)
            };
            let _ = writeln!(
                out,
                "{:<16} {:>7} {:>10} {:>10} {:>10} {:>10} {:>14.6} {:>12}",
                r.algorithm,
                k,
                opt(r.silhouette_mean),
                opt(r.silhouette_best),
                opt(r.silhouette_std),
                opt(r.silhouette_x100),
                r.sse,
                opt(r.runtime_ms),
            );
        }
        if self.rows.iter().any(|r| !r.final_k_agree) {
            out.push_str("* runs disagreed on the final cluster count; the most common is shown\n");
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Table => self.to_table(),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}
