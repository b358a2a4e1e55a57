//! Machine-readable result emission: runs.csv, summary.csv, config.json.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::bench::config::{ExperimentConfig, RunRecord};
use crate::error::{Error, Result};
use crate::metrics::RunSummary;

/// Per-(method, d) summary statistics over the non-missing run values.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub d: usize,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

/// The runs.csv text, one line per record, header first.
pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("study,method,example,d,run,seed,metric,value,wall_ms\n");
    for r in records {
        let value = r.value.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.study.as_str(),
            r.method,
            r.example,
            r.d,
            r.run,
            r.seed,
            r.metric,
            value,
            r.wall_ms
        ));
    }
    out
}

/// Groups records by (method, d) preserving first-appearance order of
/// methods and ascending d.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut method_order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), (String, String, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let mi = match method_order.iter().position(|m| m == &r.method) {
            Some(i) => i,
            None => {
                method_order.push(r.method.clone());
                method_order.len() - 1
            }
        };
        let entry = groups
            .entry((mi, r.d))
            .or_insert_with(|| (r.method.clone(), r.metric.clone(), Vec::new()));
        if let Some(v) = r.value {
            entry.2.push(v);
        }
    }
    groups
        .into_iter()
        .map(|((_, d), (method, metric, values))| {
            if values.is_empty() {
                SummaryRow {
                    method,
                    d,
                    metric,
                    n: 0,
                    mean: f64::NAN,
                    std: f64::NAN,
                    median: f64::NAN,
                }
            } else {
                let s = RunSummary::from_values(&values);
                SummaryRow {
                    method,
                    d,
                    metric,
                    n: values.len(),
                    mean: s.mean,
                    std: s.std,
                    median: s.median,
                }
            }
        })
        .collect()
}

/// Aggregates one summary per method over every run and dimension, the
/// shape of the paper's view-recovery table.
pub fn aggregate_by_method(records: &[RunRecord]) -> Vec<(String, RunSummary)> {
    let mut order: Vec<String> = Vec::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        if !order.contains(&r.method) {
            order.push(r.method.clone());
        }
        if let Some(v) = r.value {
            values.entry(r.method.clone()).or_default().push(v);
        }
    }
    order
        .into_iter()
        .filter_map(|m| {
            values
                .get(&m)
                .filter(|v| !v.is_empty())
                .map(|v| (m.clone(), RunSummary::from_values(v)))
        })
        .collect()
}

/// The summary.csv text.
pub fn summary_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("method,d,metric,n,mean,std,median\n");
    for row in summarize(records) {
        let fmt = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.method,
            row.d,
            row.metric,
            row.n,
            fmt(row.mean),
            fmt(row.std),
            fmt(row.median)
        ));
    }
    out
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let ctx = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut f = std::fs::File::create(path).map_err(ctx)?;
    f.write_all(content.as_bytes()).map_err(ctx)
}

/// Writes runs.csv, summary.csv and config.json into `out_dir`.
/// Re-emitting the same records produces byte-identical files.
pub fn emit(records: &[RunRecord], config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to emit".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(&out_dir.join("runs.csv"), &runs_csv(records))?;
    write_file(&out_dir.join("summary.csv"), &summary_csv(records))?;
    let config_json =
        serde_json::to_string_pretty(config).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    write_file(&out_dir.join("config.json"), &(config_json + "\n"))
}
