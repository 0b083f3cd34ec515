//! CSV emission, the run manifest, and number formatting.
//!
//! Every CSV has a fixed column order, a header row, comma separation and
//! '.' decimal points; bytes depend only on the manifest's config and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vodsim_core::engine::{MetricsReport, SimConfig, SweepResult};

/// Formats with `digits` significant digits (plain notation), the style
/// used by all printed tables: `0.400000`, `82.5000`, `0.312500`.
pub fn format_sig(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value:.*}", digits.saturating_sub(1));
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Provenance record written alongside every output set: the full config,
/// the command that produced the files, and where they went. Wall-clock
/// fields are informational only; the CSVs depend solely on config + seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config: SimConfig,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u32>>,
}

pub fn now_unix_s() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, config: &SimConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed,
            config: config.clone(),
            started_unix_s: now_unix_s(),
            finished_unix_s: 0.0,
            outputs: Vec::new(),
            trials: None,
            sizes: None,
        }
    }

    pub fn write(&mut self, dir: &Path) -> std::io::Result<PathBuf> {
        self.finished_unix_s = now_unix_s();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text)?;
        Ok(path)
    }
}

fn write_file(dir: &Path, name: &str, body: String, manifest: &mut RunManifest) -> std::io::Result<()> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

/// `requests.csv`: one row per arrival, cumulative count over time.
pub fn write_requests_csv(
    dir: &Path,
    report: &MetricsReport,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    let mut body = String::from("t,cumulative_requests\n");
    for (i, t) in report.arrival_times.iter().enumerate() {
        body.push_str(&format!("{t},{}\n", i + 1));
    }
    write_file(dir, "requests.csv", body, manifest)
}

/// `throughput.csv`: per proxy, per bucket delivered rate with the proxy's
/// viewer-cluster size.
pub fn write_throughput_csv(
    dir: &Path,
    report: &MetricsReport,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    let mut body = String::from("t,kbps,cluster_size\n");
    for series in &report.throughput {
        for (b, kbit) in series.delivered_kbit.iter().enumerate() {
            let t = b as f64 * series.bucket_s;
            let kbps = kbit / series.bucket_s;
            body.push_str(&format!("{t},{kbps},{}\n", series.viewers));
        }
    }
    write_file(dir, "throughput.csv", body, manifest)
}

/// `blocking.csv`: measured per-class, per-partition blocking fractions.
pub fn write_blocking_csv(
    dir: &Path,
    report: &MetricsReport,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    let mut body = String::from("class,partition,measured\n");
    for class in 0..report.partition_probes.len() {
        for j in 0..report.partition_probes[class].len() {
            body.push_str(&format!(
                "{class},{j},{}\n",
                report.measured_partition_blocking(class, j)
            ));
        }
    }
    write_file(dir, "blocking.csv", body, manifest)
}

/// `hops.csv` for a single run: the run's adjacency size with its hop
/// frequencies.
pub fn write_hops_csv(
    dir: &Path,
    report: &MetricsReport,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    let mut body = String::from("adjacency_size,hop_count,frequency\n");
    for (size, hist) in &report.hop_histogram {
        for (hops, count) in hist {
            body.push_str(&format!("{size},{hops},{count}\n"));
        }
    }
    write_file(dir, "hops.csv", body, manifest)
}

/// `hops.csv` for a sweep: one histogram block per adjacency size.
pub fn write_sweep_hops_csv(
    dir: &Path,
    sweep: &SweepResult,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    let mut body = String::from("adjacency_size,hop_count,frequency\n");
    for (size, hist) in &sweep.per_size {
        for (hops, count) in &hist.hops {
            body.push_str(&format!("{size},{hops},{count}\n"));
        }
    }
    write_file(dir, "hops.csv", body, manifest)
}

/// `hops_summary.csv`: mean and variance of found hop counts per size,
/// with the found / not-found split.
pub fn write_hops_summary_csv(
    dir: &Path,
    sweep: &SweepResult,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    let mut body = String::from("adjacency_size,trials,found,not_found,mean,variance\n");
    for (size, hist) in &sweep.per_size {
        let mean = hist.mean().map(|m| m.to_string()).unwrap_or_default();
        let variance = hist.variance().map(|v| v.to_string()).unwrap_or_default();
        body.push_str(&format!(
            "{size},{},{},{},{mean},{variance}\n",
            hist.trials, hist.found, hist.not_found
        ));
    }
    write_file(dir, "hops_summary.csv", body, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.4, 6), "0.400000");
        assert_eq!(format_sig(82.5, 6), "82.5000");
        assert_eq!(format_sig(0.3125, 6), "0.312500");
        assert_eq!(format_sig(2.0, 6), "2.00000");
        assert_eq!(format_sig(0.0, 6), "0.00000");
        assert_eq!(format_sig(123456.0, 6), "123456");
        assert_eq!(format_sig(-1.234567, 6), "-1.23457");
    }
}
