//! Report artifacts: JSON reports, run manifests, and aligned text tables.
//!
//! Every report is a deterministic function of the inputs, the flags, and
//! the seed, so byte-identical invocations produce byte-identical files.
//! Wall times and output digests are carried by a separate manifest file
//! instead, which is the only non-deterministic artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io::fmt_f64;
use crate::sim::{ReplicateRecord, SimConfig, SimReport};

/// Version stamp for every JSON artifact schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Digest of one input or output file, recorded by base name so reports do
/// not depend on where the files live.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

/// Provenance embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Subcommand that produced the artifact.
    pub command: String,
    /// Digest of the configuration file, for simulation runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    /// Digests of the input files, in argument order.
    pub inputs: Vec<FileDigest>,
    pub seed: u64,
    pub version: String,
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(FileDigest { name, sha256: hex_sha256(&bytes) })
}

/// Hex SHA-256 of a byte slice.
pub fn hex_sha256(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// One coefficient row of a fit report, on the raw input scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientRow {
    /// 1-based column in the input file.
    pub column: usize,
    /// Lasso estimate.
    pub lasso: f64,
    /// Corrected estimate.
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
    /// Whether the column belongs to the expanded model.
    pub expanded: bool,
    /// True when the interval collapsed to a point (zero spread).
    pub degenerate: bool,
}

/// Full fit report. All coefficient quantities are on the raw input scale;
/// the recorded penalty is on the unit-variance standardized scale so the
/// fit can be reproduced exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub n: usize,
    /// Columns in the input file, informative or not.
    pub p: usize,
    /// 1-based constant columns that were dropped.
    pub dropped_columns: Vec<usize>,
    /// Penalty on the unit-variance scale.
    pub lambda: f64,
    /// How the penalty was chosen: "fixed", "cv", or "degenerate-response".
    pub lambda_rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_folds: Option<usize>,
    pub sizing_constant: f64,
    pub seed: u64,
    pub level: f64,
    /// Ridge levels actually used (fitting scale).
    pub tau_a: f64,
    pub tau_c: f64,
    /// Ridge overrides requested on the command line, echoed for refits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_a_override: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_c_override: Option<f64>,
    /// Residual scale estimate on the response scale.
    pub sigma_hat: f64,
    /// True when the residual scale collapsed (for example an all-zero
    /// response); intervals are then degenerate.
    pub sigma_degenerate: bool,
    /// 1-based lasso active set.
    pub selected: Vec<usize>,
    /// 1-based expanded model.
    pub expanded: Vec<usize>,
    /// 1-based randomly injected part of the expanded model.
    pub injected: Vec<usize>,
    pub intercept: f64,
    pub coefficients: Vec<CoefficientRow>,
}

/// One test statistic within a test report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: String,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value_two_sided: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Rejection of the group null at significance 1 − level.
    pub reject: bool,
}

/// Group test report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub manifest: RunManifest,
    /// 1-based group as requested.
    pub group: Vec<usize>,
    pub level: f64,
    pub results: Vec<TestResult>,
}

/// Simulation report file: schema stamp, provenance, and the study report.
#[derive(Debug, Clone, Serialize)]
pub struct SimReportFile {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub study: SimReport,
}

/// Timing sidecar for a simulation run: the one artifact that varies
/// between reruns.
#[derive(Debug, Clone, Serialize)]
pub struct SimManifest {
    pub manifest: RunManifest,
    pub jobs: usize,
    pub total_seconds: f64,
    /// Mean wall time of the successful replicates.
    pub mean_replicate_seconds: f64,
    /// Digests of the deterministic artifacts.
    pub artifacts: Vec<FileDigest>,
}

/// Serialize a report as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write a report as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_bytes(value)?)?;
    Ok(())
}

fn fmt_opt_rate(rate: Option<f64>) -> String {
    rate.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into())
}

/// Aligned text table mirroring the study report: one metrics row per
/// estimator and coordinate set, then rejection rates per group spec.
pub fn render_sim_table(report: &SimReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "study: n={} p={} a={} alpha={} replicates={} successes={} law={:?} seed={}",
        cfg.n,
        cfg.p,
        cfg.a,
        cfg.alpha,
        cfg.replicates,
        report.successes,
        cfg.error_law,
        cfg.seed,
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:<7} {:>9} {:>8} {:>7} {:>7} {:>7}",
        "method", "set", "Bias", "ASE", "CP99", "CP95", "CP90"
    );
    let mut metrics_row = |method: &str, set: &str, m: &crate::sim::SetMetrics| {
        let _ = writeln!(
            out,
            "{:<10} {:<7} {:>9.4} {:>8.4} {:>7.3} {:>7.3} {:>7.3}",
            method, set, m.bias, m.ase, m.cp99, m.cp95, m.cp90
        );
    };
    metrics_row("corrected", "signal", &report.estimator.signal);
    metrics_row("corrected", "null", &report.estimator.null);
    if let Some(oracle) = &report.oracle {
        metrics_row("oracle", "signal", &oracle.signal);
        metrics_row("oracle", "null", &oracle.null);
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "mean sigma_hat={:.4} mean selected={:.2} mean expanded={:.2} ordering fraction={:.3}",
        report.mean_sigma_hat, report.mean_selected, report.mean_expanded,
        report.ordering_fraction,
    );
    if !report.power.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<6} {:>8} {:>9} {:>13} {:>6}",
            "test", "size", "overlap", "reject@0.05", "runs"
        );
        for row in &report.power {
            let _ = writeln!(
                out,
                "{:<6} {:>8} {:>9} {:>13} {:>6}",
                "w1",
                row.size,
                row.overlap,
                fmt_opt_rate(row.w1_rate),
                row.w1_runs
            );
            let _ = writeln!(
                out,
                "{:<6} {:>8} {:>9} {:>13} {:>6}",
                "wbs",
                row.size,
                row.overlap,
                fmt_opt_rate(row.wbs_rate),
                row.wbs_runs
            );
        }
    }
    out
}

/// Aligned coefficient table for a fit report.
pub fn render_fit_table(report: &FitReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "fit: n={} p={} lambda={:.6} ({}) sigma_hat={:.6} selected={} expanded={}",
        report.n,
        report.p,
        report.lambda,
        report.lambda_rule,
        report.sigma_hat,
        report.selected.len(),
        report.expanded.len(),
    );
    let _ = writeln!(out, "intercept: {:.6}", report.intercept);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>7} {:>12} {:>12} {:>11} {:>12} {:>12}  {}",
        "column", "lasso", "estimate", "se", "lower", "upper", "flags"
    );
    for row in &report.coefficients {
        let mut flags = String::new();
        if row.expanded {
            flags.push('e');
        }
        if row.degenerate {
            flags.push('d');
        }
        let _ = writeln!(
            out,
            "{:>7} {:>12.6} {:>12.6} {:>11.6} {:>12.6} {:>12.6}  {}",
            row.column, row.lasso, row.estimate, row.se, row.lower, row.upper, flags
        );
    }
    out
}

/// Per-replicate CSV rows: header first, then one row per replicate in
/// index order. Failed replicates carry their message and empty metrics.
pub fn record_rows(cfg: &SimConfig, records: &[ReplicateRecord]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec![
        "replicate".to_string(),
        "status".to_string(),
        "message".to_string(),
        "lambda".to_string(),
        "sigma_hat".to_string(),
        "a_hat".to_string(),
        "a_tilde".to_string(),
        "min_var_expanded".to_string(),
        "max_var_complement".to_string(),
    ];
    for spec in &cfg.groups {
        header.push(format!("w1_p_g{}_o{}", spec.size, spec.overlap));
        header.push(format!("wbs_p_g{}_o{}", spec.size, spec.overlap));
    }

    let blank_metrics = 6 + 2 * cfg.groups.len();
    let mut rows = Vec::with_capacity(records.len());
    for record in records {
        let mut row = vec![record.replicate.to_string()];
        match &record.outcome {
            Ok(s) => {
                row.push("ok".into());
                row.push(String::new());
                row.push(fmt_f64(s.lambda));
                row.push(fmt_f64(s.sigma_hat));
                row.push(s.a_hat.to_string());
                row.push(s.a_tilde.to_string());
                row.push(fmt_f64(s.min_var_expanded));
                row.push(fmt_f64(s.max_var_complement));
                for outcome in &s.groups {
                    row.push(outcome.w1_p.map(fmt_f64).unwrap_or_default());
                    row.push(outcome.wbs_p.map(fmt_f64).unwrap_or_default());
                }
            }
            Err(message) => {
                row.push("failed".into());
                row.push(message.clone());
                row.extend(std::iter::repeat(String::new()).take(blank_metrics));
            }
        }
        rows.push(row);
    }
    (header, rows)
}
