//! Command line front end: fit a CSV dataset, test a group hypothesis
//! against a saved fit, or run a Monte Carlo study.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 for numerical
//! failures inside the estimation pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use moce::data::Dataset;
use moce::debias::{moce_fit, MoceFit, MoceOptions};
use moce::expand::DEFAULT_SIZING_CONSTANT;
use moce::lasso::{cross_validate, default_lambda_grid, lambda_max};
use moce::wald::{wald_chi_square, wald_trace_normalized, GroupTest, TestKind};

use moce_cli::config::parse_sim_config;
use moce_cli::error::{CliError, Result};
use moce_cli::report::{
    file_digest, hex_sha256, render_fit_table, render_sim_table, write_json, CoefficientRow,
    FileDigest, FitReport, RunManifest, SimManifest, SimReportFile, TestReport, TestResult,
    SCHEMA_VERSION,
};
use moce_cli::{io, sim};

#[derive(Parser)]
#[command(
    name = "moce",
    version,
    about = "Post-selection inference for high-dimensional linear models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the corrected estimator to a CSV dataset and write a report.
    Fit(FitArgs),
    /// Test a group null hypothesis against a saved fit report.
    Test(TestArgs),
    /// Run a Monte Carlo study from a configuration file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Design matrix CSV (n rows, p columns).
    #[arg(long, value_name = "FILE")]
    x: PathBuf,
    /// Response CSV (n rows, one column).
    #[arg(long, value_name = "FILE")]
    y: PathBuf,
    /// Inputs carry a header row.
    #[arg(long)]
    header: bool,
    /// Fixed penalty on the unit-variance scale; cross validated if absent.
    #[arg(long)]
    lambda: Option<f64>,
    /// Cross-validation folds.
    #[arg(long, default_value_t = sim::CV_FOLDS, conflicts_with = "lambda")]
    cv_folds: usize,
    /// Penalty grid length for cross validation.
    #[arg(long, default_value_t = sim::GRID_LEN, conflicts_with = "lambda")]
    grid_len: usize,
    /// Sizing-penalty multiplier, between 4 and 12.
    #[arg(long, visible_alias = "C", default_value_t = DEFAULT_SIZING_CONSTANT)]
    sizing_constant: f64,
    /// Confidence level for the reported intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Seed for cross-validation folds and the expansion's random fill.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the expanded-block ridge level (fitting scale).
    #[arg(long)]
    tau_a: Option<f64>,
    /// Override the complement-block ridge level (fitting scale).
    #[arg(long)]
    tau_c: Option<f64>,
    /// Output report path (JSON).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also print an aligned coefficient table.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct TestArgs {
    /// Fit report produced by `moce fit`.
    #[arg(long, value_name = "FILE")]
    fit: PathBuf,
    /// Design matrix CSV used for the fit.
    #[arg(long, value_name = "FILE")]
    x: PathBuf,
    /// Response CSV used for the fit.
    #[arg(long, value_name = "FILE")]
    y: PathBuf,
    /// Inputs carry a header row.
    #[arg(long)]
    header: bool,
    /// Comma-separated 1-based columns forming the tested group.
    #[arg(long, value_name = "I,J,...")]
    group: String,
    /// Which statistic to compute.
    #[arg(long, value_enum, default_value_t = KindArg::Both)]
    kind: KindArg,
    /// Confidence level; tests reject at significance 1 - level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Output report path (JSON).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum KindArg {
    /// Chi-square statistic.
    W1,
    /// Trace-normalized statistic.
    Wbs,
    /// Both statistics.
    Both,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study configuration file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the configured replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads; the report does not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for report.json, report.txt, records.csv, manifest.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Test(args) => cmd_test(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Map a fitting-scale index to the 1-based input column.
fn to_input_column(ds: &Dataset, j: usize) -> usize {
    ds.kept_indices()[j] + 1
}

fn load_dataset(x_path: &Path, y_path: &Path, header: bool) -> Result<(Dataset, Vec<FileDigest>)> {
    let digests = vec![file_digest(x_path)?, file_digest(y_path)?];
    let x = io::read_matrix(x_path, header)?;
    let y = io::read_vector(y_path, header)?;
    if y.len() != x.rows() {
        return Err(CliError::Input(format!(
            "{} has {} rows but {} has {}",
            x_path.display(),
            x.rows(),
            y_path.display(),
            y.len()
        )));
    }
    let ds = Dataset::standardize(&x, &y)?;
    Ok((ds, digests))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    if args.lambda.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
        return Err(CliError::Input(format!(
            "penalty {} must be positive and finite",
            args.lambda.unwrap()
        )));
    }
    let (ds, digests) = load_dataset(&args.x, &args.y, args.header)?;
    let sqrt_n = (ds.n() as f64).sqrt();

    // Fold shuffles and the expansion fill draw from one seeded stream, in
    // that order, so a fixed seed reproduces the report byte for byte.
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let lmax = lambda_max(ds.x(), ds.y());
    let (lambda_internal, lambda_rule, cv_folds) = if let Some(l) = args.lambda {
        (l / sqrt_n, "fixed", None)
    } else if lmax <= 0.0 {
        // A constant response carries no slope signal at any penalty.
        (1.0, "degenerate-response", None)
    } else {
        let grid = default_lambda_grid(lmax, args.grid_len.max(2));
        let cv = cross_validate(ds.x(), ds.y(), &grid, args.cv_folds, &mut rng)?;
        (cv.lambda, "cv", Some(args.cv_folds))
    };
    let expansion_seed = rng.next_u64();

    let opts = MoceOptions {
        sizing_constant: args.sizing_constant,
        tau_a: args.tau_a,
        tau_c: args.tau_c,
    };
    let fit = moce_fit(&ds, lambda_internal, &opts, expansion_seed)?;
    let report = build_fit_report(args, &ds, &fit, lambda_internal, lambda_rule, cv_folds, digests)?;
    write_json(&args.out, &report)?;
    if args.table {
        print!("{}", render_fit_table(&report));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_fit_report(
    args: &FitArgs,
    ds: &Dataset,
    fit: &MoceFit,
    lambda_internal: f64,
    lambda_rule: &str,
    cv_folds: Option<usize>,
    inputs: Vec<FileDigest>,
) -> Result<FitReport> {
    let sqrt_n = (ds.n() as f64).sqrt();
    let intervals = fit.confidence_intervals(args.level)?;
    let mut in_expanded = vec![false; ds.p()];
    for &j in &fit.expanded.indices {
        in_expanded[j] = true;
    }
    let coefficients = (0..ds.p())
        .map(|j| CoefficientRow {
            column: to_input_column(ds, j),
            lasso: ds.slope_to_raw(j, fit.lasso.beta[j]),
            estimate: ds.slope_to_raw(j, fit.beta_tilde[j]),
            se: ds.se_to_raw(j, fit.se[j]),
            lower: ds.slope_to_raw(j, intervals[j].lower),
            upper: ds.slope_to_raw(j, intervals[j].upper),
            expanded: in_expanded[j],
            degenerate: intervals[j].degenerate,
        })
        .collect();
    let map_set =
        |set: &[usize]| -> Vec<usize> { set.iter().map(|&j| to_input_column(ds, j)).collect() };
    Ok(FitReport {
        schema_version: SCHEMA_VERSION,
        manifest: RunManifest {
            command: "fit".into(),
            config_sha256: None,
            inputs,
            seed: args.seed,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        n: ds.n(),
        p: ds.p() + ds.dropped_indices().len(),
        dropped_columns: ds.dropped_indices().iter().map(|&j| j + 1).collect(),
        lambda: lambda_internal * sqrt_n,
        lambda_rule: lambda_rule.into(),
        cv_folds,
        sizing_constant: args.sizing_constant,
        seed: args.seed,
        level: args.level,
        tau_a: fit.tau.tau_a,
        tau_c: fit.tau.tau_c,
        tau_a_override: args.tau_a,
        tau_c_override: args.tau_c,
        sigma_hat: fit.sigma_hat,
        sigma_degenerate: fit.lasso.sigma_degenerate,
        selected: map_set(&fit.lasso.active_set),
        expanded: map_set(&fit.expanded.indices),
        injected: map_set(&fit.expanded.injected),
        intercept: ds.intercept_raw(&fit.beta_tilde),
        coefficients,
    })
}

fn parse_group(text: &str, p: usize) -> Result<Vec<usize>> {
    let mut group = Vec::new();
    for piece in text.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let column: usize = piece
            .parse()
            .map_err(|_| CliError::Input(format!("cannot parse group index {piece:?}")))?;
        if column == 0 || column > p {
            return Err(CliError::Input(format!("group column {column} outside 1..={p}")));
        }
        group.push(column);
    }
    if group.is_empty() {
        return Err(CliError::Input("empty test group".into()));
    }
    Ok(group)
}

fn test_result(test: GroupTest, level: f64) -> TestResult {
    TestResult {
        kind: match test.kind {
            TestKind::ChiSquare => "chi-square".into(),
            TestKind::TraceNormalized => "trace-normalized".into(),
        },
        statistic: test.statistic,
        p_value: test.p_value,
        p_value_two_sided: test.p_value_two_sided,
        df: test.df,
        gamma: test.gamma,
        reject: test.p_value < 1.0 - level,
    }
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let report_bytes = std::fs::read(&args.fit)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.fit.display())))?;
    let fit_report: FitReport = serde_json::from_slice(&report_bytes)
        .map_err(|e| CliError::Input(format!("{}: not a fit report: {e}", args.fit.display())))?;
    if fit_report.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "{}: schema version {} (expected {})",
            args.fit.display(),
            fit_report.schema_version,
            SCHEMA_VERSION
        )));
    }

    let (ds, digests) = load_dataset(&args.x, &args.y, args.header)?;
    for (given, recorded) in digests.iter().zip(fit_report.manifest.inputs.iter()) {
        if given.sha256 != recorded.sha256 {
            return Err(CliError::Input(format!(
                "{} does not match the fit report's input {} (digest {} != {})",
                given.name, recorded.name, given.sha256, recorded.sha256
            )));
        }
    }

    // Rebuild the recorded fit exactly: same penalty, options, and seed.
    let sqrt_n = (ds.n() as f64).sqrt();
    let opts = MoceOptions {
        sizing_constant: fit_report.sizing_constant,
        tau_a: fit_report.tau_a_override,
        tau_c: fit_report.tau_c_override,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(fit_report.seed);
    if fit_report.lambda_rule == "cv" {
        // Replay the fold draws so the expansion seed matches the fit run.
        let grid = default_lambda_grid(lambda_max(ds.x(), ds.y()), sim::GRID_LEN.max(2));
        let folds = fit_report.cv_folds.unwrap_or(sim::CV_FOLDS);
        cross_validate(ds.x(), ds.y(), &grid, folds, &mut rng)?;
    }
    let expansion_seed = rng.next_u64();
    let fit = moce_fit(&ds, fit_report.lambda / sqrt_n, &opts, expansion_seed)?;

    // Map requested 1-based input columns onto fitting-scale indices.
    let requested = parse_group(&args.group, fit_report.p)?;
    let mut kept_position = vec![None; fit_report.p];
    for (pos, &original) in ds.kept_indices().iter().enumerate() {
        kept_position[original] = Some(pos);
    }
    let mut group = Vec::with_capacity(requested.len());
    for &column in &requested {
        match kept_position[column - 1] {
            Some(pos) => group.push(pos),
            None => {
                return Err(CliError::Input(format!(
                    "group column {column} was constant and dropped from the fit"
                )))
            }
        }
    }

    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Input(format!("confidence level {} outside (0, 1)", args.level)));
    }
    let mut results = Vec::new();
    if matches!(args.kind, KindArg::W1 | KindArg::Both) {
        results.push(test_result(wald_chi_square(&fit, &group)?, args.level));
    }
    if matches!(args.kind, KindArg::Wbs | KindArg::Both) {
        results.push(test_result(wald_trace_normalized(&fit, &group)?, args.level));
    }

    let report = TestReport {
        schema_version: SCHEMA_VERSION,
        manifest: RunManifest {
            command: "test".into(),
            config_sha256: None,
            inputs: vec![
                FileDigest { name: "fit-report".into(), sha256: hex_sha256(&report_bytes) },
                digests[0].clone(),
                digests[1].clone(),
            ],
            seed: fit_report.seed,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        group: requested,
        level: args.level,
        results,
    };
    write_json(&args.out, &report)?;
    for r in &report.results {
        println!(
            "{}: statistic={:.6} p={:.6}{}",
            r.kind,
            r.statistic,
            r.p_value,
            if r.reject { " reject" } else { "" }
        );
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let config_text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_sim_config(&config_text)?;
    if let Some(replicates) = args.replicates {
        cfg.replicates = replicates;
        cfg.validate()?;
    }
    let config_sha256 = hex_sha256(config_text.as_bytes());

    let (report, records) = sim::run_simulation(&cfg, args.jobs)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let manifest = RunManifest {
        command: "simulate".into(),
        config_sha256: Some(config_sha256.clone()),
        inputs: Vec::new(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let report_path = args.out_dir.join("report.json");
    let table_path = args.out_dir.join("report.txt");
    let records_path = args.out_dir.join("records.csv");
    let manifest_path = args.out_dir.join("manifest.json");

    let table = render_sim_table(&report);
    let file = SimReportFile { schema_version: SCHEMA_VERSION, manifest: manifest.clone(), study: report };
    write_json(&report_path, &file)?;
    std::fs::write(&table_path, &table)?;
    let comments = vec![
        format!("command: simulate"),
        format!("config sha256: {config_sha256}"),
        format!("seed: {}", cfg.seed),
        format!("schema version: {SCHEMA_VERSION}"),
    ];
    let (header, rows) = moce_cli::report::record_rows(&cfg, &records);
    io::write_records(&records_path, &comments, &header, &rows)?;

    let successes: Vec<f64> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|s| s.seconds))
        .collect();
    let mean_replicate_seconds = if successes.is_empty() {
        0.0
    } else {
        successes.iter().sum::<f64>() / successes.len() as f64
    };
    let sim_manifest = SimManifest {
        manifest,
        jobs: args.jobs,
        total_seconds: started.elapsed().as_secs_f64(),
        mean_replicate_seconds,
        artifacts: vec![
            file_digest(&report_path)?,
            file_digest(&table_path)?,
            file_digest(&records_path)?,
        ],
    };
    write_json(&manifest_path, &sim_manifest)?;
    print!("{table}");
    Ok(())
}
