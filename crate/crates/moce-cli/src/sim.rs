//! Monte Carlo study of the estimation pipeline.
//!
//! Each replicate draws a design whose columns carry first-order
//! autoregressive correlation, plants a sparse coefficient vector with
//! uniform signal sizes, selects the lasso penalty by ten-fold cross
//! validation, runs the full contraction-expansion fit, and scores
//! coverage, bias, spread, and group-test decisions against the known
//! truth. Replicate r draws from generator stream r of the base seed, so
//! the aggregated report is identical for any worker count.

use std::time::Instant;

use moce::data::{centered_col_norms, Dataset};
use moce::debias::{moce_fit, MoceOptions};
use moce::dist::{norm_quantile, sample_std_normal, uniform_open01};
use moce::expand::DEFAULT_SIZING_CONSTANT;
use moce::lasso::{cross_validate, default_lambda_grid, lambda_max};
use moce::linalg::{Cholesky, Mat};
use moce::wald::{wald_chi_square, wald_trace_normalized};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Penalty grid length for cross validation.
pub const GRID_LEN: usize = 100;
/// Cross-validation folds.
pub const CV_FOLDS: usize = 10;
/// Significance level for group-test rejection rates.
pub const TEST_LEVEL: f64 = 0.05;

/// Noise law for the simulated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorLaw {
    /// Gaussian noise at scale σ.
    Gaussian,
    /// Student t with five degrees of freedom, scaled to variance σ².
    T5,
}

/// One group test configuration: group size and overlap with the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupSpec {
    pub size: usize,
    pub overlap: usize,
}

/// Full study configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    /// Observations per replicate.
    pub n: usize,
    /// Design columns.
    pub p: usize,
    /// Planted support size.
    pub a: usize,
    /// First-order autoregressive correlation of the design columns.
    pub alpha: f64,
    /// Number of replicates.
    pub replicates: usize,
    /// Base seed; replicate r uses generator stream r.
    pub seed: u64,
    /// Sizing-penalty multiplier, between 4 and 12.
    pub sizing_constant: f64,
    /// Noise law; the scale is always σ = 2√(a/n).
    pub error_law: ErrorLaw,
    /// Calibrate intervals and tests with the true σ instead of σ̂.
    pub true_sigma: bool,
    /// Also fit least squares on the true support as a reference.
    pub oracle: bool,
    /// Group tests evaluated each replicate.
    pub groups: Vec<GroupSpec>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 200,
            p: 200,
            a: 3,
            alpha: 0.0,
            replicates: 200,
            seed: 0,
            sizing_constant: DEFAULT_SIZING_CONSTANT,
            error_law: ErrorLaw::Gaussian,
            true_sigma: false,
            oracle: true,
            groups: Vec::new(),
        }
    }
}

impl SimConfig {
    /// Noise scale σ = 2√(a/n).
    pub fn sigma(&self) -> f64 {
        2.0 * (self.a as f64 / self.n as f64).sqrt()
    }

    /// Check every cross-field constraint.
    pub fn validate(&self) -> Result<()> {
        if self.n < CV_FOLDS {
            return Err(CliError::Input(format!(
                "ten-fold cross validation needs at least {CV_FOLDS} observations, got {}",
                self.n
            )));
        }
        if self.p < 2 {
            return Err(CliError::Input(format!("need at least two columns, got {}", self.p)));
        }
        if self.a == 0 || self.a >= self.p {
            return Err(CliError::Input(format!(
                "support size {} must lie in 1..{}",
                self.a, self.p
            )));
        }
        if self.a >= self.n {
            return Err(CliError::Input(format!(
                "support size {} must be below n = {}",
                self.a, self.n
            )));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(CliError::Input(format!(
                "autoregressive correlation {} outside [0, 1)",
                self.alpha
            )));
        }
        if self.replicates == 0 {
            return Err(CliError::Input("need at least one replicate".into()));
        }
        if !(4.0..=12.0).contains(&self.sizing_constant) {
            return Err(CliError::Input(format!(
                "sizing constant {} outside [4, 12]",
                self.sizing_constant
            )));
        }
        for g in &self.groups {
            if g.size == 0 {
                return Err(CliError::Input("empty test group in configuration".into()));
            }
            if g.overlap > g.size.min(self.a) {
                return Err(CliError::Input(format!(
                    "group overlap {} exceeds min(group size {}, support size {})",
                    g.overlap, g.size, self.a
                )));
            }
            if g.size - g.overlap > self.p - self.a {
                return Err(CliError::Input(format!(
                    "group needs {} null coordinates but only {} exist",
                    g.size - g.overlap,
                    self.p - self.a
                )));
            }
        }
        Ok(())
    }
}

/// One generated problem instance.
pub struct Instance {
    pub ds: Dataset,
    /// Truth on the unit-variance scale, full length p.
    pub beta_star: Vec<f64>,
    /// Sorted support indices.
    pub support: Vec<usize>,
}

/// Generator for one replicate: the base seed keys the cipher and the
/// replicate index selects a disjoint stream.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Uniform index in 0..k.
fn draw_index(rng: &mut ChaCha20Rng, k: usize) -> usize {
    debug_assert!(k > 0);
    ((uniform_open01(rng) * k as f64) as usize).min(k - 1)
}

/// First `take` elements of a seeded partial shuffle of `pool`.
fn draw_without_replacement(rng: &mut ChaCha20Rng, pool: &mut [usize], take: usize) -> Vec<usize> {
    debug_assert!(take <= pool.len());
    for i in 0..take {
        let j = i + draw_index(rng, pool.len() - i);
        pool.swap(i, j);
    }
    pool[..take].to_vec()
}

/// Variance-one Student draw: t(5)·√(3/5), with t(5) = z/√(w/5), w ~ χ²₅.
fn scaled_t5(rng: &mut ChaCha20Rng) -> f64 {
    let z = sample_std_normal(rng);
    let w: f64 = (0..5)
        .map(|_| {
            let u = sample_std_normal(rng);
            u * u
        })
        .sum();
    z / (w / 5.0).sqrt() * (3.0f64 / 5.0).sqrt()
}

/// Draw one replicate's data.
///
/// Design rows are independent N(0, 0.5·R(α)) vectors with R(α)_{jk} =
/// α^|j−k|, realized by the stationary recursion v₁ = z₁,
/// v_j = α·v_{j−1} + √(1−α²)·z_j. The support is a uniform size-a subset,
/// signal sizes are i.i.d. U(0.05, 0.6) on the unit-variance scale, and
/// the noise has scale σ = 2√(a/n). The response is assembled so that the
/// standardized problem's truth is exactly √n·β* in fitting coordinates.
pub fn generate_dataset(cfg: &SimConfig, rng: &mut ChaCha20Rng) -> Result<Instance> {
    let (n, p, a) = (cfg.n, cfg.p, cfg.a);
    let alpha = cfg.alpha;
    let innovation = (1.0 - alpha * alpha).sqrt();
    let scale = 0.5f64.sqrt();
    let mut x = Mat::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z = sample_std_normal(rng);
            let v = if j == 0 { z } else { alpha * prev + innovation * z };
            x.set(i, j, scale * v);
            prev = v;
        }
    }

    let mut pool: Vec<usize> = (0..p).collect();
    let mut support = draw_without_replacement(rng, &mut pool, a);
    support.sort_unstable();
    let mut beta_star = vec![0.0; p];
    for &j in &support {
        beta_star[j] = 0.05 + 0.55 * uniform_open01(rng);
    }

    let sigma = cfg.sigma();
    let mut y: Vec<f64> = match cfg.error_law {
        ErrorLaw::Gaussian => (0..n).map(|_| sigma * sample_std_normal(rng)).collect(),
        ErrorLaw::T5 => (0..n).map(|_| sigma * scaled_t5(rng)).collect(),
    };

    // The raw slope on column j is β*_j·√n/‖x_j − x̄_j‖, so standardizing
    // the design maps the truth to exactly √n·β*.
    let norms = centered_col_norms(&x);
    let sqrt_n = (n as f64).sqrt();
    for &j in &support {
        if norms[j] <= 0.0 {
            return Err(CliError::Numerical(format!("simulated column {j} is constant")));
        }
        let slope = beta_star[j] * sqrt_n / norms[j];
        let col = x.col(j);
        for i in 0..n {
            y[i] += slope * col[i];
        }
    }

    let ds = Dataset::standardize(&x, &y)?;
    if ds.p() != p {
        return Err(CliError::Numerical("simulated design dropped a constant column".into()));
    }
    Ok(Instance { ds, beta_star, support })
}

/// Outcome of one group test within a replicate.
#[derive(Debug, Clone)]
pub struct GroupOutcome {
    pub spec: GroupSpec,
    /// Chi-square p-value, when that test ran.
    pub w1_p: Option<f64>,
    /// One-sided p-value of the trace-normalized test, when it ran.
    pub wbs_p: Option<f64>,
    /// Failure messages for tests that could not run.
    pub w1_error: Option<String>,
    pub wbs_error: Option<String>,
}

/// Reference least squares on the true support.
#[derive(Debug, Clone)]
pub struct OracleRecord {
    /// Estimates on the support, unit-variance scale.
    pub estimate: Vec<f64>,
    /// Classical standard errors on the support, unit-variance scale.
    pub se: Vec<f64>,
}

/// Everything recorded from one successful replicate.
#[derive(Debug, Clone)]
pub struct ReplicateSuccess {
    /// Sorted support indices.
    pub support: Vec<usize>,
    /// Truth on the unit-variance scale, full length p.
    pub beta_star: Vec<f64>,
    /// Corrected estimates on the unit-variance scale.
    pub estimate: Vec<f64>,
    /// Standard errors on the unit-variance scale.
    pub se: Vec<f64>,
    /// Selected penalty on the unit-variance scale.
    pub lambda: f64,
    /// Residual scale calibrating the intervals and tests.
    pub sigma_hat: f64,
    /// Lasso active-set size.
    pub a_hat: usize,
    /// Expanded model size.
    pub a_tilde: usize,
    /// Smallest sandwich variance over the expanded set.
    pub min_var_expanded: f64,
    /// Largest sandwich variance over the complement.
    pub max_var_complement: f64,
    /// Group-test outcomes, one per configured spec.
    pub groups: Vec<GroupOutcome>,
    /// Reference fit on the true support, when enabled.
    pub oracle: Option<OracleRecord>,
    /// Wall time of this replicate; reported only in the manifest.
    pub seconds: f64,
}

/// Outcome of one replicate: success or a recorded failure message.
#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub outcome: std::result::Result<ReplicateSuccess, String>,
}

/// Run one full replicate: generate, cross validate, fit, test.
///
/// The draw order from the replicate stream is fixed: design, support,
/// signals, noise, fold shuffle, expansion seed, group draws. Estimation
/// failures are recorded in the outcome, not propagated.
pub fn run_replication(cfg: &SimConfig, replicate: usize) -> ReplicateRecord {
    let started = Instant::now();
    let mut rng = replicate_rng(cfg.seed, replicate);
    let outcome = run_replication_inner(cfg, &mut rng)
        .map(|mut s| {
            s.seconds = started.elapsed().as_secs_f64();
            s
        })
        .map_err(|e| e.to_string());
    ReplicateRecord { replicate, outcome }
}

fn run_replication_inner(cfg: &SimConfig, rng: &mut ChaCha20Rng) -> Result<ReplicateSuccess> {
    let instance = generate_dataset(cfg, rng)?;
    let ds = &instance.ds;
    let p = ds.p();
    let sqrt_n = (ds.n() as f64).sqrt();

    let grid = default_lambda_grid(lambda_max(ds.x(), ds.y()), GRID_LEN);
    let cv = cross_validate(ds.x(), ds.y(), &grid, CV_FOLDS, rng)?;
    let expansion_seed = rng.next_u64();
    let opts = MoceOptions { sizing_constant: cfg.sizing_constant, ..MoceOptions::default() };
    let fit = moce_fit(ds, cv.lambda, &opts, expansion_seed)?;
    let fit = if cfg.true_sigma { fit.with_noise_scale(cfg.sigma())? } else { fit };

    let mut in_expanded = vec![false; p];
    for &j in fit.factor().expanded_indices() {
        in_expanded[j] = true;
    }
    let mut min_var_expanded = f64::INFINITY;
    let mut max_var_complement = 0.0f64;
    for (j, &v) in fit.variance_diag.iter().enumerate() {
        if in_expanded[j] {
            min_var_expanded = min_var_expanded.min(v);
        } else {
            max_var_complement = max_var_complement.max(v);
        }
    }

    let complement: Vec<usize> = (0..p).filter(|j| !instance.support.contains(j)).collect();
    let mut groups = Vec::with_capacity(cfg.groups.len());
    for &spec in &cfg.groups {
        let mut support_pool = instance.support.clone();
        let mut complement_pool = complement.clone();
        let mut group = draw_without_replacement(rng, &mut support_pool, spec.overlap);
        group.extend(draw_without_replacement(
            rng,
            &mut complement_pool,
            spec.size - spec.overlap,
        ));
        group.sort_unstable();
        let (w1_p, w1_error) = match wald_chi_square(&fit, &group) {
            Ok(t) => (Some(t.p_value), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let (wbs_p, wbs_error) = match wald_trace_normalized(&fit, &group) {
            Ok(t) => (Some(t.p_value), None),
            Err(e) => (None, Some(e.to_string())),
        };
        groups.push(GroupOutcome { spec, w1_p, wbs_p, w1_error, wbs_error });
    }

    let oracle = if cfg.oracle { Some(oracle_record(&instance)?) } else { None };

    Ok(ReplicateSuccess {
        estimate: fit.beta_tilde.iter().map(|b| b / sqrt_n).collect(),
        se: fit.se.iter().map(|s| s / sqrt_n).collect(),
        support: instance.support,
        beta_star: instance.beta_star,
        lambda: cv.lambda * sqrt_n,
        sigma_hat: fit.sigma_hat,
        a_hat: fit.lasso.a_hat,
        a_tilde: fit.expanded.a_tilde,
        min_var_expanded,
        max_var_complement,
        groups,
        oracle,
        seconds: 0.0,
    })
}

/// Least squares on the true support with classical standard errors, on
/// the unit-variance scale.
pub fn oracle_record(instance: &Instance) -> Result<OracleRecord> {
    let ds = &instance.ds;
    let n = ds.n();
    let a = instance.support.len();
    if n <= a {
        return Err(CliError::Input(format!(
            "reference fit needs n > support size, got {n} <= {a}"
        )));
    }
    let xs = ds.x().select_cols(&instance.support);
    let gram = xs.gram(1.0);
    let chol = Cholesky::new(&gram)?;
    let xty = xs.tr_matvec(ds.y());
    let bhat = chol.solve(&xty);
    let fitted = xs.matvec(&bhat);
    let rss: f64 = ds.y().iter().zip(fitted.iter()).map(|(&y, &f)| (y - f) * (y - f)).sum();
    let s2 = rss / (n - a) as f64;
    let sqrt_n = (n as f64).sqrt();
    let mut estimate = Vec::with_capacity(a);
    let mut se = Vec::with_capacity(a);
    for k in 0..a {
        let mut unit = vec![0.0; a];
        unit[k] = 1.0;
        let inv_col = chol.solve(&unit);
        estimate.push(bhat[k] / sqrt_n);
        se.push((s2 * inv_col[k]).sqrt() / sqrt_n);
    }
    Ok(OracleRecord { estimate, se })
}

/// Metrics for one coordinate set, averaged over replicates then
/// coordinates: signed error mean, mean standard error, and coverage at
/// the 99/95/90 percent levels.
#[derive(Debug, Clone, Serialize)]
pub struct SetMetrics {
    pub bias: f64,
    pub ase: f64,
    pub cp99: f64,
    pub cp95: f64,
    pub cp90: f64,
}

/// Metrics over the signal set and the null set.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsPair {
    pub signal: SetMetrics,
    pub null: SetMetrics,
}

/// Rejection rates at level 0.05 for one group spec.
#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub size: usize,
    pub overlap: usize,
    /// Chi-square rejection rate over the replicates where it ran.
    pub w1_rate: Option<f64>,
    pub w1_runs: usize,
    /// Trace-normalized rejection rate over the replicates where it ran.
    pub wbs_rate: Option<f64>,
    pub wbs_runs: usize,
}

/// A recorded replicate failure.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub replicate: usize,
    pub message: String,
}

/// Deterministic study report.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub successes: usize,
    pub failures: Vec<Failure>,
    /// Corrected-estimator metrics.
    pub estimator: MetricsPair,
    /// Reference least squares on the true support, when enabled. Null
    /// coordinates are known zeros there: bias and spread are exactly zero
    /// and coverage is one.
    pub oracle: Option<MetricsPair>,
    pub mean_sigma_hat: f64,
    pub mean_selected: f64,
    pub mean_expanded: f64,
    /// Fraction of successful replicates where the smallest expanded-set
    /// sandwich variance is at least the largest complement variance.
    pub ordering_fraction: f64,
    pub power: Vec<PowerRow>,
}

struct SetAccumulator {
    bias: f64,
    ase: f64,
    cp99: f64,
    cp95: f64,
    cp90: f64,
    count: usize,
}

impl SetAccumulator {
    fn new() -> Self {
        SetAccumulator { bias: 0.0, ase: 0.0, cp99: 0.0, cp95: 0.0, cp90: 0.0, count: 0 }
    }

    fn add(&mut self, err: f64, se: f64, z: &[f64; 3]) {
        self.bias += err;
        self.ase += se;
        let abs = err.abs();
        if abs <= z[0] * se {
            self.cp99 += 1.0;
        }
        if abs <= z[1] * se {
            self.cp95 += 1.0;
        }
        if abs <= z[2] * se {
            self.cp90 += 1.0;
        }
        self.count += 1;
    }

    fn finish(self) -> SetMetrics {
        let c = self.count.max(1) as f64;
        SetMetrics {
            bias: self.bias / c,
            ase: self.ase / c,
            cp99: self.cp99 / c,
            cp95: self.cp95 / c,
            cp90: self.cp90 / c,
        }
    }
}

/// Aggregate replicate records into the study report. Rejects when no
/// replicate succeeded.
pub fn aggregate_metrics(cfg: &SimConfig, records: &[ReplicateRecord]) -> Result<SimReport> {
    let z = [norm_quantile(0.995)?, norm_quantile(0.975)?, norm_quantile(0.95)?];
    let mut failures = Vec::new();
    let mut successes: Vec<&ReplicateSuccess> = Vec::new();
    for r in records {
        match &r.outcome {
            Ok(s) => successes.push(s),
            Err(m) => failures.push(Failure { replicate: r.replicate, message: m.clone() }),
        }
    }
    if successes.is_empty() {
        let detail = failures
            .first()
            .map(|f| format!("; first failure (replicate {}): {}", f.replicate, f.message))
            .unwrap_or_default();
        return Err(CliError::Numerical(format!("no successful replicates{detail}")));
    }

    let mut signal = SetAccumulator::new();
    let mut null = SetAccumulator::new();
    let mut oracle_signal = SetAccumulator::new();
    let mut oracle_null = SetAccumulator::new();
    let mut have_oracle = false;
    let mut sigma_sum = 0.0;
    let mut selected_sum = 0.0;
    let mut expanded_sum = 0.0;
    let mut ordering_hits = 0usize;

    for s in &successes {
        let mut is_signal = vec![false; s.beta_star.len()];
        for &j in &s.support {
            is_signal[j] = true;
        }
        for j in 0..s.beta_star.len() {
            let err = s.estimate[j] - s.beta_star[j];
            if is_signal[j] {
                signal.add(err, s.se[j], &z);
            } else {
                null.add(err, s.se[j], &z);
            }
        }
        if let Some(o) = &s.oracle {
            have_oracle = true;
            for (k, &j) in s.support.iter().enumerate() {
                oracle_signal.add(o.estimate[k] - s.beta_star[j], o.se[k], &z);
            }
            // Null coordinates are known zeros in the reference fit.
            for _ in 0..s.beta_star.len() - s.support.len() {
                oracle_null.add(0.0, 0.0, &z);
            }
        }
        sigma_sum += s.sigma_hat;
        selected_sum += s.a_hat as f64;
        expanded_sum += s.a_tilde as f64;
        if s.min_var_expanded >= s.max_var_complement {
            ordering_hits += 1;
        }
    }

    let mut power = Vec::with_capacity(cfg.groups.len());
    for (k, &spec) in cfg.groups.iter().enumerate() {
        let mut w1_runs = 0usize;
        let mut w1_rejects = 0usize;
        let mut wbs_runs = 0usize;
        let mut wbs_rejects = 0usize;
        for s in &successes {
            let outcome = &s.groups[k];
            if let Some(p) = outcome.w1_p {
                w1_runs += 1;
                if p < TEST_LEVEL {
                    w1_rejects += 1;
                }
            }
            if let Some(p) = outcome.wbs_p {
                wbs_runs += 1;
                if p < TEST_LEVEL {
                    wbs_rejects += 1;
                }
            }
        }
        power.push(PowerRow {
            size: spec.size,
            overlap: spec.overlap,
            w1_rate: (w1_runs > 0).then(|| w1_rejects as f64 / w1_runs as f64),
            w1_runs,
            wbs_rate: (wbs_runs > 0).then(|| wbs_rejects as f64 / wbs_runs as f64),
            wbs_runs,
        });
    }

    let count = successes.len() as f64;
    Ok(SimReport {
        config: cfg.clone(),
        successes: successes.len(),
        failures,
        estimator: MetricsPair { signal: signal.finish(), null: null.finish() },
        oracle: have_oracle.then(|| MetricsPair {
            signal: oracle_signal.finish(),
            null: oracle_null.finish(),
        }),
        mean_sigma_hat: sigma_sum / count,
        mean_selected: selected_sum / count,
        mean_expanded: expanded_sum / count,
        ordering_fraction: ordering_hits as f64 / count,
        power,
    })
}

/// Run the full study on `jobs` worker threads. The report depends only on
/// the configuration, never on `jobs`.
pub fn run_simulation(cfg: &SimConfig, jobs: usize) -> Result<(SimReport, Vec<ReplicateRecord>)> {
    cfg.validate()?;
    if jobs == 0 {
        return Err(CliError::Input("worker count must be positive".into()));
    }
    let records: Vec<ReplicateRecord> = if jobs == 1 {
        (0..cfg.replicates).map(|r| run_replication(cfg, r)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..cfg.replicates).into_par_iter().map(|r| run_replication(cfg, r)).collect()
        })
    };
    let report = aggregate_metrics(cfg, &records)?;
    Ok((report, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_success(
        support: Vec<usize>,
        beta_star: Vec<f64>,
        estimate: Vec<f64>,
        se: Vec<f64>,
        groups: Vec<GroupOutcome>,
        ordering: (f64, f64),
    ) -> ReplicateSuccess {
        ReplicateSuccess {
            support,
            beta_star,
            estimate,
            se,
            lambda: 0.1,
            sigma_hat: 1.0,
            a_hat: 2,
            a_tilde: 4,
            min_var_expanded: ordering.0,
            max_var_complement: ordering.1,
            groups,
            oracle: None,
            seconds: 0.0,
        }
    }

    #[test]
    fn aggregation_matches_hand_computed_two_replicate_study() {
        let spec = GroupSpec { size: 2, overlap: 0 };
        let cfg = SimConfig {
            n: 10,
            p: 4,
            a: 1,
            replicates: 2,
            groups: vec![spec],
            ..SimConfig::default()
        };
        let rep0 = toy_success(
            vec![1],
            vec![0.0, 0.3, 0.0, 0.0],
            vec![0.01, 0.25, -0.02, 0.0],
            vec![0.02, 0.05, 0.01, 0.01],
            vec![GroupOutcome {
                spec,
                w1_p: Some(0.03),
                wbs_p: Some(0.2),
                w1_error: None,
                wbs_error: None,
            }],
            (2.0, 1.0),
        );
        let rep1 = toy_success(
            vec![0],
            vec![0.4, 0.0, 0.0, 0.0],
            vec![0.1, 0.0, 0.0, 0.0],
            vec![0.1, 0.01, 0.01, 0.01],
            vec![GroupOutcome {
                spec,
                w1_p: None,
                wbs_p: Some(0.04),
                w1_error: Some("skipped".into()),
                wbs_error: None,
            }],
            (1.0, 2.0),
        );
        let records = vec![
            ReplicateRecord { replicate: 0, outcome: Ok(rep0) },
            ReplicateRecord { replicate: 1, outcome: Ok(rep1) },
        ];
        let report = aggregate_metrics(&cfg, &records).unwrap();

        let tol = 1e-12;
        let sig = &report.estimator.signal;
        assert!((sig.bias - (-0.175)).abs() < tol);
        assert!((sig.ase - 0.075).abs() < tol);
        assert!((sig.cp99 - 0.5).abs() < tol);
        assert!((sig.cp95 - 0.5).abs() < tol);
        assert!((sig.cp90 - 0.5).abs() < tol);
        let null = &report.estimator.null;
        assert!((null.bias - (-0.01 / 6.0)).abs() < tol);
        assert!((null.ase - (0.02 + 0.01 + 0.01 + 0.03) / 6.0).abs() < tol);
        assert!((null.cp99 - 1.0).abs() < tol);
        assert!((null.cp95 - 5.0 / 6.0).abs() < tol);
        assert!((null.cp90 - 5.0 / 6.0).abs() < tol);

        assert_eq!(report.successes, 2);
        assert!(report.failures.is_empty());
        assert!((report.ordering_fraction - 0.5).abs() < tol);
        let row = &report.power[0];
        assert_eq!((row.w1_runs, row.wbs_runs), (1, 2));
        assert!((row.w1_rate.unwrap() - 1.0).abs() < tol);
        assert!((row.wbs_rate.unwrap() - 0.5).abs() < tol);
    }

    #[test]
    fn aggregation_rejects_when_every_replicate_failed() {
        let cfg = SimConfig::default();
        let records = vec![ReplicateRecord { replicate: 0, outcome: Err("boom".into()) }];
        let err = aggregate_metrics(&cfg, &records).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("boom"));
    }

    #[test]
    fn full_coverage_yields_unit_probability() {
        let cfg = SimConfig { n: 10, p: 3, a: 1, replicates: 1, ..SimConfig::default() };
        let rep = toy_success(
            vec![0],
            vec![0.5, 0.0, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.1, 0.1, 0.1],
            Vec::new(),
            (1.0, 0.5),
        );
        let records = vec![ReplicateRecord { replicate: 0, outcome: Ok(rep) }];
        let report = aggregate_metrics(&cfg, &records).unwrap();
        assert_eq!(report.estimator.signal.cp99, 1.0);
        assert_eq!(report.estimator.null.cp90, 1.0);
        assert_eq!(report.estimator.signal.bias, 0.0);
    }

    #[test]
    fn config_validation_names_the_offending_field() {
        let bad = SimConfig { a: 300, ..SimConfig::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("support size"));
        let bad = SimConfig { alpha: 1.0, ..SimConfig::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("correlation"));
        let bad = SimConfig {
            groups: vec![GroupSpec { size: 5, overlap: 4 }],
            ..SimConfig::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("overlap"));
        let bad = SimConfig { sizing_constant: 2.0, ..SimConfig::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("sizing"));
    }
}
