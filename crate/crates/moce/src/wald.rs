//! Group hypothesis tests on the corrected estimator: a chi-square Wald
//! statistic for groups small relative to n, and a trace-normalized
//! statistic whose null distribution stays standard normal even when the
//! group size grows proportionally with n.
//!
//! With Σ̂ = L⁻¹SL⁻ᵀ the noise-free covariance operator and G the tested
//! group (null hypothesis: β_G = 0),
//!
//! ```text
//! W₁  = (n/σ̂²) β̃_Gᵀ Σ̂_GG⁻¹ β̃_G                     ~ χ²_g
//! Wbs = (n‖β̃_G‖² − σ̂² tr Σ̂_GG) / (σ̂² √(2 tr Σ̂_GG²)) → N(0, 1)
//! ```
//!
//! Both share the g×g covariance block, assembled column by column from
//! the operator and symmetrized.

use crate::debias::MoceFit;
use crate::dist::{chi_square_sf, norm_sf};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigenvalues, Cholesky, SymMat};

/// Condition-number ceiling for inverting the group covariance block.
const MAX_CONDITION: f64 = 1e12;

/// Which statistic a group test used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    /// Chi-square Wald test on the inverted covariance block.
    ChiSquare,
    /// Trace-normalized statistic with a standard normal null limit.
    TraceNormalized,
}

/// Result of a group test of β_G = 0.
#[derive(Debug, Clone)]
pub struct GroupTest {
    pub kind: TestKind,
    /// The test statistic.
    pub statistic: f64,
    /// Primary p-value: upper chi-square tail for the chi-square test,
    /// one-sided upper normal tail for the trace-normalized test.
    pub p_value: f64,
    /// Two-sided normal p-value, reported as a diagnostic by the
    /// trace-normalized test only.
    pub p_value_two_sided: Option<f64>,
    /// Degrees of freedom (chi-square test only).
    pub df: Option<usize>,
    /// Group-size ratio g/n (trace-normalized test only).
    pub gamma: Option<f64>,
    /// Group size.
    pub group_size: usize,
}

fn validate_group(fit: &MoceFit, group: &[usize]) -> Result<Vec<usize>> {
    if group.is_empty() {
        return Err(Error::Invalid("empty test group".into()));
    }
    let mut g = group.to_vec();
    g.sort_unstable();
    if g.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Invalid("duplicate index in test group".into()));
    }
    if *g.last().unwrap() >= fit.p() {
        return Err(Error::Invalid(format!(
            "group index {} out of range for p = {}",
            g.last().unwrap(),
            fit.p()
        )));
    }
    Ok(g)
}

/// The g×g block of the covariance operator on the group, symmetrized.
fn group_covariance(fit: &MoceFit, group: &[usize]) -> SymMat {
    let g = group.len();
    let mut block = SymMat::zeros(g);
    let mut raw = vec![0.0; g * g];
    for (b, &j) in group.iter().enumerate() {
        let col = fit.covariance_column(j);
        for (a, &i) in group.iter().enumerate() {
            raw[b * g + a] = col[i];
        }
    }
    // The operator is symmetric in exact arithmetic; average out rounding.
    for b in 0..g {
        for a in 0..=b {
            let v = 0.5 * (raw[b * g + a] + raw[a * g + b]);
            block.set_sym(a, b, v);
        }
    }
    block
}

fn check_sigma(fit: &MoceFit) -> Result<f64> {
    let s = fit.sigma_hat;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Degenerate(format!(
            "residual scale estimate {s} cannot calibrate a test"
        )));
    }
    Ok(s)
}

/// Chi-square Wald test of β_G = 0. Requires the group smaller than n and
/// a well-conditioned covariance block; an ill-conditioned block is an
/// error that names the trace-normalized test as the fallback.
pub fn wald_chi_square(fit: &MoceFit, group: &[usize]) -> Result<GroupTest> {
    let group = validate_group(fit, group)?;
    let g = group.len();
    let n = fit.n();
    if g >= n {
        return Err(Error::Invalid(format!(
            "chi-square group test needs group size {g} below n = {n}; use the trace-normalized test"
        )));
    }
    let sigma = check_sigma(fit)?;
    let cov = group_covariance(fit, &group);
    let ev = jacobi_eigenvalues(&cov);
    let lambda_min = ev[0];
    let lambda_max = *ev.last().unwrap();
    if lambda_min <= 0.0 || lambda_max / lambda_min > MAX_CONDITION {
        let cond = if lambda_min > 0.0 { lambda_max / lambda_min } else { f64::INFINITY };
        return Err(Error::SingularGroupCov { cond });
    }
    let chol = Cholesky::new(&cov)?;
    let beta_g: Vec<f64> = group.iter().map(|&j| fit.beta_tilde[j]).collect();
    let solved = chol.solve(&beta_g);
    let quad: f64 = beta_g.iter().zip(solved.iter()).map(|(&b, &s)| b * s).sum();
    let statistic = ((n as f64) / (sigma * sigma) * quad).max(0.0);
    let p_value = chi_square_sf(statistic, g as f64)?;
    Ok(GroupTest {
        kind: TestKind::ChiSquare,
        statistic,
        p_value,
        p_value_two_sided: None,
        df: Some(g),
        gamma: None,
        group_size: g,
    })
}

/// Trace-normalized test of β_G = 0, rejecting for large positive values.
pub fn wald_trace_normalized(fit: &MoceFit, group: &[usize]) -> Result<GroupTest> {
    let group = validate_group(fit, group)?;
    let g = group.len();
    let n = fit.n() as f64;
    let sigma = check_sigma(fit)?;
    let cov = group_covariance(fit, &group);
    let trace: f64 = (0..g).map(|i| cov.get(i, i)).sum();
    // tr(M²) = ‖M‖_F² for symmetric M.
    let trace_sq = cov.frobenius().powi(2);
    if !(trace_sq > 0.0) {
        return Err(Error::Degenerate(
            "group covariance block has zero trace; the group carries no variance".into(),
        ));
    }
    let beta_sq: f64 = group.iter().map(|&j| fit.beta_tilde[j] * fit.beta_tilde[j]).sum();
    let statistic = (n * beta_sq - sigma * sigma * trace) / (sigma * sigma * (2.0 * trace_sq).sqrt());
    let p_value = norm_sf(statistic);
    let p_two = 2.0 * norm_sf(statistic.abs());
    Ok(GroupTest {
        kind: TestKind::TraceNormalized,
        statistic,
        p_value,
        p_value_two_sided: Some(p_two.min(1.0)),
        df: None,
        gamma: Some(g as f64 / n),
        group_size: g,
    })
}
