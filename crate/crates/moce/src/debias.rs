//! The contraction-expansion estimator: correct the lasso's shrinkage by a
//! one-step update through the block lower-triangular ridge approximation
//! of the Gram matrix,
//!
//! ```text
//! β̃ = β̂ + λ L⁻¹ κ,
//! ```
//!
//! where κ is the fitted penalty subgradient. The same update is also
//! computed blockwise,
//!
//! ```text
//! β̃_a = β̂_a + λ A⁻¹ κ_a
//! β̃_c = β̂_c + λ C⁻¹ κ_c − λ C⁻¹ G A⁻¹ κ_a,
//! ```
//!
//! and the two routes are required to agree to 1e-10; a disagreement means
//! the factorization is broken and is reported as an internal error, never
//! papered over. Coordinate variances come from the sandwich diagonal
//! [L⁻¹ S L⁻ᵀ]_jj evaluated column by column, so no p×p matrix is formed.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::expand::{
    build_expanded_model, expanded_size, screening_penalty, select_tau, sizing_penalty,
    ExpandedModel, TauSelection, DEFAULT_SIZING_CONSTANT,
};
use crate::lasso::{entry_order_to_floor, fit_lasso, fit_lasso_selection, lambda_max, LassoFit};
use crate::linalg::{dot, norm2, RidgeBlockFactor};

/// Agreement required between the combined and blockwise update routes.
const ROUTE_TOL: f64 = 1e-10;

/// Tuning knobs for the full estimation pipeline.
#[derive(Debug, Clone, Copy)]
pub struct MoceOptions {
    /// Multiplier for the sizing penalty, in [4, 12].
    pub sizing_constant: f64,
    /// Expanded-block ridge level; data-driven when `None`.
    pub tau_a: Option<f64>,
    /// Complement-block ridge level; data-driven when `None`.
    pub tau_c: Option<f64>,
}

impl Default for MoceOptions {
    fn default() -> Self {
        MoceOptions { sizing_constant: DEFAULT_SIZING_CONSTANT, tau_a: None, tau_c: None }
    }
}

/// A fitted contraction-expansion estimator.
#[derive(Debug, Clone)]
pub struct MoceFit {
    /// The lasso fit the correction starts from.
    pub lasso: LassoFit,
    /// Expanded index set and its construction record.
    pub expanded: ExpandedModel,
    /// Ridge scalars attached to the two blocks.
    pub tau: TauSelection,
    /// Corrected coefficients on the standardized scale, length p.
    pub beta_tilde: Vec<f64>,
    /// Sandwich variance diagonal [L⁻¹ S L⁻ᵀ]_jj (noise-free), length p.
    pub variance_diag: Vec<f64>,
    /// Standard errors σ̂·√(variance_diag/n) on the standardized scale.
    pub se: Vec<f64>,
    /// Residual standard deviation carried over from the lasso fit.
    pub sigma_hat: f64,
    /// Screening penalty on the unit-norm (fitting) scale.
    pub lambda_screen: f64,
    /// Sizing penalty on the unit-norm (fitting) scale.
    pub lambda_size: f64,
    /// Smallest all-zero penalty of the design/response pair.
    pub lambda_max: f64,
    /// Selection size of the screening fit.
    pub a_hat_screen: usize,
    /// Selection size of the sizing fit.
    pub a_hat_size: usize,
    /// Active set of the screening fit (injection exclusion zone).
    pub screen_active: Vec<usize>,
    /// Active set of the sizing fit.
    pub size_active: Vec<usize>,
    /// True when the sizing penalty reached the all-zero penalty and the
    /// expanded size pinned at its minimum.
    pub size_pinned: bool,
    factor: RidgeBlockFactor,
}

/// One coordinate's confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    /// True when the coordinate variance vanished and the interval
    /// degenerates to a point.
    pub degenerate: bool,
}

/// A unit-norm linear contrast of coefficients.
#[derive(Debug, Clone)]
pub struct Contrast {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl Contrast {
    /// Build a contrast from distinct coordinate indices and weights with
    /// unit Euclidean norm (to 1e-10).
    pub fn new(indices: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if indices.is_empty() || indices.len() != weights.len() {
            return Err(Error::Invalid("contrast needs matching, nonempty indices and weights".into()));
        }
        let mut seen = indices.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("contrast indices must be distinct".into()));
        }
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::Invalid("contrast weights must be finite".into()));
        }
        let norm = norm2(&weights);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!(
                "contrast weight norm {norm} must be 1 to within 1e-10"
            )));
        }
        Ok(Contrast { indices, weights })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A contrast estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct ContrastEstimate {
    pub estimate: f64,
    pub se: f64,
}

/// Run the full pipeline on a standardized problem: lasso at `lambda`,
/// screening and sizing fits, expanded-model construction (randomness
/// seeded from `seed`), ridge-scalar selection, the corrected estimator by
/// both routes, and all coordinate variances.
pub fn moce_fit(ds: &Dataset, lambda: f64, opts: &MoceOptions, seed: u64) -> Result<MoceFit> {
    let x = ds.x();
    let y = ds.y();
    let n = ds.n();
    let p = ds.p();
    let sqrt_n = (n as f64).sqrt();

    let main = fit_lasso(x, y, lambda)?;
    let lmax = lambda_max(x, y);

    // Penalty formulas are stated on the unit-variance scale; the fits run
    // on the unit-norm scale, one factor of √n below.
    let screen_internal = screening_penalty(n, p)? / sqrt_n;
    let size_internal = sizing_penalty(n, p, main.a_hat, opts.sizing_constant)? / sqrt_n;
    // Only the selected sets of these two fits feed the expansion, so they
    // run without subgradient certification; the deep screening penalty can
    // sit in near-interpolation territory where certifying is infeasible.
    let screen_fit = fit_lasso_selection(x, y, screen_internal, None)?;
    let size_fit = fit_lasso_selection(x, y, size_internal, None)?;

    // Activation ranks only break truncation ties among coordinates active
    // at one of the three penalties above, so the path walk can stop there.
    let rank_floor = lambda.min(screen_internal).min(size_internal);
    let entry_order = entry_order_to_floor(x, y, 100, rank_floor)?;

    let (a_tilde, size_pinned) = expanded_size(n, p, size_internal, lmax)?;
    let expanded = build_expanded_model(
        p,
        &entry_order,
        &main.active_set,
        &size_fit.active_set,
        &screen_fit.active_set,
        a_tilde,
        seed,
    )?;
    let mut tau = select_tau(x, &expanded.indices)?;
    for (name, slot, value) in
        [("tau_a", &mut tau.tau_a, opts.tau_a), ("tau_c", &mut tau.tau_c, opts.tau_c)]
    {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} override {v} must be positive")));
            }
            *slot = v;
        }
    }
    let factor = RidgeBlockFactor::build(x, &expanded.indices, tau.tau_a, tau.tau_c)?;

    let beta_tilde = corrected_estimate(&factor, &main)?;
    let sigma_hat = main.sigma_hat;
    let (variance_diag, se) = sandwich_diagonal(&factor, sigma_hat);

    Ok(MoceFit {
        lasso: main,
        expanded,
        tau,
        beta_tilde,
        variance_diag,
        se,
        sigma_hat,
        lambda_screen: screen_internal,
        lambda_size: size_internal,
        lambda_max: lmax,
        a_hat_screen: screen_fit.a_hat,
        a_hat_size: size_fit.a_hat,
        screen_active: screen_fit.active_set,
        size_active: size_fit.active_set,
        size_pinned,
        factor,
    })
}

impl MoceFit {
    /// Number of observations.
    pub fn n(&self) -> usize {
        self.factor.n()
    }

    /// Number of coordinates.
    pub fn p(&self) -> usize {
        self.factor.p()
    }

    /// The block factor (for tests and diagnostics).
    pub fn factor(&self) -> &RidgeBlockFactor {
        &self.factor
    }

    /// Two-sided confidence intervals at the given level for every
    /// coordinate, on the standardized scale.
    pub fn confidence_intervals(&self, level: f64) -> Result<Vec<Interval>> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Invalid(format!("confidence level {level} outside (0, 1)")));
        }
        let z = crate::dist::norm_quantile(0.5 + level / 2.0)?;
        Ok(self
            .beta_tilde
            .iter()
            .zip(self.se.iter())
            .map(|(&b, &s)| {
                if s > 0.0 {
                    Interval { lower: b - z * s, upper: b + z * s, degenerate: false }
                } else {
                    Interval { lower: b, upper: b, degenerate: true }
                }
            })
            .collect())
    }

    /// Replace the residual scale with a known value, rescaling the
    /// standard errors derived from it. Intervals and group tests computed
    /// from the returned fit are calibrated by `sigma` instead of the
    /// residual estimate.
    pub fn with_noise_scale(mut self, sigma: f64) -> Result<MoceFit> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Invalid(format!("noise scale {sigma} must be positive")));
        }
        let n = self.n() as f64;
        self.sigma_hat = sigma;
        for (s, &d) in self.se.iter_mut().zip(self.variance_diag.iter()) {
            *s = sigma * (d / n).sqrt();
        }
        Ok(self)
    }

    /// One column of the noise-free covariance operator L⁻¹ S L⁻ᵀ.
    pub fn covariance_column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.p());
        let mut e = vec![0.0; self.p()];
        e[j] = 1.0;
        let v = self.factor.apply_l_inv_t(&e);
        let xv = self.factor.design_matvec(&v);
        let mut sv = self.factor.design_tr_matvec(&xv);
        let inv_n = 1.0 / self.n() as f64;
        sv.iter_mut().for_each(|u| *u *= inv_n);
        self.factor.apply_l_inv(&sv)
    }

    /// Estimate and standard error of a unit-norm contrast. The contrast
    /// support may not exceed ⌊n/2⌋ coordinates.
    pub fn linear_contrast(&self, contrast: &Contrast) -> Result<ContrastEstimate> {
        let cap = self.n() / 2;
        if contrast.indices.len() > cap {
            return Err(Error::Invalid(format!(
                "contrast support {} exceeds the cap ⌊n/2⌋ = {cap}",
                contrast.indices.len()
            )));
        }
        if contrast.indices.iter().any(|&j| j >= self.p()) {
            return Err(Error::Invalid("contrast index out of range".into()));
        }
        let mut d = vec![0.0; self.p()];
        let mut est = 0.0;
        for (&j, &w) in contrast.indices.iter().zip(contrast.weights.iter()) {
            d[j] = w;
            est += w * self.beta_tilde[j];
        }
        // dᵀ L⁻¹ S L⁻ᵀ d = ‖X L⁻ᵀ d‖²/n.
        let v = self.factor.apply_l_inv_t(&d);
        let xv = self.factor.design_matvec(&v);
        let quad = dot(&xv, &xv) / self.n() as f64;
        let se = self.sigma_hat * (quad / self.n() as f64).sqrt();
        Ok(ContrastEstimate { estimate: est, se })
    }

    /// The leftover term of the corrected estimator around a known truth
    /// (standardized scale): what the estimator error would be with the
    /// noise stripped out. Returned in original coordinate order.
    pub fn remainder(&self, beta_star: &[f64]) -> Result<Vec<f64>> {
        if beta_star.len() != self.p() {
            return Err(Error::Dimension("truth length does not match fit".into()));
        }
        let diff: Vec<f64> =
            self.lasso.beta.iter().zip(beta_star.iter()).map(|(&b, &t)| b - t).collect();
        let (diff_a, diff_c) = self.factor.split(&diff);
        // Expanded block: A⁻¹[τ_a (β̂_a − β*_a) − S_ac (β̂_c − β*_c)], the
        // unique vector making β̃_a − β*_a equal the block noise term plus
        // the remainder.
        let cross = self.factor.apply_g_t(&diff_c);
        let mut rhs_a: Vec<f64> = diff_a.iter().map(|&d| d * self.tau.tau_a).collect();
        for (r, c) in rhs_a.iter_mut().zip(cross.iter()) {
            *r -= c;
        }
        let r_a = self.factor.apply_a_inv(&rhs_a);
        // Complement block: C⁻¹[τ_c (β̂_c − β*_c) − G r_a].
        let g_ra = self.factor.apply_g(&r_a);
        let rhs_c: Vec<f64> = diff_c
            .iter()
            .zip(g_ra.iter())
            .map(|(&d, &g)| d * self.tau.tau_c - g)
            .collect();
        let r_c = self.factor.apply_c_inv(&rhs_c);
        Ok(self.factor.merge(&r_a, &r_c))
    }
}

/// β̂ + λL⁻¹κ computed by the combined route and verified against the
/// blockwise route.
fn corrected_estimate(factor: &RidgeBlockFactor, fit: &LassoFit) -> Result<Vec<f64>> {
    let lambda = fit.lambda;
    let correction = factor.apply_l_inv(&fit.kappa);
    let combined: Vec<f64> = fit
        .beta
        .iter()
        .zip(correction.iter())
        .map(|(&b, &c)| b + lambda * c)
        .collect();

    // Blockwise route, assembled independently from the block solves.
    let (kappa_a, kappa_c) = factor.split(&fit.kappa);
    let (beta_a, beta_c) = factor.split(&fit.beta);
    let a_inv_kappa = factor.apply_a_inv(&kappa_a);
    let tilde_a: Vec<f64> = beta_a
        .iter()
        .zip(a_inv_kappa.iter())
        .map(|(&b, &k)| b + lambda * k)
        .collect();
    let c_inv_kappa = factor.apply_c_inv(&kappa_c);
    let g_a_inv = factor.apply_g(&a_inv_kappa);
    let c_inv_cross = factor.apply_c_inv(&g_a_inv);
    let tilde_c: Vec<f64> = beta_c
        .iter()
        .zip(c_inv_kappa.iter().zip(c_inv_cross.iter()))
        .map(|(&b, (&k, &x))| b + lambda * k - lambda * x)
        .collect();
    let blockwise = factor.merge(&tilde_a, &tilde_c);

    let max_diff = combined
        .iter()
        .zip(blockwise.iter())
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if max_diff > ROUTE_TOL {
        return Err(Error::Internal(format!(
            "combined and blockwise corrections disagree by {max_diff:.3e}"
        )));
    }
    Ok(combined)
}

/// All coordinate variances [L⁻¹ S L⁻ᵀ]_jj = ‖X L⁻ᵀ e_j‖²/n, plus the
/// standard errors σ̂·√(diag/n).
fn sandwich_diagonal(factor: &RidgeBlockFactor, sigma_hat: f64) -> (Vec<f64>, Vec<f64>) {
    let p = factor.p();
    let n = factor.n() as f64;
    let mut diag = vec![0.0; p];
    let mut e = vec![0.0; p];
    for j in 0..p {
        e[j] = 1.0;
        let v = factor.apply_l_inv_t(&e);
        e[j] = 0.0;
        let xv = factor.design_matvec(&v);
        diag[j] = dot(&xv, &xv) / n;
    }
    let se = diag.iter().map(|&d| sigma_hat * (d / n).sqrt()).collect();
    (diag, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn small_problem(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = Mat::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * x.get(i, 0) - 1.5 * x.get(i, 1) + 0.1 * rng.gen_range(-1.0..1.0))
            .collect();
        Dataset::standardize(&x, &y).unwrap()
    }

    #[test]
    fn pipeline_runs_and_reports_consistent_shapes() {
        let ds = small_problem(40, 10, 3);
        let lam = 0.3 * lambda_max(ds.x(), ds.y());
        let fit = moce_fit(&ds, lam, &MoceOptions::default(), 11).unwrap();
        assert_eq!(fit.beta_tilde.len(), 10);
        assert_eq!(fit.se.len(), 10);
        assert!(fit.se.iter().all(|&s| s >= 0.0));
        assert!(fit.expanded.a_tilde < 40);
        assert!(fit.tau.tau_a < fit.tau.tau_c);
        let cis = fit.confidence_intervals(0.95).unwrap();
        for (ci, (&b, &s)) in cis.iter().zip(fit.beta_tilde.iter().zip(fit.se.iter())) {
            assert!(ci.lower <= b && b <= ci.upper);
            if s > 0.0 {
                assert!(!ci.degenerate);
            }
        }
        assert!(fit.confidence_intervals(0.0).is_err());
        assert!(fit.confidence_intervals(1.0).is_err());
    }

    #[test]
    fn tiny_penalty_leaves_estimate_at_lasso() {
        // With p < n the problem is strongly determined; a vanishing
        // penalty makes the correction term λL⁻¹κ vanish too.
        let ds = small_problem(40, 6, 5);
        let lam = 1e-9;
        let fit = moce_fit(&ds, lam, &MoceOptions::default(), 7).unwrap();
        for j in 0..6 {
            assert!(
                (fit.beta_tilde[j] - fit.lasso.beta[j]).abs() < 1e-6,
                "coordinate {j} moved by more than the vanishing correction"
            );
        }
    }

    #[test]
    fn contrast_validation() {
        assert!(Contrast::new(vec![], vec![]).is_err());
        assert!(Contrast::new(vec![0, 0], vec![0.5, 0.5]).is_err());
        assert!(Contrast::new(vec![0, 1], vec![0.5, 0.5]).is_err());
        let c = Contrast::new(vec![0, 1], vec![std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap();
        assert_eq!(c.indices(), &[0, 1]);

        let ds = small_problem(20, 8, 9);
        let lam = 0.3 * lambda_max(ds.x(), ds.y());
        let fit = moce_fit(&ds, lam, &MoceOptions::default(), 1).unwrap();
        let est = fit.linear_contrast(&c).unwrap();
        assert!(est.se > 0.0);
        // Single-coordinate contrast reproduces the coordinate se.
        let single = Contrast::new(vec![2], vec![1.0]).unwrap();
        let est2 = fit.linear_contrast(&single).unwrap();
        assert!((est2.estimate - fit.beta_tilde[2]).abs() < 1e-12);
        assert!((est2.se - fit.se[2]).abs() < 1e-10 * fit.se[2].max(1e-12));
        // Support cap: ⌊20/2⌋ = 10 < 11.
        let wide: Vec<usize> = (0..11).collect();
        let w = 1.0 / (11f64).sqrt();
        let c_wide = Contrast::new(wide, vec![w; 11]);
        // Norm of 11 equal weights 1/√11 is exactly 1.
        let c_wide = c_wide.unwrap();
        assert!(fit.linear_contrast(&c_wide).is_err());
    }

    #[test]
    fn remainder_matches_direct_formula_dimensions() {
        let ds = small_problem(30, 12, 13);
        let lam = 0.3 * lambda_max(ds.x(), ds.y());
        let fit = moce_fit(&ds, lam, &MoceOptions::default(), 2).unwrap();
        let truth = vec![0.0; 12];
        let r = fit.remainder(&truth).unwrap();
        assert_eq!(r.len(), 12);
        assert!(fit.remainder(&truth[..5]).is_err());
    }
}
