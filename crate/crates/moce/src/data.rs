//! Design standardization: centered response, centered unit-norm columns,
//! and the bookkeeping needed to map fitted coefficients back to the raw
//! input scale.
//!
//! All model fitting happens on the standardized design, where each kept
//! column has mean zero and unit Euclidean norm, so the Gram matrix
//! S = (1/n)XᵀX has constant diagonal 1/n. A raw-scale slope is the
//! standardized slope divided by the original centered column norm.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// A standardized regression problem plus the scale information removed
/// from the raw inputs.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Mat,
    y: Vec<f64>,
    y_mean: f64,
    col_means: Vec<f64>,
    col_norms: Vec<f64>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
}

impl Dataset {
    /// Center and scale a raw design and response. Constant columns carry no
    /// slope information and are dropped (their original indices are
    /// recorded). Fails when fewer than two rows, no informative columns, or
    /// any non-finite entry are supplied.
    pub fn standardize(x_raw: &Mat, y_raw: &[f64]) -> Result<Self> {
        let n = x_raw.rows();
        let p_raw = x_raw.cols();
        if n < 2 {
            return Err(Error::Invalid(format!("need at least two observations, got {n}")));
        }
        if y_raw.len() != n {
            return Err(Error::Dimension(format!(
                "response length {} does not match {} design rows",
                y_raw.len(),
                n
            )));
        }
        if p_raw == 0 {
            return Err(Error::Invalid("design has no columns".into()));
        }
        if !x_raw.has_only_finite() {
            return Err(Error::Invalid("design matrix has non-finite entries".into()));
        }
        if !y_raw.iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("response has non-finite entries".into()));
        }

        let y_mean = y_raw.iter().sum::<f64>() / n as f64;
        let y: Vec<f64> = y_raw.iter().map(|&v| v - y_mean).collect();

        let mut kept = Vec::with_capacity(p_raw);
        let mut dropped = Vec::new();
        let mut col_means = Vec::new();
        let mut col_norms = Vec::new();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..p_raw {
            let raw = x_raw.col(j);
            let mean = raw.iter().sum::<f64>() / n as f64;
            let mut c: Vec<f64> = raw.iter().map(|&v| v - mean).collect();
            // Second centering pass soaks up rounding in the first.
            let drift = c.iter().sum::<f64>() / n as f64;
            c.iter_mut().for_each(|v| *v -= drift);
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm <= 1e-12 * scale * (n as f64).sqrt() || scale == 0.0 {
                dropped.push(j);
                continue;
            }
            c.iter_mut().for_each(|v| *v /= norm);
            kept.push(j);
            col_means.push(mean + drift);
            col_norms.push(norm);
            cols.push(c);
        }
        if kept.is_empty() {
            return Err(Error::Degenerate("every design column is constant".into()));
        }
        let p = kept.len();
        let mut x = Mat::zeros(n, p);
        for (k, c) in cols.into_iter().enumerate() {
            x.col_mut(k).copy_from_slice(&c);
        }
        Ok(Dataset { x, y, y_mean, col_means, col_norms, kept, dropped })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    /// Number of kept (informative) columns.
    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Standardized design: centered, unit-norm columns.
    pub fn x(&self) -> &Mat {
        &self.x
    }

    /// Centered response.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Mean removed from the raw response.
    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    /// Euclidean norms of the centered raw columns, by kept position.
    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    /// Means of the raw columns, by kept position.
    pub fn col_means(&self) -> &[f64] {
        &self.col_means
    }

    /// Original column indices of the kept columns, in order.
    pub fn kept_indices(&self) -> &[usize] {
        &self.kept
    }

    /// Original column indices of the dropped constant columns.
    pub fn dropped_indices(&self) -> &[usize] {
        &self.dropped
    }

    /// Raw-scale slope for kept position `j` given its standardized slope.
    pub fn slope_to_raw(&self, j: usize, b_standardized: f64) -> f64 {
        b_standardized / self.col_norms[j]
    }

    /// Raw-scale standard error for kept position `j` (same scaling as the
    /// slope itself).
    pub fn se_to_raw(&self, j: usize, se_standardized: f64) -> f64 {
        se_standardized / self.col_norms[j]
    }

    /// Intercept on the raw scale implied by standardized slopes.
    pub fn intercept_raw(&self, b_standardized: &[f64]) -> f64 {
        assert_eq!(b_standardized.len(), self.p());
        let mut intercept = self.y_mean;
        for j in 0..self.p() {
            intercept -= self.slope_to_raw(j, b_standardized[j]) * self.col_means[j];
        }
        intercept
    }
}

/// Euclidean norms of the centered columns of a raw design (no scaling of
/// the matrix itself). Used when a response must be synthesized on the
/// standardized scale before the full standardization runs.
pub fn centered_col_norms(x_raw: &Mat) -> Vec<f64> {
    let n = x_raw.rows();
    (0..x_raw.cols())
        .map(|j| {
            let c = x_raw.col(j);
            let mean = c.iter().sum::<f64>() / n as f64;
            c.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>().sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Mat, Vec<f64>) {
        let x = Mat::from_rows(&[
            vec![1.0, 2.0, 7.0],
            vec![2.0, 2.0, 5.0],
            vec![3.0, 2.0, 1.0],
            vec![4.0, 2.0, 3.0],
        ])
        .unwrap();
        let y = vec![1.0, 3.0, 2.0, 6.0];
        (x, y)
    }

    #[test]
    fn standardize_centers_and_normalizes() {
        let (x, y) = toy();
        let ds = Dataset::standardize(&x, &y).unwrap();
        assert_eq!(ds.p(), 2);
        assert_eq!(ds.kept_indices(), &[0, 2]);
        assert_eq!(ds.dropped_indices(), &[1]);
        for j in 0..ds.p() {
            let c = ds.x().col(j);
            let mean: f64 = c.iter().sum::<f64>() / 4.0;
            let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(mean.abs() <= 1e-10, "column {j} mean {mean}");
            assert!((norm - 1.0).abs() <= 1e-10, "column {j} norm {norm}");
        }
        let ym: f64 = ds.y().iter().sum::<f64>() / 4.0;
        assert!(ym.abs() <= 1e-12);
        assert!((ds.y_mean() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn raw_scale_roundtrip() {
        let (x, y) = toy();
        let ds = Dataset::standardize(&x, &y).unwrap();
        // A standardized slope of norm_j on column j is a raw slope of 1.
        let norm0 = ds.col_norms()[0];
        assert!((ds.slope_to_raw(0, norm0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, y) = toy();
        assert!(Dataset::standardize(&x, &y[..3]).is_err());
        let mut x_bad = x.clone();
        x_bad.set(0, 0, f64::NAN);
        assert!(Dataset::standardize(&x_bad, &y).is_err());
        let all_const = Mat::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        assert!(Dataset::standardize(&all_const, &[1.0, 2.0, 3.0]).is_err());
    }
}
