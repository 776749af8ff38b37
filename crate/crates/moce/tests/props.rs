//! Property tests of the structural invariants: standardization
//! post-conditions, expansion-set algebra, factor round trips and
//! linearity, penalty-size monotonicity, and distribution-function
//! coherence, all over randomized inputs.

mod common;

use common::{max_abs_diff, standardize_columns};
use moce::data::Dataset;
use moce::dist::{gamma_p, gamma_q, norm_cdf, norm_quantile};
use moce::expand::{build_expanded_model, expanded_size};
use moce::linalg::{Mat, RidgeBlockFactor};
use proptest::prelude::*;

fn small_matrix(n: usize, p: usize) -> impl Strategy<Value = Mat> {
    proptest::collection::vec(-5.0f64..5.0, n * p).prop_map(move |data| {
        Mat::from_fn(n, p, |i, j| data[j * n + i])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardize_postconditions(
        data in proptest::collection::vec(-10.0f64..10.0, 6 * 4),
        yraw in proptest::collection::vec(-10.0f64..10.0, 6),
    ) {
        let x = Mat::from_fn(6, 4, |i, j| data[j * 6 + i]);
        if let Ok(ds) = Dataset::standardize(&x, &yraw) {
            for j in 0..ds.p() {
                let col = ds.x().col(j);
                let mean: f64 = col.iter().sum::<f64>() / 6.0;
                let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(mean.abs() <= 1e-10);
                prop_assert!((norm - 1.0).abs() <= 1e-10);
            }
            let ym: f64 = ds.y().iter().sum::<f64>() / 6.0;
            prop_assert!(ym.abs() <= 1e-9);
            prop_assert_eq!(ds.p() + ds.dropped_indices().len(), 4);
            // Back-transform inverts the column scaling.
            for j in 0..ds.p() {
                let b = 0.7;
                let raw = ds.slope_to_raw(j, b);
                prop_assert!((raw * ds.col_norms()[j] - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expansion_set_algebra(
        p in 4usize..24,
        a_tilde_frac in 0.1f64..1.0,
        seed in any::<u64>(),
        mask_main in any::<u32>(),
        mask_size in any::<u32>(),
        mask_screen in any::<u32>(),
    ) {
        let a_tilde = ((p as f64 * a_tilde_frac) as usize).clamp(1, p);
        let entry_order: Vec<usize> = (0..p).collect();
        let pick = |mask: u32| -> Vec<usize> {
            (0..p).filter(|&j| mask >> (j % 32) & 1 == 1).collect()
        };
        let main = pick(mask_main);
        let size = pick(mask_size);
        let screen = pick(mask_screen);
        let m = build_expanded_model(p, &entry_order, &main, &size, &screen, a_tilde, seed).unwrap();

        prop_assert_eq!(m.indices.len(), a_tilde);
        prop_assert!(m.indices.windows(2).all(|w| w[0] < w[1]), "sorted unique");
        prop_assert!(m.indices.iter().all(|&j| j < p));
        // Injected stays off the screening selection.
        for &j in &m.injected {
            prop_assert!(!screen.contains(&j));
        }
        // Main selection is kept unless truncation happened.
        if !m.truncated {
            for &j in &main {
                prop_assert!(m.indices.contains(&j));
            }
        }
        // Partition property.
        let mut union: Vec<usize> = m.deterministic.iter().chain(m.injected.iter()).copied().collect();
        union.sort_unstable();
        prop_assert_eq!(union, m.indices.clone());
        // Same seed reproduces the same model.
        let m2 = build_expanded_model(p, &entry_order, &main, &size, &screen, a_tilde, seed).unwrap();
        prop_assert_eq!(m.indices, m2.indices);
    }

    #[test]
    fn expanded_size_monotone(
        n in 3usize..200,
        p in 1usize..300,
        lmax in 0.05f64..5.0,
        f1 in 0.01f64..2.0,
        f2 in 0.01f64..2.0,
    ) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let (size_small_lambda, _) = expanded_size(n, p, lo * lmax, lmax).unwrap();
        let (size_large_lambda, _) = expanded_size(n, p, hi * lmax, lmax).unwrap();
        prop_assert!(size_large_lambda <= size_small_lambda);
        prop_assert!(size_small_lambda <= (n - 1).min(p).max(1));
        prop_assert!(size_large_lambda >= 1);
    }

    #[test]
    fn factor_round_trip_and_linearity(
        x in small_matrix(9, 14),
        raw_expanded in proptest::collection::btree_set(0usize..14, 1..8),
        v in proptest::collection::vec(-3.0f64..3.0, 14),
        w in proptest::collection::vec(-3.0f64..3.0, 14),
        alpha in -2.0f64..2.0,
    ) {
        let xs = standardize_columns_checked(&x);
        prop_assume!(xs.is_some());
        let xs = xs.unwrap();
        let expanded: Vec<usize> = raw_expanded.into_iter().collect();
        let factor = RidgeBlockFactor::build(&xs, &expanded, 1e-5, 1e-3).unwrap();

        // Round trip.
        let back = factor.apply_l(&factor.apply_l_inv(&v));
        prop_assert!(max_abs_diff(&back, &v) < 1e-7);
        let back_t = factor.apply_l_inv(&factor.apply_l(&v));
        prop_assert!(max_abs_diff(&back_t, &v) < 1e-7);

        // Linearity of the inverse apply.
        let combo: Vec<f64> = v.iter().zip(&w).map(|(&a, &b)| alpha * a + b).collect();
        let lhs = factor.apply_l_inv(&combo);
        let rv = factor.apply_l_inv(&v);
        let rw = factor.apply_l_inv(&w);
        let rhs: Vec<f64> = rv.iter().zip(&rw).map(|(&a, &b)| alpha * a + b).collect();
        let scale = rhs.iter().fold(1.0f64, |m, &r| m.max(r.abs()));
        prop_assert!(max_abs_diff(&lhs, &rhs) / scale < 1e-9);

        // Split/merge is a permutation pair.
        let (va, vc) = factor.split(&v);
        prop_assert_eq!(factor.merge(&va, &vc), v.clone());
    }

    #[test]
    fn distribution_coherence(
        x in -6.0f64..6.0,
        pr in 1e-9f64..0.999999999,
        a in 0.2f64..80.0,
        g in 0.0f64..120.0,
    ) {
        // CDF is monotone and maps to (0,1).
        let c = norm_cdf(x);
        prop_assert!(c > 0.0 && c < 1.0);
        prop_assert!(norm_cdf(x + 0.01) >= c);
        // Quantile inverts the CDF.
        let q = norm_quantile(pr).unwrap();
        prop_assert!((norm_cdf(q) - pr).abs() < 1e-9);
        // Incomplete gamma halves sum to one.
        let p_half = gamma_p(a, g).unwrap();
        let q_half = gamma_q(a, g).unwrap();
        prop_assert!((p_half + q_half - 1.0).abs() < 1e-11);
        prop_assert!((0.0..=1.0).contains(&p_half));
    }
}

/// Standardize columns, rejecting inputs with a constant column instead of
/// panicking, so `prop_assume` can discard them.
fn standardize_columns_checked(x: &Mat) -> Option<Mat> {
    let n = x.rows();
    for j in 0..x.cols() {
        let col = x.col(j);
        let mean: f64 = col.iter().sum::<f64>() / n as f64;
        let norm: f64 = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return None;
        }
    }
    Some(standardize_columns(x))
}
