//! Model expansion: grow the selected set into a larger index set whose
//! complement is very unlikely to contain signal, by combining the
//! selection at a sizing penalty, the main selection, and randomly
//! injected coordinates drawn from the zero set of a conservative
//! screening fit. Also chooses the two ridge scalars attached to the
//! expanded block and its complement.
//!
//! Penalty formulas live on the unit-variance scale, where a standardized
//! column has squared norm n; divide by √n to fit on the unit-norm scale.

use crate::error::{Error, Result};
use crate::linalg::{power_rho_max, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Default multiplier for the sizing penalty.
pub const DEFAULT_SIZING_CONSTANT: f64 = 8.0;

/// Conservative screening penalty √(2 ln p)/n on the unit-variance scale.
/// Coordinates left at zero by a fit at this penalty form the injection
/// pool. Requires p ≥ 2.
pub fn screening_penalty(n: usize, p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::Invalid(format!("screening penalty needs p ≥ 2, got {p}")));
    }
    if n == 0 {
        return Err(Error::Invalid("screening penalty needs n ≥ 1".into()));
    }
    Ok((2.0 * (p as f64).ln()).sqrt() / n as f64)
}

/// Sizing penalty c·min{1/√(â·n), λ_screen} on the unit-variance scale,
/// controlling how large the expanded model becomes. An empty selection
/// (â = 0) falls back to c·λ_screen. The multiplier must lie in [4, 12].
pub fn sizing_penalty(n: usize, p: usize, a_hat: usize, c: f64) -> Result<f64> {
    if !(4.0..=12.0).contains(&c) {
        return Err(Error::Invalid(format!("sizing constant {c} outside [4, 12]")));
    }
    let screen = screening_penalty(n, p)?;
    let base = if a_hat == 0 {
        screen
    } else {
        (1.0 / ((a_hat * n) as f64).sqrt()).min(screen)
    };
    Ok(c * base)
}

/// Size of the expanded model: ⌊n(1 − λ_size/λ_max)⌋ clamped to
/// [1, min(n − 1, p)]. Both penalties must be on the same scale. Returns
/// the size and whether the sizing penalty was at or above λ_max (the
/// formula then degenerates and the size pins at 1).
pub fn expanded_size(n: usize, p: usize, lambda_size: f64, lambda_max: f64) -> Result<(usize, bool)> {
    if n < 2 {
        return Err(Error::Invalid(format!("expanded size needs n ≥ 2, got {n}")));
    }
    if p == 0 {
        return Err(Error::Invalid("expanded size needs p ≥ 1".into()));
    }
    if !(lambda_size > 0.0) || !(lambda_max > 0.0) {
        return Err(Error::Invalid(format!(
            "penalties must be positive, got sizing {lambda_size} and maximum {lambda_max}"
        )));
    }
    let cap = (n - 1).min(p);
    if lambda_size >= lambda_max {
        return Ok((1, true));
    }
    let raw = (n as f64 * (1.0 - lambda_size / lambda_max)).floor() as usize;
    Ok((raw.clamp(1, cap), false))
}

/// An expanded index set: the deterministic entrants (main selection,
/// sizing-penalty selection, and any shortfall fill), plus randomly
/// injected coordinates from the screening fit's zero set.
#[derive(Debug, Clone)]
pub struct ExpandedModel {
    /// The full expanded set, sorted ascending. Length `a_tilde`.
    pub indices: Vec<usize>,
    /// Deterministic part in path entry order (earliest entrant first).
    pub deterministic: Vec<usize>,
    /// Randomly injected coordinates, sorted ascending. Always disjoint
    /// from the screening selection.
    pub injected: Vec<usize>,
    /// Target (and achieved) size of the expanded set.
    pub a_tilde: usize,
    /// Seed the injection generator was built from.
    pub seed: u64,
    /// True when the deterministic entrants exceeded `a_tilde` and were
    /// truncated to the earliest entrants; the main selection is then not
    /// necessarily contained in the expanded set.
    pub truncated: bool,
    /// True when the injection pool fell short and deterministic fill by
    /// entry order completed the set.
    pub fallback_fill: bool,
}

/// Build the expanded model.
///
/// `entry_order` must be a permutation of 0..p ranking coordinates by
/// solution-path entry. The deterministic part is the union of
/// `main_active` and `size_active`, ordered by entry; if it exceeds
/// `a_tilde` it is truncated to the earliest entrants. Remaining slots are
/// filled by drawing uniformly without replacement from the coordinates
/// left at zero by the screening fit (excluding deterministic entrants),
/// using a generator seeded from `seed`. If that pool is too small, the
/// leftover slots are filled deterministically by entry order and the
/// result is flagged.
pub fn build_expanded_model(
    p: usize,
    entry_order: &[usize],
    main_active: &[usize],
    size_active: &[usize],
    screen_active: &[usize],
    a_tilde: usize,
    seed: u64,
) -> Result<ExpandedModel> {
    if a_tilde == 0 || a_tilde > p {
        return Err(Error::Invalid(format!("expanded size {a_tilde} outside 1..={p}")));
    }
    if entry_order.len() != p {
        return Err(Error::Dimension(format!(
            "entry order has {} entries, expected {p}",
            entry_order.len()
        )));
    }
    let mut entry_rank = vec![usize::MAX; p];
    for (rank, &j) in entry_order.iter().enumerate() {
        if j >= p || entry_rank[j] != usize::MAX {
            return Err(Error::Invalid("entry order is not a permutation".into()));
        }
        entry_rank[j] = rank;
    }
    for set in [main_active, size_active, screen_active] {
        if set.iter().any(|&j| j >= p) {
            return Err(Error::Invalid("active index out of range".into()));
        }
    }

    let mut in_det = vec![false; p];
    for &j in main_active.iter().chain(size_active.iter()) {
        in_det[j] = true;
    }
    let mut deterministic: Vec<usize> = (0..p).filter(|&j| in_det[j]).collect();
    deterministic.sort_by_key(|&j| entry_rank[j]);

    let truncated = deterministic.len() > a_tilde;
    if truncated {
        deterministic.truncate(a_tilde);
        in_det = vec![false; p];
        for &j in &deterministic {
            in_det[j] = true;
        }
    }

    let mut in_screen = vec![false; p];
    for &j in screen_active {
        in_screen[j] = true;
    }

    let need = a_tilde - deterministic.len();
    let mut pool: Vec<usize> = (0..p).filter(|&j| !in_screen[j] && !in_det[j]).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let take = need.min(pool.len());
    // Partial Fisher-Yates: the first `take` slots become a uniform
    // without-replacement sample.
    for k in 0..take {
        let swap_with = k + rng.gen_range(0..pool.len() - k);
        pool.swap(k, swap_with);
    }
    let mut injected: Vec<usize> = pool[..take].to_vec();
    injected.sort_unstable();

    let mut fallback_fill = false;
    if take < need {
        // Pool exhausted: complete by entry order from whatever remains.
        fallback_fill = true;
        let mut chosen = vec![false; p];
        for &j in deterministic.iter().chain(injected.iter()) {
            chosen[j] = true;
        }
        let mut leftover = need - take;
        for &j in entry_order {
            if leftover == 0 {
                break;
            }
            if !chosen[j] {
                chosen[j] = true;
                deterministic.push(j);
                leftover -= 1;
            }
        }
        debug_assert_eq!(leftover, 0);
    }

    let mut indices: Vec<usize> = deterministic.iter().chain(injected.iter()).copied().collect();
    indices.sort_unstable();
    if indices.windows(2).any(|w| w[0] == w[1]) || indices.len() != a_tilde {
        return Err(Error::Internal("expanded set construction lost coordinates".into()));
    }
    Ok(ExpandedModel {
        indices,
        deterministic,
        injected,
        a_tilde,
        seed,
        truncated,
        fallback_fill,
    })
}

/// Ridge scalars for the expanded block and its complement, on the
/// unit-norm fitting scale.
#[derive(Debug, Clone, Copy)]
pub struct TauSelection {
    /// Expanded-block ridge: 1e-8·√(ln p)/n stated on the unit-variance
    /// scale, hence divided by a further n here; tiny because that block
    /// is well conditioned on its own.
    pub tau_a: f64,
    /// Complement-block ridge: 1e-4·√(ρ_max(S_aa)·ρ_max(S_cc)), the
    /// geometric mean of the two block spectral radii. Evaluating the
    /// radii on the fitting-scale blocks lands the product on the right
    /// scale by itself.
    pub tau_c: f64,
    /// True when a block spectrum vanished and the complement ridge fell
    /// back to the bare 1e-4 factor (scaled like the radii it replaces).
    pub degenerate: bool,
}

/// Choose the ridge scalars from the design and the expanded index set.
/// Both come out on the unit-norm fitting scale: a ridge stated for the
/// unit-variance convention maps to the fitting scale by division by n,
/// exactly as the Gram matrix does.
pub fn select_tau(x: &Mat, expanded: &[usize]) -> Result<TauSelection> {
    let n = x.rows();
    let p = x.cols();
    if p < 2 {
        return Err(Error::Invalid(format!("ridge selection needs p ≥ 2, got {p}")));
    }
    if n == 0 {
        return Err(Error::Invalid("ridge selection needs n ≥ 1".into()));
    }
    if expanded.is_empty() {
        return Err(Error::Invalid("expanded index set is empty".into()));
    }
    let mut sorted = expanded.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) || *sorted.last().unwrap() >= p {
        return Err(Error::Invalid("expanded index set has duplicates or out-of-range indices".into()));
    }
    let tau_a = 1e-8 * (p as f64).ln().sqrt() / (n as f64).powi(2);

    let in_set = {
        let mut m = vec![false; p];
        for &j in &sorted {
            m[j] = true;
        }
        m
    };
    let complement: Vec<usize> = (0..p).filter(|&j| !in_set[j]).collect();
    let rho_a = gram_rho_max(x, &sorted);
    let rho_c = gram_rho_max(x, &complement);
    let (tau_c, degenerate) = if rho_a > 0.0 && rho_c > 0.0 {
        (1e-4 * (rho_a * rho_c).sqrt(), false)
    } else {
        (1e-4 / n as f64, true)
    };
    Ok(TauSelection { tau_a, tau_c, degenerate })
}

/// Largest eigenvalue of (1/n)X_subᵀX_sub by power iteration on the
/// implicit operator, never forming the Gram matrix.
fn gram_rho_max(x: &Mat, indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let sub = x.select_cols(indices);
    let inv_n = 1.0 / x.rows() as f64;
    power_rho_max(indices.len(), |v| {
        let t = sub.matvec(v);
        let mut w = sub.tr_matvec(&t);
        w.iter_mut().for_each(|u| *u *= inv_n);
        w
    })
}
