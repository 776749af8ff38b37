//! Dense linear-algebra kernels: column-major matrices, SPD Cholesky
//! factorization, symmetric Jacobi eigenvalues, power iteration, and the
//! ridge-block factor applying the inverse of the block lower-triangular
//! matrix
//!
//! ```text
//! L = | S_aa + tau_a I      0           |
//!     | S_ca                S_cc + tau_c I |
//! ```
//!
//! without ever assembling a p×p inverse. Here S = (1/n) XᵀX and the blocks
//! are indexed by an expanded index set and its complement. The complement
//! block is inverted through an n-dimensional core:
//!
//! ```text
//! (S_cc + tau_c I)⁻¹ = (1/tau_c) [ I − X_cᵀ (n tau_c I_n + X_c X_cᵀ)⁻¹ X_c ]
//! ```
//!
//! so the build cost is O(n²(p−ã)) and each application costs O(n(p−ã)).

use crate::error::{Error, Result};

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    /// Build from row-major nested slices (convenience for tests and IO).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    /// Column j as a contiguous slice.
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// y = M v.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, self.col(j), &mut y);
            }
        }
        y
    }

    /// y = Mᵀ v.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    /// New matrix made of the given columns, in the given order.
    pub fn select_cols(&self, indices: &[usize]) -> Mat {
        let mut m = Mat::zeros(self.rows, indices.len());
        for (k, &j) in indices.iter().enumerate() {
            m.col_mut(k).copy_from_slice(self.col(j));
        }
        m
    }

    /// Scaled Gram matrix scale · MᵀM as a symmetric matrix.
    pub fn gram(&self, scale: f64) -> SymMat {
        let q = self.cols;
        let mut data = vec![0.0; q * q];
        for j in 0..q {
            let cj = self.col(j);
            for i in 0..=j {
                let v = scale * dot(self.col(i), cj);
                data[j * q + i] = v;
                data[i * q + j] = v;
            }
        }
        SymMat { order: q, data }
    }

    pub fn has_only_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense symmetric matrix (full storage, column-major).
#[derive(Debug, Clone)]
pub struct SymMat {
    order: usize,
    data: Vec<f64>,
}

impl SymMat {
    /// Wrap a full dense square matrix, verifying symmetry to 1e-12 relative.
    pub fn new(order: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != order * order {
            return Err(Error::Dimension(format!(
                "symmetric matrix of order {order} needs {} entries, got {}",
                order * order,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for j in 0..order {
            for i in 0..j {
                let a = data[j * order + i];
                let b = data[i * order + j];
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::Invalid(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(SymMat { order, data })
    }

    pub fn zeros(order: usize) -> Self {
        SymMat { order, data: vec![0.0; order * order] }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = SymMat::zeros(order);
        for i in 0..order {
            m.data[i * order + i] = 1.0;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.order + i]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.order + i] = v;
        self.data[i * self.order + j] = v;
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order);
        let n = self.order;
        let mut y = vec![0.0; n];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, &self.data[j * n..(j + 1) * n], &mut y);
            }
        }
        y
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Principal submatrix for the given indices.
    pub fn submatrix(&self, indices: &[usize]) -> SymMat {
        let q = indices.len();
        let mut data = vec![0.0; q * q];
        for (b, &j) in indices.iter().enumerate() {
            for (a, &i) in indices.iter().enumerate() {
                data[b * q + a] = self.get(i, j);
            }
        }
        SymMat { order: q, data }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// Lower factor, column-major; the strict upper triangle is unused.
    l: Vec<f64>,
}

impl Cholesky {
    pub fn new(m: &SymMat) -> Result<Self> {
        let n = m.order;
        let mut l = m.data.clone();
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                let v = l[k * n + j];
                d -= v * v;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotSpd(format!(
                    "pivot {d:.3e} at column {j} of order-{n} matrix"
                )));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut v = l[j * n + i];
                for k in 0..j {
                    v -= l[k * n + i] * l[k * n + j];
                }
                l[j * n + i] = v / d;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solve (L Lᵀ) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        // Forward: L z = b.
        for j in 0..n {
            let z = x[j] / self.l[j * n + j];
            x[j] = z;
            if z != 0.0 {
                for i in j + 1..n {
                    x[i] -= self.l[j * n + i] * z;
                }
            }
        }
        // Backward: Lᵀ x = z.
        for j in (0..n).rev() {
            let mut v = x[j];
            for i in j + 1..n {
                v -= self.l[j * n + i] * x[i];
            }
            x[j] = v / self.l[j * n + j];
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &SymMat) -> Vec<f64> {
    let n = m.order;
    if n == 0 {
        return vec![];
    }
    let mut a = m.data.clone();
    let scale = m.max_abs_entry();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                off = off.max(a[j * n + i].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[q * n + p];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // Smaller-angle root of t² + 2θt − 1 = 0.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Update rows/columns p and q.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[p * n + k] = new_kp;
                    a[k * n + p] = new_kp;
                    a[q * n + k] = new_kq;
                    a[k * n + q] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[q * n + p] = 0.0;
                a[p * n + q] = 0.0;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Largest eigenvalue of a symmetric positive semi-definite operator given as
/// a matrix-vector product, by power iteration with a deterministic start.
pub fn power_rho_max(order: usize, mut matvec: impl FnMut(&[f64]) -> Vec<f64>) -> f64 {
    if order == 0 {
        return 0.0;
    }
    // Strictly positive, slightly irregular start so no single null or
    // eigen-direction can absorb it.
    let mut v: Vec<f64> = (0..order).map(|i| 1.0 + 1e-3 * ((i % 7) as f64)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = 0.0f64;
    for _ in 0..10_000 {
        let w = matvec(&v);
        let new_lambda = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 || !nw.is_finite() {
            return 0.0;
        }
        v = w;
        v.iter_mut().for_each(|x| *x /= nw);
        if (new_lambda - lambda).abs() <= 1e-11 * new_lambda.abs().max(1e-300) {
            return new_lambda.max(0.0);
        }
        lambda = new_lambda;
    }
    lambda.max(0.0)
}

/// Extreme nonzero singular values of a symmetric positive semi-definite
/// matrix; entries below the numerical-rank tolerance count as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularExtremes {
    /// Smallest nonzero singular value (0 when the matrix has rank 0).
    pub rho_min_plus: f64,
    /// Largest singular value.
    pub rho_max: f64,
    /// True when every singular value is below the rank tolerance.
    pub zero_rank: bool,
}

pub fn extreme_singular_values(m: &SymMat) -> SingularExtremes {
    let ev = jacobi_eigenvalues(m);
    // Positive semi-definite input: singular values are the eigenvalues,
    // with tiny negative round-off clamped to zero.
    let rho_max = ev.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let tol = (m.order as f64) * f64::EPSILON * rho_max;
    let mut rho_min_plus = f64::INFINITY;
    let mut any = false;
    for &v in &ev {
        let s = v.abs();
        if s > tol && s > 0.0 {
            any = true;
            if s < rho_min_plus {
                rho_min_plus = s;
            }
        }
    }
    if !any {
        SingularExtremes { rho_min_plus: 0.0, rho_max: 0.0, zero_rank: true }
    } else {
        SingularExtremes { rho_min_plus, rho_max, zero_rank: false }
    }
}

/// Sparse/restricted eigenvalue diagnostics over enumerated supports.
#[derive(Debug, Clone, Copy)]
pub struct ReSeDiagnostic {
    /// Enumerated minimum of δᵀSδ / ‖δ_T‖² over cone-feasible directions;
    /// not a certified bound.
    pub re_lower_bound: f64,
    /// Exact minimum eigenvalue over all principal submatrices of S with
    /// support size ≤ s.
    pub se_min: f64,
    /// Exact maximum eigenvalue over the same supports.
    pub se_max: f64,
    /// Always true: the restricted-eigenvalue figure comes from a finite
    /// search, not a certified minimization.
    pub heuristic: bool,
}

/// Exhaustive small-scale diagnostic of sparse and restricted eigenvalue
/// behavior of S = (1/n)XᵀX. Caps: p ≤ 20, 1 ≤ s ≤ 5.
pub fn diagnose_re_se(x: &Mat, s: usize, k: f64) -> Result<ReSeDiagnostic> {
    let p = x.cols();
    if p > 20 {
        return Err(Error::Invalid(format!("p = {p} exceeds the enumeration cap 20")));
    }
    if s == 0 || s > 5 {
        return Err(Error::Invalid(format!("s = {s} outside 1..=5")));
    }
    if s > p {
        return Err(Error::Invalid(format!("s = {s} exceeds p = {p}")));
    }
    if !(k >= 1.0) {
        return Err(Error::Invalid(format!("cone constant k = {k} must be ≥ 1")));
    }
    let n = x.rows();
    let sm = x.gram(1.0 / n as f64);

    let mut se_min = f64::INFINITY;
    let mut se_max = f64::NEG_INFINITY;
    let mut re_min = f64::INFINITY;
    let mut rng_state: u64 = 0x9e3779b97f4a7c15;
    let mut support = Vec::with_capacity(s);
    enumerate_supports(p, s, &mut support, &mut |t| {
        let block = sm.submatrix(t);
        let ev = jacobi_eigenvalues(&block);
        se_min = se_min.min(ev[0]);
        se_max = se_max.max(*ev.last().unwrap());
        let re_t = cone_ratio_search(&sm, t, k, &mut rng_state);
        re_min = re_min.min(re_t);
    });
    Ok(ReSeDiagnostic { re_lower_bound: re_min, se_min, se_max, heuristic: true })
}

/// Visit every support of size 1..=s in lexicographic order.
fn enumerate_supports(p: usize, s: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    fn rec(p: usize, s: usize, start: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if !current.is_empty() {
            visit(current);
        }
        if current.len() == s {
            return;
        }
        for j in start..p {
            current.push(j);
            rec(p, s, j + 1, current, visit);
            current.pop();
        }
    }
    rec(p, s, 0, current, visit);
}

/// Finite search for min δᵀSδ / ‖δ_T‖² over {δ: ‖δ_{Tᶜ}‖₁ ≤ k‖δ_T‖₁},
/// by deterministic pseudo-random starts plus coordinate polish. Returns the
/// best (smallest) feasible ratio found.
fn cone_ratio_search(s: &SymMat, t: &[usize], k: f64, rng_state: &mut u64) -> f64 {
    let p = s.order();
    let in_t = {
        let mut m = vec![false; p];
        for &j in t {
            m[j] = true;
        }
        m
    };
    let ratio = |delta: &[f64]| -> f64 {
        let mut quad = 0.0;
        let sv = s.matvec(delta);
        for i in 0..p {
            quad += delta[i] * sv[i];
        }
        let nt: f64 = t.iter().map(|&j| delta[j] * delta[j]).sum();
        if nt <= 0.0 {
            f64::INFINITY
        } else {
            quad / nt
        }
    };
    // Rescale the off-support part onto the cone boundary when infeasible.
    let feasibilize = |delta: &mut [f64]| {
        let l1_t: f64 = t.iter().map(|&j| delta[j].abs()).sum();
        let l1_c: f64 = (0..p).filter(|&j| !in_t[j]).map(|j| delta[j].abs()).sum();
        if l1_c > k * l1_t {
            let f = if l1_c > 0.0 { k * l1_t / l1_c } else { 0.0 };
            for j in 0..p {
                if !in_t[j] {
                    delta[j] *= f;
                }
            }
        }
    };
    let mut best = f64::INFINITY;
    for start in 0..4 {
        let mut delta = vec![0.0; p];
        match start {
            0 => {
                for &j in t {
                    delta[j] = 1.0;
                }
            }
            1 => {
                for (idx, &j) in t.iter().enumerate() {
                    delta[j] = if idx % 2 == 0 { 1.0 } else { -1.0 };
                }
                for j in 0..p {
                    if !in_t[j] {
                        delta[j] = 0.1;
                    }
                }
            }
            _ => {
                for j in 0..p {
                    delta[j] = splitmix_unit(rng_state) - 0.5;
                }
            }
        }
        feasibilize(&mut delta);
        let mut cur = ratio(&delta);
        // Greedy coordinate polish: probe scaled perturbations per coordinate.
        for _pass in 0..30 {
            let mut improved = false;
            let scale = norm2(&delta).max(1e-12);
            for j in 0..p {
                for step in [0.3, -0.3, 0.05, -0.05] {
                    let snapshot = delta.clone();
                    delta[j] += step * scale;
                    feasibilize(&mut delta);
                    let cand = ratio(&delta);
                    if cand + 1e-15 < cur {
                        cur = cand;
                        improved = true;
                    } else {
                        delta = snapshot;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        best = best.min(cur);
    }
    best
}

/// Deterministic uniform(0,1) stream for the diagnostic search.
fn splitmix_unit(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    ((z >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Position of an original coordinate inside the block partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockPos {
    Expanded(usize),
    Complement(usize),
}

/// Cached factorizations applying L⁻¹, L⁻ᵀ, L, and the individual ridge
/// blocks for the block lower-triangular ridge matrix over a fixed index
/// partition. All public vector interfaces use the original coordinate
/// order of the design matrix.
#[derive(Debug, Clone)]
pub struct RidgeBlockFactor {
    n: usize,
    p: usize,
    expanded: Vec<usize>,
    complement: Vec<usize>,
    pos: Vec<BlockPos>,
    tau_a: f64,
    tau_c: f64,
    x_a: Mat,
    x_c: Mat,
    chol_a: Cholesky,
    chol_core: Cholesky,
}

impl RidgeBlockFactor {
    /// Build the factor for design `x` (n×p) and expanded index set
    /// `expanded` (0-based column indices). Requires 0 < ã < n and positive
    /// ridge scalars.
    pub fn build(x: &Mat, expanded: &[usize], tau_a: f64, tau_c: f64) -> Result<Self> {
        let n = x.rows();
        let p = x.cols();
        if !(tau_a > 0.0) || !(tau_c > 0.0) {
            return Err(Error::Invalid(format!(
                "ridge scalars must be positive, got tau_a = {tau_a}, tau_c = {tau_c}"
            )));
        }
        if expanded.is_empty() {
            return Err(Error::Invalid("expanded index set is empty".into()));
        }
        if expanded.len() >= n {
            return Err(Error::Invalid(format!(
                "expanded size {} must be below n = {n}",
                expanded.len()
            )));
        }
        if expanded.len() > p {
            return Err(Error::Dimension("expanded size exceeds p".into()));
        }
        if !x.has_only_finite() {
            return Err(Error::Invalid("design matrix has non-finite entries".into()));
        }
        let mut expanded: Vec<usize> = expanded.to_vec();
        expanded.sort_unstable();
        if expanded.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate expanded index".into()));
        }
        if *expanded.last().unwrap() >= p {
            return Err(Error::Invalid(format!(
                "expanded index {} out of range for p = {p}",
                expanded.last().unwrap()
            )));
        }
        let mut pos = vec![BlockPos::Complement(usize::MAX); p];
        for (k, &j) in expanded.iter().enumerate() {
            pos[j] = BlockPos::Expanded(k);
        }
        let mut complement = Vec::with_capacity(p - expanded.len());
        for j in 0..p {
            if matches!(pos[j], BlockPos::Complement(_)) {
                pos[j] = BlockPos::Complement(complement.len());
                complement.push(j);
            }
        }

        let x_a = x.select_cols(&expanded);
        let x_c = x.select_cols(&complement);

        // Expanded block: S_aa + tau_a I, dense SPD.
        let mut s_aa = x_a.gram(1.0 / n as f64);
        for i in 0..s_aa.order() {
            let v = s_aa.get(i, i) + tau_a;
            s_aa.set_sym(i, i, v);
        }
        let chol_a = Cholesky::new(&s_aa).map_err(|e| {
            Error::Numerical(format!("expanded block factorization failed: {e}"))
        })?;

        // Complement block core: n tau_c I_n + X_c X_cᵀ, dense SPD of order n.
        let mut core = SymMat::zeros(n);
        for j in 0..x_c.cols() {
            let cj = x_c.col(j);
            for b in 0..n {
                let v = cj[b];
                if v != 0.0 {
                    let col = &mut core.data[b * n..(b + 1) * n];
                    for a in 0..=b {
                        col[a] += cj[a] * v;
                    }
                }
            }
        }
        for b in 0..n {
            core.data[b * n + b] += n as f64 * tau_c;
            for a in 0..b {
                core.data[a * n + b] = core.data[b * n + a];
            }
        }
        let chol_core = Cholesky::new(&core).map_err(|e| {
            Error::Numerical(format!("complement core factorization failed: {e}"))
        })?;

        Ok(RidgeBlockFactor {
            n,
            p,
            expanded,
            complement,
            pos,
            tau_a,
            tau_c,
            x_a,
            x_c,
            chol_a,
            chol_core,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn expanded_indices(&self) -> &[usize] {
        &self.expanded
    }

    pub fn complement_indices(&self) -> &[usize] {
        &self.complement
    }

    pub fn tau_a(&self) -> f64 {
        self.tau_a
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    /// Gather a p-vector into (expanded part, complement part).
    pub fn split(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(v.len(), self.p);
        let va = self.expanded.iter().map(|&j| v[j]).collect();
        let vc = self.complement.iter().map(|&j| v[j]).collect();
        (va, vc)
    }

    /// Scatter block parts back into original coordinate order.
    pub fn merge(&self, va: &[f64], vc: &[f64]) -> Vec<f64> {
        assert_eq!(va.len(), self.expanded.len());
        assert_eq!(vc.len(), self.complement.len());
        let mut v = vec![0.0; self.p];
        for (k, &j) in self.expanded.iter().enumerate() {
            v[j] = va[k];
        }
        for (k, &j) in self.complement.iter().enumerate() {
            v[j] = vc[k];
        }
        v
    }

    /// (S_aa + tau_a I)⁻¹ v on the expanded block.
    pub fn apply_a_inv(&self, va: &[f64]) -> Vec<f64> {
        self.chol_a.solve(va)
    }

    /// (S_cc + tau_c I)⁻¹ v on the complement block, through the n-core.
    pub fn apply_c_inv(&self, vc: &[f64]) -> Vec<f64> {
        assert_eq!(vc.len(), self.complement.len());
        let t = self.x_c.matvec(vc);
        let s = self.chol_core.solve(&t);
        let back = self.x_c.tr_matvec(&s);
        vc.iter().zip(back.iter()).map(|(&v, &b)| (v - b) / self.tau_c).collect()
    }

    /// S_ca v = (1/n) X_cᵀ X_a v (expanded block → complement block).
    pub fn apply_g(&self, va: &[f64]) -> Vec<f64> {
        let t = self.x_a.matvec(va);
        let mut out = self.x_c.tr_matvec(&t);
        let inv_n = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= inv_n);
        out
    }

    /// S_ac v = (1/n) X_aᵀ X_c v (complement block → expanded block).
    pub fn apply_g_t(&self, vc: &[f64]) -> Vec<f64> {
        let t = self.x_c.matvec(vc);
        let mut out = self.x_a.tr_matvec(&t);
        let inv_n = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= inv_n);
        out
    }

    /// L⁻¹ v in original coordinate order.
    pub fn apply_l_inv(&self, v: &[f64]) -> Vec<f64> {
        let (va, vc) = self.split(v);
        let ua = self.apply_a_inv(&va);
        let g_ua = self.apply_g(&ua);
        let w: Vec<f64> = vc.iter().zip(g_ua.iter()).map(|(&x, &y)| x - y).collect();
        let uc = self.apply_c_inv(&w);
        self.merge(&ua, &uc)
    }

    /// L⁻ᵀ v in original coordinate order.
    pub fn apply_l_inv_t(&self, v: &[f64]) -> Vec<f64> {
        let (va, vc) = self.split(v);
        let uc = self.apply_c_inv(&vc);
        let gt_uc = self.apply_g_t(&uc);
        let w: Vec<f64> = va.iter().zip(gt_uc.iter()).map(|(&x, &y)| x - y).collect();
        let ua = self.apply_a_inv(&w);
        self.merge(&ua, &uc)
    }

    /// L v in original coordinate order (for round-trip checks).
    pub fn apply_l(&self, v: &[f64]) -> Vec<f64> {
        let (va, vc) = self.split(v);
        let inv_n = 1.0 / self.n as f64;
        // Expanded rows: (S_aa + tau_a I) va.
        let t_a = self.x_a.matvec(&va);
        let mut wa = self.x_a.tr_matvec(&t_a);
        for (w, &v0) in wa.iter_mut().zip(va.iter()) {
            *w = *w * inv_n + self.tau_a * v0;
        }
        // Complement rows: S_ca va + (S_cc + tau_c I) vc.
        let t_c = self.x_c.matvec(&vc);
        let mut wc = self.x_c.tr_matvec(&t_c);
        let cross = self.x_c.tr_matvec(&t_a);
        for i in 0..wc.len() {
            wc[i] = wc[i] * inv_n + self.tau_c * vc[i] + cross[i] * inv_n;
        }
        self.merge(&wa, &wc)
    }

    /// X v for a p-vector v in original order (uses the partitioned columns).
    pub fn design_matvec(&self, v: &[f64]) -> Vec<f64> {
        let (va, vc) = self.split(v);
        let mut t = self.x_a.matvec(&va);
        let t2 = self.x_c.matvec(&vc);
        for i in 0..t.len() {
            t[i] += t2[i];
        }
        t
    }

    /// Xᵀ w for an n-vector w, returned in original coordinate order.
    pub fn design_tr_matvec(&self, w: &[f64]) -> Vec<f64> {
        let ta = self.x_a.tr_matvec(w);
        let tc = self.x_c.tr_matvec(w);
        self.merge(&ta, &tc)
    }

    /// Column j of X in original column numbering.
    pub fn design_col(&self, j: usize) -> &[f64] {
        match self.pos[j] {
            BlockPos::Expanded(k) => self.x_a.col(k),
            BlockPos::Complement(k) => self.x_c.col(k),
        }
    }

    /// Whether original coordinate j lies in the expanded set.
    pub fn is_expanded(&self, j: usize) -> bool {
        matches!(self.pos[j], BlockPos::Expanded(_))
    }
}
