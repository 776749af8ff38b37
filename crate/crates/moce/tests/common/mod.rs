//! Shared brute-force oracles for the integration tests: dense Gaussian
//! elimination, dense assembly of the block ridge matrix, and small
//! utilities. Everything here is deliberately naive and independent of the
//! library's own factorizations.

#![allow(dead_code)]

use moce::linalg::Mat;

/// Dense row-major square matrix as nested vectors.
pub type Dense = Vec<Vec<f64>>;

pub fn dense_zeros(n: usize) -> Dense {
    vec![vec![0.0; n]; n]
}

pub fn dense_matvec(a: &Dense, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(&r, &x)| r * x).sum()).collect()
}

pub fn dense_transpose(a: &Dense) -> Dense {
    let n = a.len();
    let m = a[0].len();
    let mut t = vec![vec![0.0; n]; m];
    for i in 0..n {
        for j in 0..m {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn dense_matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail != 0.0 {
                for j in 0..m {
                    c[i][j] += ail * b[l][j];
                }
            }
        }
    }
    c
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    assert_eq!(b.len(), n);
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        assert!(m[pivot][col].abs() > 1e-300, "oracle matrix is singular");
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                x[row] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        let xc = x[col];
        for row in 0..col {
            x[row] -= m[row][col] * xc;
        }
    }
    x
}

/// Dense inverse via n solves against basis vectors.
pub fn gauss_invert(a: &Dense) -> Dense {
    let n = a.len();
    let mut inv = dense_zeros(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = gauss_solve(a, &e);
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    inv
}

/// S = (1/n) XᵀX as a dense matrix.
pub fn dense_gram(x: &Mat) -> Dense {
    let n = x.rows();
    let p = x.cols();
    let mut s = dense_zeros(p);
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for r in 0..n {
                acc += x.get(r, i) * x.get(r, j);
            }
            s[i][j] = acc / n as f64;
        }
    }
    s
}

/// The block lower-triangular ridge matrix in original coordinate order:
/// rows and columns of the expanded set carry S + τ_a on the diagonal
/// block and zeros toward the complement; complement rows carry the cross
/// Gram block and S + τ_c on their own diagonal block.
pub fn dense_ridge_block(x: &Mat, expanded: &[usize], tau_a: f64, tau_c: f64) -> Dense {
    let p = x.cols();
    let s = dense_gram(x);
    let mut in_set = vec![false; p];
    for &j in expanded {
        in_set[j] = true;
    }
    let mut l = dense_zeros(p);
    for i in 0..p {
        for j in 0..p {
            l[i][j] = match (in_set[i], in_set[j]) {
                (true, true) => s[i][j] + if i == j { tau_a } else { 0.0 },
                (true, false) => 0.0,
                (false, true) => s[i][j],
                (false, false) => s[i][j] + if i == j { tau_c } else { 0.0 },
            };
        }
    }
    l
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Deterministic pseudo-random matrix for oracle instances.
pub fn seeded_mat(n: usize, p: usize, seed: u64) -> Mat {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    Mat::from_fn(n, p, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = ((state >> 11) as f64 + 0.5) / 9007199254740992.0;
        2.0 * u - 1.0
    })
}

/// Center and scale every column of a matrix to unit Euclidean norm.
pub fn standardize_columns(x: &Mat) -> Mat {
    let n = x.rows();
    Mat::from_fn(n, x.cols(), |i, j| x.get(i, j)).pipe_standardize()
}

trait PipeStandardize {
    fn pipe_standardize(self) -> Self;
}

impl PipeStandardize for Mat {
    fn pipe_standardize(mut self) -> Self {
        let n = self.rows();
        for j in 0..self.cols() {
            let col = self.col_mut(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            col.iter_mut().for_each(|v| *v -= mean);
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm > 0.0, "oracle column collapsed to a constant");
            col.iter_mut().for_each(|v| *v /= norm);
        }
        self
    }
}
