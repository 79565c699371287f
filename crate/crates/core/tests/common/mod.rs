#![allow(dead_code, clippy::needless_range_loop)]

use rand_distr::{Distribution, StandardNormal};
use rowsketch::{DenseMatrix, RngStream};

pub fn gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

/// Solves `M x = y` for square `M` by Gaussian elimination with partial pivoting.
pub fn solve_square(m: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
    let n = m.rows();
    let k = y.cols();
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = m.row(i);
            row.extend(y.row(i));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| aug[a][c].abs().total_cmp(&aug[b][c].abs()))
            .unwrap();
        aug.swap(c, piv);
        for r in c + 1..n {
            let f = aug[r][c] / aug[c][c];
            for j in c..n + k {
                aug[r][j] -= f * aug[c][j];
            }
        }
    }
    let mut x = vec![vec![0.0; k]; n];
    for i in (0..n).rev() {
        for j in 0..k {
            let mut acc = aug[i][n + j];
            for l in i + 1..n {
                acc -= aug[i][l] * x[l][j];
            }
            x[i][j] = acc / aug[i][i];
        }
    }
    DenseMatrix::from_rows(&x).unwrap()
}

/// `(AᵀA)⁻¹ AᵀB`.
pub fn normal_equations(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    solve_square(&a.tr_matmul(a).unwrap(), &a.tr_matmul(b).unwrap())
}

/// Hat-matrix diagonal `diag(A (AᵀA)⁻¹ Aᵀ)`.
pub fn hat_diagonal(a: &DenseMatrix) -> Vec<f64> {
    let g_inv_at = solve_square(&a.tr_matmul(a).unwrap(), &a.transpose());
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a[(i, j)] * g_inv_at[(j, i)]).sum())
        .collect()
}

pub fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
