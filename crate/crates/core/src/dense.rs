//! Dense column-major matrices and the deterministic factorizations the
//! sampling code is checked against: thin Householder QR, the exact least
//! squares solution, the residual projection `B⊥`, and extreme singular
//! values.

use std::ops::Index;

use crate::error::{Error, Result};

/// Relative threshold on `sigma_min / sigma_max` below which a design matrix
/// is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Real matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major `data`, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionError(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionError(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: k % rows,
                col: k / rows,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major literal constructor, mostly for small fixed matrices.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != ncols) {
            return Err(Error::DimensionError("ragged row literal".into()));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for j in 0..ncols {
            data.extend(rows.iter().map(|r| r.as_ref()[j]));
        }
        Self::new(nrows, ncols, data)
    }

    /// Single column from a slice.
    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        (0..self.cols).map(|j| self[(i, j)].powi(2)).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionError(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for j in 0..other.cols {
            let dst = &mut out[j * self.rows..(j + 1) * self.rows];
            for (k, &w) in other.column(j).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.column(k)) {
                    *d += a * w;
                }
            }
        }
        Ok(Self::from_raw(self.rows, other.cols, out))
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionError(format!(
                "cannot form ({}x{})ᵀ·({}x{})",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.cols, other.cols, |i, j| {
            dot(self.column(i), other.column(j))
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionError(format!(
                "shape {:?} does not match {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[j * self.rows + i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matrix with orthonormal columns spanning the column space of a design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    pub q: DenseMatrix,
    pub source_rank: usize,
}

impl OrthonormalBasis {
    /// Squared Euclidean norm of each row of `q`.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.q.rows()).map(|i| self.q.row_norm_sq(i)).collect()
    }
}

/// Exact solution of `min ‖A X − B‖²_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x_opt: DenseMatrix,
    /// Optimal squared residual `R² = ‖B⊥‖²_F`.
    pub residual_sq: f64,
    /// `B − A·X_opt`, the part of `B` orthogonal to `col(A)`.
    pub b_perp: DenseMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub kappa: f64,
}

/// Thin Householder QR of a tall matrix. Reflector `k` acts on rows `k..m`.
pub(crate) struct HouseholderQr {
    rows: usize,
    reflectors: Vec<(Vec<f64>, f64)>,
    r: DenseMatrix,
}

impl HouseholderQr {
    pub(crate) fn new(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        debug_assert!(m >= n);
        let mut w = a.data.clone();
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let col = &w[k * m + k..(k + 1) * m];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                reflectors.push((vec![0.0; m - k], 0.0));
                continue;
            }
            let alpha = if col[0] >= 0.0 { -norm } else { norm };
            let mut v = col.to_vec();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = 2.0 / vtv;
            w[k * m + k] = alpha;
            for x in &mut w[k * m + k + 1..(k + 1) * m] {
                *x = 0.0;
            }
            for j in k + 1..n {
                let target = &mut w[j * m + k..(j + 1) * m];
                let f = beta * dot(&v, target);
                for (t, vi) in target.iter_mut().zip(&v) {
                    *t -= f * vi;
                }
            }
            reflectors.push((v, beta));
        }
        let r = DenseMatrix::from_fn(n, n, |i, j| if i <= j { w[j * m + i] } else { 0.0 });
        Self {
            rows: m,
            reflectors,
            r,
        }
    }

    /// Applies `Qᵀ` (the full `m×m` orthogonal factor) to every column of `b`.
    fn apply_qt(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = b.data.clone();
        for col in out.chunks_mut(self.rows) {
            for (k, (v, beta)) in self.reflectors.iter().enumerate() {
                let seg = &mut col[k..];
                let f = beta * dot(v, seg);
                for (t, vi) in seg.iter_mut().zip(v) {
                    *t -= f * vi;
                }
            }
        }
        DenseMatrix::from_raw(b.rows, b.cols, out)
    }

    pub(crate) fn thin_q(&self) -> DenseMatrix {
        let n = self.reflectors.len();
        let m = self.rows;
        let mut q = DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 }).data;
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            for col in q.chunks_mut(m) {
                let seg = &mut col[k..];
                let f = beta * dot(v, seg);
                for (t, vi) in seg.iter_mut().zip(v) {
                    *t -= f * vi;
                }
            }
        }
        DenseMatrix::from_raw(m, n, q)
    }
}

/// Extreme singular values of any non-empty matrix. For an `m×n` matrix this
/// ranges over the `min(m, n)` singular values.
pub(crate) fn singular_extremes(m: &DenseMatrix) -> (f64, f64) {
    let small = if m.rows() >= m.cols() {
        HouseholderQr::new(m).r
    } else {
        HouseholderQr::new(&m.transpose()).r
    };
    let n = small.rows();
    let sv = nalgebra::DMatrix::from_column_slice(n, n, small.data()).singular_values();
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

fn require_tall(a: &DenseMatrix) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::DimensionError(format!(
            "design matrix must have rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Rejects `r` when its conditioning breaches [`RANK_TOL`].
fn check_full_rank(qr: &HouseholderQr) -> Result<()> {
    let n = qr.r.rows();
    let sv = nalgebra::DMatrix::from_column_slice(n, n, qr.r.data()).singular_values();
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 || sigma_min <= RANK_TOL * sigma_max {
        return Err(Error::RankDeficient {
            sigma_min,
            sigma_max,
        });
    }
    Ok(())
}

/// Orthonormal basis for `col(a)` from the thin Householder factor.
pub fn orthonormal_basis(a: &DenseMatrix) -> Result<OrthonormalBasis> {
    require_tall(a)?;
    let qr = HouseholderQr::new(a);
    check_full_rank(&qr)?;
    Ok(OrthonormalBasis {
        q: qr.thin_q(),
        source_rank: a.cols(),
    })
}

/// Solves `min ‖a X − b‖²_F` through QR: `X = R⁻¹ (Qᵀ b)[..r]`.
pub fn exact_lstsq(a: &DenseMatrix, b: &DenseMatrix) -> Result<LstsqSolution> {
    require_tall(a)?;
    if a.rows() != b.rows() {
        return Err(Error::DimensionError(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    let qr = HouseholderQr::new(a);
    check_full_rank(&qr)?;
    let qtb = qr.apply_qt(b);
    let r = a.cols();
    let mut x = vec![0.0; r * b.cols()];
    for (j, col) in x.chunks_mut(r).enumerate() {
        col.copy_from_slice(&qtb.column(j)[..r]);
        back_substitute(&qr.r, col);
    }
    let x_opt = DenseMatrix::from_raw(r, b.cols(), x);
    let b_perp = b.sub(&a.matmul(&x_opt)?)?;
    Ok(LstsqSolution {
        residual_sq: b_perp.frobenius_norm_sq(),
        x_opt,
        b_perp,
    })
}

/// Solves `R x = y` in place for upper triangular `R`.
fn back_substitute(r: &DenseMatrix, y: &mut [f64]) {
    let n = r.rows();
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * y[j];
        }
        y[i] = acc / r[(i, i)];
    }
}

/// `B⊥ = B − A X_opt`.
pub fn b_perp(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    exact_lstsq(a, b).map(|s| s.b_perp)
}

pub fn spectral_extremes(a: &DenseMatrix) -> Result<SpectralSummary> {
    if a.data().is_empty() {
        return Err(Error::DimensionError("empty matrix".into()));
    }
    let (sigma_min, sigma_max) = singular_extremes(a);
    let kappa = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    Ok(SpectralSummary {
        sigma_min,
        sigma_max,
        kappa,
    })
}
