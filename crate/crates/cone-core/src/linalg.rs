//! Minimal dense linear algebra for desk-scale kernels (dimensions up to a
//! few hundred). Row-major storage, no BLAS.

use crate::error::ConeError;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// y^T = x^T A
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "vecmat dimension mismatch");
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = self.row(i);
            for j in 0..self.cols {
                y[j] += xi * row[j];
            }
        }
        y
    }

    /// C = self · B
    pub fn matmul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.rows, "matmul dimension mismatch");
        let mut c = Matrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a_ik = self[(i, k)];
                if a_ik == 0.0 {
                    continue;
                }
                let brow = b.row(k);
                let crow = c.row_mut(i);
                for j in 0..b.cols {
                    crow[j] += a_ik * brow[j];
                }
            }
        }
        c
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    /// Spectral norm estimate by power iteration on AᵀA.
    pub fn spectral_norm(&self, iters: usize) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let mut x = vec![1.0; self.cols];
        let mut norm = 0.0;
        for _ in 0..iters {
            let y = self.matvec(&x);
            let z = self.vecmat(&y);
            let zn = norm2(&z);
            if zn == 0.0 {
                return 0.0;
            }
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi = zi / zn;
            }
            norm = norm2(&self.matvec(&x));
        }
        norm
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Normalize to unit Euclidean norm in place; returns the removed norm.
pub fn normalize2(x: &mut [f64]) -> f64 {
    let n = norm2(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
    n
}

/// Dominant eigenpair of a square matrix by power iteration.
///
/// Returns `(lambda, right_eigenvector)` with the eigenvector normalized to
/// unit 2-norm and its largest-magnitude entry positive. Fails if the
/// iteration does not settle, which covers complex or defective dominant
/// eigenvalues at the scales used here.
pub fn dominant_eigenpair(
    a: &Matrix,
    iters: usize,
    tol: f64,
) -> Result<(f64, Vec<f64>), ConeError> {
    let n = a.rows();
    if n != a.cols() {
        return Err(ConeError::Dimension {
            expected: n,
            got: a.cols(),
        });
    }
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i as f64 + 1.0)).collect();
    normalize2(&mut x);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let mut y = a.matvec(&x);
        let ny = normalize2(&mut y);
        if ny == 0.0 {
            return Err(ConeError::SpectralRefusal(
                "power iteration collapsed to zero".into(),
            ));
        }
        lambda = dot(&y, &a.matvec(&y));
        x = y;
    }
    // Residual check against the Rayleigh quotient.
    let ax = a.matvec(&x);
    let resid: f64 = ax
        .iter()
        .zip(&x)
        .map(|(axi, xi)| (axi - lambda * xi).powi(2))
        .sum::<f64>()
        .sqrt();
    if resid > tol * lambda.abs().max(1.0) {
        return Err(ConeError::SpectralRefusal(format!(
            "power iteration residual {resid:.3e} exceeds tolerance (dominant eigenvalue may be complex or degenerate)"
        )));
    }
    // Fix sign: largest-magnitude entry positive.
    let (imax, _) = x
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    if x[imax] < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
    Ok((lambda, x))
}
