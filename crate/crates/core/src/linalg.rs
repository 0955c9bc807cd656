//! Small dense real-matrix kernel.
//!
//! Everything the controller and the stability certificate need lives here:
//! a row-major [`Mat`], a cyclic Jacobi symmetric eigensolver, the PSD square
//! root, an LU-based linear solver with a condition guard, and a discrete
//! Lyapunov (Stein) solver. Dimensions in this crate are tiny (at most a few
//! dozen), so every routine favours determinism over asymptotic speed.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

/// Spectral-radius margin below one required before a Stein solve is attempted.
pub const SCHUR_EPS: f64 = 1e-9;

/// Default condition-number ceiling for [`solve_linear`].
pub const DEFAULT_COND_TOL: f64 = 1e13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not symmetric: max |M - M^T| = {asymmetry:.3e} exceeds {tol:.3e}")]
    NotSymmetric { asymmetry: f64, tol: f64 },
    #[error(
        "matrix is not positive semi-definite: min eigenvalue {min_eigenvalue:.3e} < -{tol:.3e}"
    )]
    NotPsd { min_eigenvalue: f64, tol: f64 },
    #[error("matrix is not Schur stable: spectral radius {radius:.12} >= 1 - {eps:e}")]
    NotSchur { radius: f64, eps: f64 },
    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in matrix input")]
    NonFinite,
    #[error("matrix must have at least one row and one column")]
    Empty,
}

/// Dense real matrix with row-major storage.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a row-major slice. Panics if the length is wrong.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row slice length mismatch");
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    /// Validated construction from a list of rows, as read from config files.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LinalgError::NonFinite);
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn column_vector(v: &[f64]) -> Self {
        Self::from_row_slice(v.len(), 1, v)
    }

    /// Outer product `a b^T`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
    }

    /// Assembles `[[tl, tr], [bl, br]]`. Panics on inconsistent block shapes.
    pub fn from_blocks(tl: &Mat, tr: &Mat, bl: &Mat, br: &Mat) -> Self {
        assert_eq!(tl.rows, tr.rows);
        assert_eq!(bl.rows, br.rows);
        assert_eq!(tl.cols, bl.cols);
        assert_eq!(tr.cols, br.cols);
        let rows = tl.rows + bl.rows;
        let cols = tl.cols + tr.cols;
        Self::from_fn(rows, cols, |i, j| match (i < tl.rows, j < tl.cols) {
            (true, true) => tl[(i, j)],
            (true, false) => tr[(i, j - tl.cols)],
            (false, true) => bl[(i - tl.rows, j)],
            (false, false) => br[(i - tl.rows, j - tl.cols)],
        })
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest entrywise deviation from symmetry, `max |M - M^T|`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `(M + M^T) / 2`.
    pub fn symmetrized(&self) -> Mat {
        assert!(self.is_square());
        Mat::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// Integer power by repeated squaring; `pow(0)` is the identity.
    pub fn pow(&self, mut exp: usize) -> Mat {
        assert!(self.is_square());
        let mut result = Mat::identity(self.rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = &result * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// 1-norm (maximum absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &Mat {
    type Output = Mat;

    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum dimension mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;

    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!(
            self.shape(),
            rhs.shape(),
            "matrix difference dimension mismatch"
        );
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;

    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn vec_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Default PSD / symmetry tolerance, `1e-9 * max(1, ||M||_F)`.
pub fn default_tol(m: &Mat) -> f64 {
    1e-9 * m.frobenius_norm().max(1.0)
}

fn require_square(m: &Mat) -> Result<(), LinalgError> {
    if m.is_square() {
        Ok(())
    } else {
        Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        })
    }
}

fn require_symmetric(m: &Mat, tol: f64) -> Result<(), LinalgError> {
    require_square(m)?;
    let asymmetry = m.asymmetry();
    if asymmetry > tol {
        return Err(LinalgError::NotSymmetric { asymmetry, tol });
    }
    Ok(())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. The input is symmetrized first; callers are
/// responsible for rejecting inputs that are not symmetric to begin with.
pub fn sym_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    assert!(m.is_square());
    let n = m.rows;
    let mut a = m.symmetrized();
    let mut v = Mat::identity(n);
    let scale = a.frobenius_norm();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off == 0.0 || off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// `V diag(d) V^T`.
fn reassemble(values: &[f64], vectors: &Mat) -> Mat {
    let n = values.len();
    let mut out = Mat::zeros(n, n);
    for (k, &d) in values.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = vectors[(i, k)] * d;
            for j in 0..n {
                out[(i, j)] += vik * vectors[(j, k)];
            }
        }
    }
    out.symmetrized()
}

/// `(lambda_min, lambda_max)` of a symmetric matrix.
pub fn eig_extrema_sym(m: &Mat) -> Result<(f64, f64), LinalgError> {
    require_symmetric(m, default_tol(m))?;
    let (values, _) = sym_eigen(m);
    Ok((values[0], values[values.len() - 1]))
}

/// Unique symmetric PSD square root.
///
/// Eigenvalues in `[-tol, 0)` are treated as zero.
pub fn psd_sqrt(m: &Mat, tol: f64) -> Result<Mat, LinalgError> {
    require_symmetric(m, tol)?;
    let (values, vectors) = sym_eigen(m);
    if values[0] < -tol {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: values[0],
            tol,
        });
    }
    let roots: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(reassemble(&roots, &vectors))
}

/// Symmetrizes `m` and clamps negative eigenvalues to zero.
///
/// Returns the repaired matrix and the clamped magnitude (`max(0, -lambda_min)`
/// of the symmetrized input). The matrix is only rebuilt from its
/// eigendecomposition when a negative eigenvalue is actually present.
pub fn clamp_psd(m: &Mat) -> (Mat, f64) {
    let sym = m.symmetrized();
    let (values, vectors) = sym_eigen(&sym);
    if values[0] >= 0.0 {
        return (sym, 0.0);
    }
    let clamped: Vec<f64> = values.iter().map(|&l| l.max(0.0)).collect();
    (reassemble(&clamped, &vectors), -values[0])
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    let gram = if m.rows <= m.cols {
        m * &m.transpose()
    } else {
        &m.transpose() * m
    };
    let (values, _) = sym_eigen(&gram);
    values[values.len() - 1].max(0.0).sqrt()
}

/// Largest eigenvalue modulus of a general square matrix.
pub fn spectral_radius(m: &Mat) -> f64 {
    assert!(m.is_square());
    let dm = nalgebra::DMatrix::from_row_slice(m.rows, m.cols, &m.data);
    dm.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// LU factorization with partial pivoting, stored compactly.
struct Lu {
    lu: Mat,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &Mat) -> Result<Self, LinalgError> {
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot == 0.0 {
                return Err(LinalgError::Singular {
                    condition: f64::INFINITY,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            let diag = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / diag;
                lu[(i, k)] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        let ukj = lu[(k, j)];
                        lu[(i, j)] -= factor * ukj;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    fn solve(&self, b: &Mat) -> Mat {
        let n = self.lu.rows;
        let mut x = Mat::from_fn(n, b.cols, |i, j| b[(self.perm[i], j)]);
        for col in 0..b.cols {
            for i in 0..n {
                let mut acc = x[(i, col)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, col)];
                for k in (i + 1)..n {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc / self.lu[(i, i)];
            }
        }
        x
    }
}

/// Solves `A X = B` with the default condition ceiling.
pub fn solve_linear(a: &Mat, b: &Mat) -> Result<Mat, LinalgError> {
    solve_linear_with(a, b, DEFAULT_COND_TOL)
}

/// Solves `A X = B`, rejecting systems whose 1-norm condition number exceeds
/// `cond_tol`. An infinite `cond_tol` skips the estimate; exact zero pivots
/// are still rejected.
pub fn solve_linear_with(a: &Mat, b: &Mat, cond_tol: f64) -> Result<Mat, LinalgError> {
    require_square(a)?;
    if a.rows != b.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.rows, a.cols, b.rows
        )));
    }
    let lu = Lu::factor(a)?;
    if cond_tol.is_finite() {
        let inverse = lu.solve(&Mat::identity(a.rows));
        let condition = a.norm1() * inverse.norm1();
        if !condition.is_finite() || condition > cond_tol {
            return Err(LinalgError::Singular { condition });
        }
    }
    Ok(lu.solve(b))
}

/// Solves the Stein equation `Z^T P Z - P = -Q` for symmetric `P`.
///
/// The equation is vectorized into a `d^2 x d^2` linear system. `Z` must be
/// Schur stable with margin [`SCHUR_EPS`].
pub fn solve_stein(z: &Mat, q: &Mat) -> Result<Mat, LinalgError> {
    require_square(z)?;
    require_symmetric(q, default_tol(q))?;
    let d = z.rows;
    if q.rows != d {
        return Err(LinalgError::DimensionMismatch(format!(
            "Z is {d}x{d} but Q is {}x{}",
            q.rows, q.cols
        )));
    }
    let radius = spectral_radius(z);
    if radius >= 1.0 - SCHUR_EPS {
        return Err(LinalgError::NotSchur {
            radius,
            eps: SCHUR_EPS,
        });
    }

    // Row (i, j) of the system: sum_{k,l} Z_ki Z_lj P_kl - P_ij = -Q_ij.
    let size = d * d;
    let mut system = Mat::zeros(size, size);
    for i in 0..d {
        for j in 0..d {
            let row = i * d + j;
            for k in 0..d {
                let zki = z[(k, i)];
                for l in 0..d {
                    system[(row, k * d + l)] = zki * z[(l, j)];
                }
            }
            system[(row, row)] -= 1.0;
        }
    }
    let rhs = Mat::from_fn(size, 1, |r, _| -q[(r / d, r % d)]);
    let solution = solve_linear_with(&system, &rhs, f64::INFINITY)?;
    Ok(Mat::from_row_slice(d, d, solution.as_slice()).symmetrized())
}

/// Frobenius norm of `Z^T P Z - P + Q`.
pub fn stein_residual(z: &Mat, p: &Mat, q: &Mat) -> f64 {
    let ztpz = &(&z.transpose() * p) * z;
    (&(&ztpz - p) + q).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_mat_close(a: &Mat, b: &Mat, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        let diff = (a - b).max_abs();
        assert!(diff <= tol, "matrices differ by {diff:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn psd_sqrt_identity_and_diagonal() {
        let s = psd_sqrt(&Mat::identity(2), 1e-10).unwrap();
        assert_mat_close(&s, &Mat::identity(2), 1e-14);
        let s = psd_sqrt(&Mat::from_diag(&[4.0, 9.0]), 1e-10).unwrap();
        assert_mat_close(&s, &Mat::from_diag(&[2.0, 3.0]), 1e-14);
    }

    #[test]
    fn psd_sqrt_coupled_2x2() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = psd_sqrt(&m, 1e-10).unwrap();
        // eigenvalues 1 and 3: S = ((sqrt3 + 1)/2, (sqrt3 - 1)/2) pattern
        let a = (3f64.sqrt() + 1.0) / 2.0;
        let b = (3f64.sqrt() - 1.0) / 2.0;
        assert_abs_diff_eq!(s[(0, 0)], a, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 1)], b, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 0)], 1.36603, epsilon = 1e-5);
        assert_abs_diff_eq!(s[(1, 0)], 0.36603, epsilon = 1e-5);
        assert_mat_close(&(&s * &s), &m, 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_bad_input() {
        let asym = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            psd_sqrt(&asym, 1e-9),
            Err(LinalgError::NotSymmetric { .. })
        ));
        let neg = Mat::from_diag(&[1.0, -0.1]);
        assert!(matches!(
            psd_sqrt(&neg, 1e-9),
            Err(LinalgError::NotPsd { .. })
        ));
        // tiny negative eigenvalue inside tolerance is clamped
        let nearly = Mat::from_diag(&[1.0, -1e-12]);
        let s = psd_sqrt(&nearly, 1e-9).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
    }

    #[test]
    fn stein_zero_dynamics_and_scalar() {
        let p = solve_stein(&Mat::zeros(2, 2), &Mat::identity(2)).unwrap();
        assert_mat_close(&p, &Mat::identity(2), 1e-14);
        let p = solve_stein(&Mat::from_diag(&[0.5]), &Mat::from_diag(&[1.0])).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 1.0 / (1.0 - 0.25), epsilon = 1e-14);
        assert_abs_diff_eq!(p[(0, 0)], 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn stein_rejects_unstable() {
        let z = Mat::from_diag(&[1.0, 0.2]);
        assert!(matches!(
            solve_stein(&z, &Mat::identity(2)),
            Err(LinalgError::NotSchur { .. })
        ));
    }

    #[test]
    fn stein_non_normal_residual() {
        let z = Mat::from_row_slice(3, 3, &[0.5, 2.0, 0.0, 0.0, 0.3, 1.5, 0.0, 0.0, -0.6]);
        let q = Mat::identity(3);
        let p = solve_stein(&z, &q).unwrap();
        assert!(stein_residual(&z, &p, &q) <= 1e-10);
        let (lo, _) = eig_extrema_sym(&p).unwrap();
        assert!(lo > 0.0);
    }

    #[test]
    fn spectral_norm_examples() {
        assert_abs_diff_eq!(spectral_norm(&Mat::identity(3)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            spectral_norm(&Mat::from_diag(&[3.0, -5.0])),
            5.0,
            epsilon = 1e-14
        );
        let nil = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(spectral_norm(&nil), 1.0, epsilon = 1e-14);
        let wide = Mat::from_row_slice(1, 3, &[3.0, 0.0, 4.0]);
        assert_abs_diff_eq!(spectral_norm(&wide), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_extrema_examples() {
        assert_eq!(eig_extrema_sym(&Mat::identity(2)).unwrap(), (1.0, 1.0));
        assert_eq!(
            eig_extrema_sym(&Mat::from_diag(&[-1.0, 7.0])).unwrap(),
            (-1.0, 7.0)
        );
        let (lo, hi) = eig_extrema_sym(&Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-14);
        let asym = Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            eig_extrema_sym(&asym),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn solve_linear_examples() {
        let b = Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(solve_linear(&Mat::identity(2), &b).unwrap(), b);
        let x = solve_linear(&Mat::from_diag(&[2.0, 4.0]), &Mat::identity(2)).unwrap();
        assert_mat_close(&x, &Mat::from_diag(&[0.5, 0.25]), 1e-15);
        let singular = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            solve_linear(&singular, &Mat::identity(2)),
            Err(LinalgError::Singular { .. })
        ));
        let nearly = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-15]);
        assert!(solve_linear(&nearly, &Mat::identity(2)).is_err());
    }

    #[test]
    fn spectral_radius_of_defective_block() {
        let j = Mat::from_row_slice(2, 2, &[0.9, 1.0, 0.0, 0.9]);
        assert_abs_diff_eq!(spectral_radius(&j), 0.9, epsilon = 1e-7);
        let rot = Mat::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert_abs_diff_eq!(spectral_radius(&rot), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn from_rows_validation() {
        assert_eq!(Mat::from_rows(&[]), Err(LinalgError::Empty));
        assert!(matches!(
            Mat::from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(LinalgError::DimensionMismatch(_))
        ));
        assert_eq!(
            Mat::from_rows(&[vec![f64::NAN]]),
            Err(LinalgError::NonFinite)
        );
    }

    #[test]
    fn pow_and_blocks() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(a.pow(0), Mat::identity(2));
        assert_eq!(a.pow(5), Mat::from_row_slice(2, 2, &[1.0, 5.0, 0.0, 1.0]));
        let z = Mat::from_blocks(
            &Mat::identity(1),
            &Mat::from_row_slice(1, 2, &[2.0, 3.0]),
            &Mat::zeros(2, 1),
            &Mat::identity(2),
        );
        assert_eq!(z.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(z.row(2), &[0.0, 0.0, 1.0]);
    }
}
