//! Dense row-major matrices and the factorizations the solvers need.

use num_traits::{Float, One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result, SrfeError};
use crate::scalar::{dot_c, Real, Scalar};

/// Output columns handled per task in `Aᴴv`. Fixed so the summation order,
/// and hence the result, does not depend on the thread count.
const COLUMN_BLOCK: usize = 512;

/// Dense `rows × cols` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err(format!(
                "{} entries for a {rows}×{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape_err("ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// All columns as contiguous vectors.
    pub fn columns(&self) -> Vec<Vec<S>> {
        let mut cols = vec![Vec::with_capacity(self.rows); self.cols];
        for i in 0..self.rows {
            for (col, &v) in cols.iter_mut().zip(self.row(i)) {
                col.push(v);
            }
        }
        cols
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(shape_err(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        let cols = self.cols.max(1);
        Ok(self
            .data
            .par_chunks(cols)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `Aᴴ v`.
    pub fn adjoint_mul_vec(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.rows {
            return Err(shape_err(format!(
                "vector of length {} for {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![S::zero(); self.cols];
        out.par_chunks_mut(COLUMN_BLOCK)
            .enumerate()
            .for_each(|(b, chunk)| {
                let start = b * COLUMN_BLOCK;
                for (i, &vi) in v.iter().enumerate() {
                    let row =
                        &self.data[i * self.cols + start..i * self.cols + start + chunk.len()];
                    for (o, &a) in chunk.iter_mut().zip(row) {
                        *o += a.conj() * vi;
                    }
                }
            });
        Ok(out)
    }

    /// `A Aᴴ`.
    pub fn gram_rows(&self) -> Self {
        let m = self.rows;
        let upper: Vec<Vec<S>> = (0..m)
            .into_par_iter()
            .map(|i| (i..m).map(|k| dot_c(self.row(k), self.row(i))).collect())
            .collect();
        let mut g = Self::zeros(m, m);
        for (i, vals) in upper.into_iter().enumerate() {
            for (off, v) in vals.into_iter().enumerate() {
                let k = i + off;
                g.set(i, k, v);
                g.set(k, i, v.conj());
            }
        }
        g
    }

    /// Columns `idx` as a new `rows × idx.len()` matrix.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }
}

/// Lower-triangular Cholesky factor `L` of a Hermitian positive definite
/// matrix `M = L Lᴴ`, with column append and removal for active-set methods.
#[derive(Debug, Clone)]
pub struct Cholesky<S> {
    n: usize,
    /// Row `i` holds `L[i][0..=i]`.
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn empty() -> Self {
        Self {
            n: 0,
            rows: Vec::new(),
        }
    }

    pub fn factor(m: &Matrix<S>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(shape_err("Cholesky needs a square matrix"));
        }
        let mut chol = Self::empty();
        for i in 0..m.rows() {
            let off: Vec<S> = (0..i).map(|k| m.get(k, i)).collect();
            chol.append(&off, m.get(i, i).re())?;
        }
        Ok(chol)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds a row/column with off-diagonal part `b = M[0..n, n]` and diagonal
    /// `diag`. Fails, leaving the factor unchanged, when the extended matrix is
    /// not numerically positive definite.
    pub fn append(&mut self, b: &[S], diag: S::Real) -> Result<()> {
        debug_assert_eq!(b.len(), self.n);
        let w = self.solve_lower(b);
        let w_sq: S::Real = w.iter().map(|x| x.norm_sqr()).sum();
        let pivot = diag - w_sq;
        let eps = S::Real::epsilon() * S::Real::of(16.0);
        if !(pivot > eps * diag.abs()) || !pivot.is_finite() {
            return Err(SrfeError::Numerical(format!(
                "matrix is not positive definite (pivot {:e})",
                pivot.as_f64()
            )));
        }
        let mut row: Vec<S> = w.into_iter().map(|x| x.conj()).collect();
        row.push(S::from_real(pivot.sqrt()));
        self.rows.push(row);
        self.n += 1;
        Ok(())
    }

    /// Removes row/column `k` of `M` and refactors the trailing block with a
    /// rank-one update.
    pub fn remove(&mut self, k: usize) {
        assert!(k < self.n);
        // Column k below the diagonal becomes the update vector.
        let mut x: Vec<S> = (k + 1..self.n).map(|i| self.rows[i][k]).collect();
        self.rows.remove(k);
        for row in self.rows.iter_mut().skip(k) {
            row.remove(k);
        }
        self.n -= 1;
        // Trailing block L33 L33ᴴ + x xᴴ.
        for (t, p) in (k..self.n).enumerate() {
            let lpp = self.rows[p][p].re();
            let xp = x[t];
            let r = (lpp * lpp + xp.norm_sqr()).sqrt();
            let c = r / lpp;
            let s = xp.scale(lpp.recip());
            self.rows[p][p] = S::from_real(r);
            for (u, i) in (p + 1..self.n).enumerate() {
                let t_i = t + 1 + u;
                let lip = self.rows[i][p];
                let xi = x[t_i];
                self.rows[i][p] = (lip + xi * s.conj()).scale(c.recip());
                x[t_i] = (xi.scale(lpp) - lip * xp).scale(r.recip());
            }
        }
    }

    /// Solves `L w = b`.
    pub fn solve_lower(&self, b: &[S]) -> Vec<S> {
        let mut w = b.to_vec();
        for i in 0..self.n {
            let row = &self.rows[i];
            let mut acc = w[i];
            for k in 0..i {
                acc -= row[k] * w[k];
            }
            w[i] = acc / row[i];
        }
        w
    }

    /// Solves `Lᴴ x = w`.
    pub fn solve_upper(&self, w: &[S]) -> Vec<S> {
        let mut x = w.to_vec();
        for i in (0..self.n).rev() {
            let xi = x[i] / self.rows[i][i].conj();
            x[i] = xi;
            for k in 0..i {
                x[k] -= self.rows[i][k].conj() * xi;
            }
        }
        x
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// Reconstructs `L` as a dense matrix.
    pub fn lower(&self) -> Matrix<S> {
        Matrix::from_fn(self.n, self.n, |i, j| {
            if j <= i {
                self.rows[i][j]
            } else {
                S::zero()
            }
        })
    }
}

/// Solves the dense real system `M x = b` (row-major `M`) by Gaussian
/// elimination with partial pivoting. `None` if `M` is numerically singular.
pub fn lu_solve<R: Real>(mut m: Vec<R>, mut b: Vec<R>) -> Option<Vec<R>> {
    let n = b.len();
    debug_assert_eq!(m.len(), n * n);
    let scale = m.iter().fold(R::zero(), |a, &v| a.max(v.abs()));
    let tiny = scale * R::epsilon() * R::of(n.max(1) as f64);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().partial_cmp(&m[j * n + k].abs()).unwrap())
            .unwrap();
        if !(m[p * n + k].abs() > tiny) {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            if f == R::zero() {
                continue;
            }
            for j in k..n {
                let t = m[k * n + j];
                m[i * n + j] -= f * t;
            }
            let t = b[k];
            b[i] -= f * t;
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= m[k * n + j] * b[j];
        }
        b[k] = acc / m[k * n + k];
    }
    Some(b)
}

/// Thin QR factorization `A_S = Q R` of a growing and shrinking set of
/// columns. Columns are orthogonalized directly, so the conditioning of `R` is
/// that of `A_S` rather than of its Gram matrix.
#[derive(Debug, Clone)]
pub struct ColumnQr<S> {
    m: usize,
    q: Vec<Vec<S>>,
    /// `r[j]` holds column `j` of `R`, rows `0..=j`.
    r: Vec<Vec<S>>,
}

impl<S: Scalar> ColumnQr<S> {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            q: Vec::new(),
            r: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    /// Appends column `a`. Fails, leaving the factor unchanged, when the part
    /// of `a` orthogonal to the current columns is below `tol·‖a‖`.
    pub fn append(&mut self, a: &[S], tol: S::Real) -> Result<()> {
        if a.len() != self.m {
            return Err(shape_err(format!(
                "column of length {} for {} rows",
                a.len(),
                self.m
            )));
        }
        let k = self.q.len();
        let mut v = a.to_vec();
        let mut coef = vec![S::zero(); k + 1];
        // Two passes of Gram-Schmidt keep Q orthonormal to working precision.
        for _ in 0..2 {
            for (qi, ci) in self.q.iter().zip(coef.iter_mut()) {
                let h = dot_c(qi, &v);
                *ci += h;
                for (vj, &qj) in v.iter_mut().zip(qi) {
                    *vj -= qj * h;
                }
            }
        }
        let an = a.iter().map(|x| x.norm_sqr()).sum::<S::Real>().sqrt();
        let vn = v.iter().map(|x| x.norm_sqr()).sum::<S::Real>().sqrt();
        if !(vn > tol * an) || !vn.is_finite() {
            return Err(SrfeError::Numerical(format!(
                "column is dependent on the active set (relative residual {:e})",
                (vn / an).as_f64()
            )));
        }
        let inv = vn.recip();
        self.q.push(v.into_iter().map(|x| x.scale(inv)).collect());
        coef[k] = S::from_real(vn);
        self.r.push(coef);
        Ok(())
    }

    /// Drops column `i` and restores the triangular form with Givens
    /// rotations, applied to `Q` as well.
    pub fn remove(&mut self, i: usize) {
        let k = self.r.len();
        assert!(i < k, "column {i} out of range");
        self.r.remove(i);
        for p in i..k - 1 {
            let x = self.r[p][p];
            let y = self.r[p][p + 1];
            let nx = x.modulus();
            let rho = (nx * nx + y.norm_sqr()).sqrt();
            if rho == S::Real::zero() {
                continue;
            }
            let (c, s) = if nx == S::Real::zero() {
                (S::Real::zero(), y.conj().scale(rho.recip()))
            } else {
                let phase = x.scale(nx.recip());
                (nx / rho, phase * y.conj().scale(rho.recip()))
            };
            for col in self.r[p..].iter_mut() {
                let (u, w) = (col[p], col[p + 1]);
                col[p] = u.scale(c) + s * w;
                col[p + 1] = w.scale(c) - s.conj() * u;
            }
            let (left, right) = self.q.split_at_mut(p + 1);
            let (qp, qn) = (&mut left[p], &mut right[0]);
            for (a, b) in qp.iter_mut().zip(qn.iter_mut()) {
                let (u, w) = (*a, *b);
                *a = u.scale(c) + s.conj() * w;
                *b = w.scale(c) - s * u;
            }
        }
        for (p, col) in self.r.iter_mut().enumerate().skip(i) {
            col.truncate(p + 1);
        }
        self.q.pop();
    }

    /// Solves `A_Sᴴ A_S x = b`, i.e. `Rᴴ R x = b`.
    pub fn solve_normal(&self, b: &[S]) -> Vec<S> {
        let k = self.r.len();
        debug_assert_eq!(b.len(), k);
        // Rᴴ z = b, forward.
        let mut z = b.to_vec();
        for j in 0..k {
            let mut acc = z[j];
            for i in 0..j {
                acc -= self.r[j][i].conj() * z[i];
            }
            z[j] = acc / self.r[j][j].conj();
        }
        // R x = z, backward.
        for j in (0..k).rev() {
            let xj = z[j] / self.r[j][j];
            z[j] = xj;
            for i in 0..j {
                let t = self.r[j][i] * xj;
                z[i] -= t;
            }
        }
        z
    }

    /// `R` as a dense matrix.
    pub fn r_matrix(&self) -> Matrix<S> {
        let k = self.r.len();
        Matrix::from_fn(k, k, |i, j| if i <= j { self.r[j][i] } else { S::zero() })
    }

    /// `Q` as a dense `m × k` matrix.
    pub fn q_matrix(&self) -> Matrix<S> {
        Matrix::from_fn(self.m, self.q.len(), |i, j| self.q[j][i])
    }
}

/// Largest singular value of `A` estimated by power iteration on `AᴴA`.
pub fn spectral_norm<S: Scalar>(a: &Matrix<S>, iters: usize) -> S::Real {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return S::Real::zero();
    }
    let mut x: Vec<S> = (0..n)
        .map(|j| S::from_real(S::Real::one() + S::Real::of(j as f64 * 1e-3)))
        .collect();
    let mut sigma = S::Real::zero();
    for _ in 0..iters {
        let nx = crate::scalar::norm2(&x);
        if nx == S::Real::zero() {
            return S::Real::zero();
        }
        for v in &mut x {
            *v = v.scale(nx.recip());
        }
        let ax = a.mul_vec(&x).expect("shape");
        sigma = crate::scalar::norm2(&ax);
        x = a.adjoint_mul_vec(&ax).expect("shape");
    }
    sigma
}
