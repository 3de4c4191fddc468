//! Small dense and sparse linear algebra used throughout the crate.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
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

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn mul_vec_transpose(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// `shift * I - self`.
    pub fn shifted_negation(&self, shift: f64) -> Matrix {
        let mut m = self.scaled(-1.0);
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += shift;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        self.transpose().norm_inf()
    }

    /// Numerical rank by Gaussian elimination with complete pivoting.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a = self.clone();
        let scale = a.max_abs().max(1.0);
        let (m, n) = (a.rows, a.cols);
        let mut rank = 0;
        let mut col_used = vec![false; n];
        let mut row_used = vec![false; m];
        for _ in 0..m.min(n) {
            let mut best = (0.0, 0, 0);
            for i in (0..m).filter(|i| !row_used[*i]) {
                for j in (0..n).filter(|j| !col_used[*j]) {
                    let v = a[(i, j)].abs();
                    if v > best.0 {
                        best = (v, i, j);
                    }
                }
            }
            if best.0 <= tol * scale {
                break;
            }
            let (_, pi, pj) = best;
            row_used[pi] = true;
            col_used[pj] = true;
            rank += 1;
            let piv = a[(pi, pj)];
            for i in (0..m).filter(|i| !row_used[*i]) {
                let f = a[(i, pj)] / piv;
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = a[(pi, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        rank
    }

    /// Orthonormal-free basis of the null space via reduced row echelon form.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<f64>> {
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let scale = a.max_abs().max(1.0);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r >= m {
                break;
            }
            let (pi, pv) = (r..m)
                .map(|i| (i, a[(i, c)].abs()))
                .fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
            if pv <= tol * scale {
                continue;
            }
            for j in 0..n {
                a.data.swap(pi * n + j, r * n + j);
            }
            let piv = a[(r, c)];
            for j in 0..n {
                a[(r, j)] /= piv;
            }
            for i in 0..m {
                if i != r {
                    let f = a[(i, c)];
                    if f != 0.0 {
                        for j in 0..n {
                            let v = a[(r, j)];
                            a[(i, j)] -= f * v;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0.0; n];
                v[fc] = 1.0;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -a[(row, fc)];
                }
                v
            })
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Self> {
        check_dim(a.rows(), a.cols())?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |b, x| if x.1 > b.1 { x } else { b });
            if pv <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] -= f * v;
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(j, i)] * y[j]).sum();
            y[i] = (y[i] - s) / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(j, i)] * y[j]).sum();
            y[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// A linear map between coordinate spaces.
pub trait LinearOperator {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64>;

    /// Dense representation, column by column.
    fn to_dense(&self) -> Matrix {
        let (m, n) = (self.output_dim(), self.input_dim());
        let mut out = Matrix::zeros(m, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            e[j] = 0.0;
            for i in 0..m {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

impl LinearOperator for Matrix {
    fn input_dim(&self) -> usize {
        self.cols
    }
    fn output_dim(&self) -> usize {
        self.rows
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.mul_vec_transpose(y)
    }
    fn to_dense(&self) -> Matrix {
        self.clone()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (**self).apply_transpose(y)
    }
}

/// Identity on `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    cols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, cols: usize) -> Self {
        debug_assert!(rows.iter().flatten().all(|(j, _)| *j < cols));
        SparseMatrix { cols, rows }
    }

    pub fn row_entries(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.rows.iter().flatten().fold(f64::INFINITY, |m, (_, v)| m.min(*v))
    }

    /// Product `self * other`.
    pub fn compose(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows.len());
        let mut acc = vec![0.0; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for &(k, a) in row {
                    for &(j, b) in &other.rows[k] {
                        if acc[j] == 0.0 && !touched.contains(&j) {
                            touched.push(j);
                        }
                        acc[j] += a * b;
                    }
                }
                touched.sort_unstable();
                let out: Vec<(usize, f64)> = touched.iter().map(|&j| (j, acc[j])).collect();
                for &j in &touched {
                    acc[j] = 0.0;
                }
                touched.clear();
                out
            })
            .collect();
        SparseMatrix { cols: other.cols, rows }
    }
}

impl LinearOperator for SparseMatrix {
    fn input_dim(&self) -> usize {
        self.cols
    }
    fn output_dim(&self) -> usize {
        self.rows.len()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|(j, a)| a * x[*j]).sum()).collect()
    }
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, yi) in self.rows.iter().zip(y) {
            for (j, a) in row {
                out[*j] += a * yi;
            }
        }
        out
    }
}

/// `scale * (shift - A)^{-1}` applied through a stored factorization.
#[derive(Debug, Clone)]
pub struct ScaledInverse {
    lu: Lu,
    scale: f64,
}

impl ScaledInverse {
    pub fn new(a: &Matrix, shift: f64, scale: f64) -> Result<Self> {
        Ok(ScaledInverse { lu: Lu::new(&a.shifted_negation(shift))?, scale })
    }
}

impl LinearOperator for ScaledInverse {
    fn input_dim(&self) -> usize {
        self.lu.dim()
    }
    fn output_dim(&self) -> usize {
        self.lu.dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.lu.solve(x);
        v.iter_mut().for_each(|e| *e *= self.scale);
        v
    }
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut v = self.lu.solve_transpose(y);
        v.iter_mut().for_each(|e| *e *= self.scale);
        v
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn abs(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| x.abs()).collect()
}

pub fn positive_part(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| x.max(0.0)).collect()
}

pub fn negative_part(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| (-x).max(0.0)).collect()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_inverts() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 2.0, 5.0]])
            .unwrap();
        let lu = Lu::new(&a).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let r = sub(&a.mul_vec(&x), &[1.0, 2.0, 3.0]);
        assert!(norm_inf(&r) < 1e-14);
        let xt = lu.solve_transpose(&[1.0, 2.0, 3.0]);
        let rt = sub(&a.mul_vec_transpose(&xt), &[1.0, 2.0, 3.0]);
        assert!(norm_inf(&rt) < 1e-14);
        let prod = a.matmul(&lu.inverse());
        assert!(prod.sub(&Matrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(Lu::new(&a).unwrap_err(), Error::Singular);
    }

    #[test]
    fn rank_and_null_space() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        assert_eq!(a.rank(1e-12), 2);
        let ns = a.null_space(1e-12);
        assert_eq!(ns.len(), 1);
        assert!(norm_inf(&a.mul_vec(&ns[0])) < 1e-14);
    }

    #[test]
    fn sparse_compose_matches_dense() {
        let a = SparseMatrix::new(vec![vec![(0, 1.0), (2, 2.0)], vec![(1, 3.0)]], 3);
        let b = SparseMatrix::new(vec![vec![(0, 1.0)], vec![(0, 1.0), (1, 1.0)], vec![(1, -1.0)]], 2);
        let c = a.compose(&b).to_dense();
        let expect = a.to_dense().matmul(&b.to_dense());
        assert_eq!(c, expect);
    }
}
