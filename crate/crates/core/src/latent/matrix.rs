use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn diag(values: &[S]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { S::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[S]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let lhs = self.row(k);
            let rhs = other.row(k);
            for (i, &a) in lhs.iter().enumerate() {
                if a == S::zero() {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(rhs) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v`.
    pub fn t_mat_vec(&self, v: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * vi;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn frobenius(&self) -> S {
        self.frobenius_sq().sqrt()
    }

    pub fn frobenius_sq(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, &x| acc + x * x)
    }

    pub fn mean(&self) -> S {
        if self.data.is_empty() {
            return S::zero();
        }
        self.data.iter().fold(S::zero(), |a, &b| a + b) / S::of_usize(self.data.len())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn min_value(&self) -> Option<S> {
        self.data.iter().copied().reduce(|a, b| a.min(b))
    }

    pub fn scale(&self, c: S) -> Self {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * c).collect() }
    }

    /// Columns rescaled to unit L2 norm; zero columns are left as is.
    pub fn normalize_columns(&self) -> Self {
        let mut out = self.clone();
        for j in 0..self.cols {
            let n = norm(&self.column(j));
            if n > S::zero() {
                for i in 0..self.rows {
                    out[(i, j)] = self[(i, j)] / n;
                }
            }
        }
        out
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }
}

impl<S> Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for DenseMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

pub fn cosine<S: Scalar>(a: &[S], b: &[S]) -> S {
    let d = norm(a) * norm(b);
    if d > S::zero() {
        dot(a, b) / d
    } else {
        S::zero()
    }
}

/// Orthonormalize the columns in place (Gram-Schmidt, two passes). Columns
/// that vanish are replaced by standard basis vectors orthogonal to the rest.
pub fn orthonormalize_columns<S: Scalar>(m: &mut DenseMatrix<S>) {
    let rows = m.rows();
    let mut basis: Vec<Vec<S>> = Vec::with_capacity(m.cols());
    let scale = m.frobenius().max(S::one());
    let tiny = S::epsilon() * S::lit(16.0) * scale;
    let mut next_unit = 0usize;
    for j in 0..m.cols() {
        let mut v = m.column(j);
        let original = norm(&v);
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = *x - p * y;
                }
            }
        }
        let mut n = norm(&v);
        if n <= tiny || n <= original * S::lit(1e-10) {
            // Degenerate column: try unit vectors until one survives projection.
            loop {
                assert!(next_unit < rows, "cannot complete an orthonormal basis");
                let mut e = vec![S::zero(); rows];
                e[next_unit] = S::one();
                next_unit += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let p = dot(&e, b);
                        for (x, &y) in e.iter_mut().zip(b) {
                            *x = *x - p * y;
                        }
                    }
                }
                let en = norm(&e);
                if en > S::lit(1e-3) {
                    v = e;
                    n = en;
                    break;
                }
            }
        }
        for x in v.iter_mut() {
            *x = *x / n;
        }
        m.set_column(j, &v);
        basis.push(v);
    }
}

/// Solve `a · x = b` for square `a` by Gaussian elimination with partial
/// pivoting. `None` when `a` is numerically singular.
pub fn solve<S: Scalar>(a: &DenseMatrix<S>, b: &[S]) -> Option<Vec<S>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.as_slice().iter().fold(S::zero(), |acc, v| acc.max(v.abs()));
    let tiny = S::epsilon() * S::of_usize(n.max(1)) * scale * S::lit(10.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[(i, col)].abs().partial_cmp(&m[(j, col)].abs()).unwrap())?;
        if m[(pivot, col)].abs() <= tiny {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = t;
            }
            x.swap(col, pivot);
        }
        for i in col + 1..n {
            let f = m[(i, col)] / m[(col, col)];
            if f == S::zero() {
                continue;
            }
            for j in col..n {
                m[(i, j)] = m[(i, j)] - f * m[(col, j)];
            }
            x[i] = x[i] - f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc = acc - m[(i, j)] * x[j];
        }
        x[i] = acc / m[(i, i)];
    }
    Some(x)
}
