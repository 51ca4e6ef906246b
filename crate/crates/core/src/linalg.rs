//! Sparse exact matrices over the Gaussian rationals.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub type Vector = Vec<Scalar>;

/// Row-major sparse matrix. Zero entries are never stored, so structural
/// equality is numerical equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Scalar>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, scalar::one());
        }
        m
    }

    pub fn diagonal(entries: &[Scalar]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, z) in entries.iter().enumerate() {
            m.set(i, i, z.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::Shape(format!("ragged matrix: row {i} has {} entries, expected {c}", row.len())));
            }
            for (j, z) in row.into_iter().enumerate() {
                m.set(i, j, z);
            }
        }
        Ok(m)
    }

    /// Matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), rows);
            for (i, z) in col.iter().enumerate() {
                if !z.is_zero() {
                    m.data[i].insert(j, z.clone());
                }
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.data[i].get(&j).cloned().unwrap_or_else(scalar::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, z: Scalar) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        if z.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, z);
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, z: &Scalar) {
        if z.is_zero() {
            return;
        }
        let row = &mut self.data[i];
        let cur = row.remove(&j).unwrap_or_else(scalar::zero) + z;
        if !cur.is_zero() {
            row.insert(j, cur);
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &Scalar)> {
        self.data[i].iter().map(|(j, z)| (*j, z))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.data.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |(j, z)| (i, *j, z)))
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BTreeMap::is_empty)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    let p = a * b;
                    match acc.get_mut(j) {
                        Some(z) => *z += p,
                        None => {
                            acc.insert(*j, p);
                        }
                    }
                }
            }
            acc.retain(|_, z| !z.is_zero());
            out.data[i] = acc;
        }
        out
    }

    pub fn apply(&self, v: &[Scalar]) -> Vector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        self.data.iter().map(|row| row.iter().fold(scalar::zero(), |acc, (j, a)| acc + a * &v[*j])).collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix sum shape mismatch");
        let mut out = self.clone();
        for (i, j, z) in other.entries() {
            out.add_at(i, j, z);
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scale(&-scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        if c.is_zero() {
            return Matrix::zeros(self.rows, self.cols);
        }
        let data = self.data.iter().map(|row| row.iter().map(|(j, z)| (*j, z * c)).collect()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for (i, j, z) in self.entries() {
            out.data[j].insert(i, z.conj());
        }
        out
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).fold(scalar::zero(), |a, b| a + b)
    }

    /// Rows `row_idx` and columns `col_idx` of `self`, in the given order.
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> Matrix {
        let col_pos: BTreeMap<usize, usize> = col_idx.iter().enumerate().map(|(k, j)| (*j, k)).collect();
        let mut out = Matrix::zeros(row_idx.len(), col_idx.len());
        for (ri, &i) in row_idx.iter().enumerate() {
            for (j, z) in &self.data[i] {
                if let Some(&cj) = col_pos.get(j) {
                    out.data[ri].insert(cj, z.clone());
                }
            }
        }
        out
    }

    /// Writes `block` at offset `(r0, c0)`, adding to what is there.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for (i, j, z) in block.entries() {
            self.add_at(r0 + i, c0 + j, z);
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && *self == self.adjoint()
    }

    pub fn is_projection(&self) -> bool {
        self.is_hermitian() && self.mul(self) == *self
    }

    pub fn is_unitary(&self) -> bool {
        self.is_square()
            && self.mul(&self.adjoint()) == Matrix::identity(self.rows)
            && self.adjoint().mul(self) == Matrix::identity(self.rows)
    }

    pub fn to_c64(&self) -> DMatrix<Complex<f64>> {
        let mut m = DMatrix::from_element(self.rows, self.cols, Complex::new(0.0, 0.0));
        for (i, j, z) in self.entries() {
            m[(i, j)] = scalar::to_c64(z);
        }
        m
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.to_c64().singular_values().iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries().map(|(_, _, z)| scalar::to_c64(z).norm()).fold(0.0, f64::max)
    }

    /// Rank by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<Scalar>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j)).collect()).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = scalar::one() / rows[rank][col].clone();
            for c in col..self.cols {
                rows[rank][c] = &rows[rank][c] * &inv;
            }
            for r in 0..rows.len() {
                if r != rank && !rows[r][col].is_zero() {
                    let f = rows[r][col].clone();
                    for c in col..self.cols {
                        let d = &f * &rows[rank][c];
                        rows[r][c] -= d;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Exact inverse by Gauss-Jordan elimination, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                let mut row: Vec<Scalar> = (0..n).map(|j| self.get(i, j)).collect();
                row.extend((0..n).map(|j| if i == j { scalar::one() } else { scalar::zero() }));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            let inv = scalar::one() / a[col][col].clone();
            for c in 0..2 * n {
                a[col][c] = &a[col][c] * &inv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in 0..2 * n {
                        let d = &f * &a[col][c];
                        a[r][c] -= d;
                    }
                }
            }
        }
        let rows = a.into_iter().map(|row| row[n..].to_vec()).collect();
        Matrix::from_rows(rows).ok()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| serde_json::Value::Array((0..self.cols).map(|j| scalar::to_json(&self.get(i, j))).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Matrix> {
        let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let parsed = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(scalar::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(parsed)
    }
}

pub fn vec_is_zero(v: &[Scalar]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn vec_add(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Scalar], c: &Scalar) -> Vector {
    a.iter().map(|x| x * c).collect()
}

/// Standard sesquilinear pairing, conjugate-linear in `a`.
pub fn vec_dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(scalar::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![scalar::zero(); n];
    v[i] = scalar::one();
    v
}
