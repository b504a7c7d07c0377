//! Dense matrices over a [`Scalar`] backend.
//!
//! Enough linear algebra for operator bookkeeping on small spaces: products,
//! row reduction, rank, null spaces and span comparisons. Elimination is
//! exact on rational backends; on floats, pivots are chosen by magnitude and
//! zero tests use the backend tolerance, which is what decides ranks.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>, // row-major
}

impl<S: Scalar> Matrix<S> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out: Matrix<S> = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a.clone() * other.at(k, j).clone();
                    *out.at_mut(i, j) = out.at(i, j).clone() + add;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                S::sum_of(
                    self.row(i)
                        .iter()
                        .zip(v)
                        .map(|(a, b)| a.clone() * b.clone()),
                )
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, factor: &S) -> Matrix<S> {
        let data = self.data.iter().map(|a| a.clone() * factor.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Entrywise backend equality.
    pub fn eq_matrix(&self, other: &Matrix<S>) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self.data.iter().zip(&other.data).all(|(a, b)| a.eq_scalar(b))
    }

    /// Largest absolute entry of the difference, as a rough residual.
    pub fn max_abs_diff(&self, other: &Matrix<S>) -> S {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(S::zero(), S::max_scalar)
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    ///
    /// Exact backends take the first non-zero pivot in each column; the
    /// float backend takes the largest by magnitude. Entries that are zero
    /// up to the backend tolerance are treated as zero.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let pivot_row = if S::EXACT {
                (row..self.rows).find(|&r| !self.at(r, col).eq_scalar(&S::zero()))
            } else {
                let best = (row..self.rows)
                    .max_by(|&a, &b| {
                        self.at(a, col).abs().cmp_scalar(&self.at(b, col).abs())
                    })
                    .filter(|&r| !self.at(r, col).eq_scalar(&S::zero()));
                best
            };
            let Some(pr) = pivot_row else { continue };
            self.swap_rows(row, pr);
            let inv = S::one() / self.at(row, col).clone();
            for j in col..self.cols {
                *self.at_mut(row, j) = self.at(row, j).clone() * inv.clone();
            }
            for r in 0..self.rows {
                if r == row || self.at(r, col).is_zero() {
                    continue;
                }
                let factor = self.at(r, col).clone();
                for j in col..self.cols {
                    let delta = factor.clone() * self.at(row, j).clone();
                    *self.at_mut(r, j) = self.at(r, j).clone() - delta;
                }
                // Force the eliminated entry to an exact zero so float
                // residue cannot masquerade as a new pivot later.
                *self.at_mut(r, col) = S::zero();
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.rref().len()
    }

    /// A basis of `{ x : self * x = 0 }`, one vector per free column,
    /// in the standard free-variable parametrization.
    pub fn null_space_basis(&self) -> Vec<Vec<S>> {
        let mut work = self.clone();
        let pivots = work.rref();
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = Some(r);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut vec = vec![S::zero(); self.cols];
            vec[free] = S::one();
            for (r, &c) in pivots.iter().enumerate() {
                vec[c] = S::zero() - work.at(r, free).clone();
            }
            basis.push(vec);
        }
        basis
    }

    /// A canonical basis of the row space: the non-zero rows of the RREF.
    pub fn row_space_basis(&self) -> Vec<Vec<S>> {
        let mut work = self.clone();
        let pivots = work.rref();
        (0..pivots.len()).map(|r| work.row(r).to_vec()).collect()
    }
}

/// Do two row sets span the same subspace? Decided by three rank
/// computations: rank A = rank B = rank (A stacked on B).
pub fn same_row_span<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>], dim: usize) -> bool {
    let ra = Matrix::from_rows(pad(a, dim)).rank();
    let rb = Matrix::from_rows(pad(b, dim)).rank();
    let mut stacked = pad(a, dim);
    stacked.extend(pad(b, dim));
    let rs = Matrix::from_rows(stacked).rank();
    ra == rb && rb == rs
}

fn pad<S: Scalar>(rows: &[Vec<S>], dim: usize) -> Vec<Vec<S>> {
    if rows.is_empty() {
        // A rank-0 stand-in so `from_rows` knows the width.
        return vec![vec![S::zero(); dim]];
    }
    rows.iter()
        .map(|r| {
            assert_eq!(r.len(), dim, "row width mismatch");
            r.clone()
        })
        .collect()
}
