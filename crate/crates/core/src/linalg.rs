//! Dense exact linear algebra, generic over the scalar type.
//!
//! Everything here works for any [`Scalar`]; the rest of the crate
//! instantiates it at the exact rational [`crate::Rat`], where elimination
//! and solving are exact end to end.

use std::fmt;
use std::ops::Neg;

use num_traits::{Num, One, Zero};

/// Scalar bound for exact dense linear algebra: a commutative ring with
/// exact division on the values we divide by (a field in practice).
pub trait Scalar: Num + Neg<Output = Self> + Clone + PartialEq + fmt::Debug {}

impl<T> Scalar for T where T: Num + Neg<Output = T> + Clone + PartialEq + fmt::Debug {}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Build from rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged matrix rows");
            data.extend(row);
        }
        Matrix {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
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

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + a.clone() * b.clone());
                }
            }
        }
        out
    }

    /// Kronecker (tensor) product; the result has dimensions
    /// `(rows_a · rows_b) × (cols_a · cols_b)`.
    pub fn kronecker(&self, other: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                let a = self.get(i / other.rows, j / other.cols);
                let b = other.get(i % other.rows, j % other.cols);
                if a.is_zero() || b.is_zero() {
                    T::zero()
                } else {
                    a.clone() * b.clone()
                }
            },
        )
    }

    /// Direct sum: places `self` and `other` on the diagonal.
    pub fn block_diag(&self, other: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }
}

/// `v · M` for a row vector, skipping zero components of `v`.
pub fn row_times_matrix<T: Scalar>(v: &[T], m: &Matrix<T>) -> Vec<T> {
    assert_eq!(v.len(), m.rows(), "dimension mismatch");
    let mut out = vec![T::zero(); m.cols()];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for (j, slot) in out.iter_mut().enumerate() {
            let e = m.get(i, j);
            if !e.is_zero() {
                *slot = slot.clone() + vi.clone() * e.clone();
            }
        }
    }
    out
}

/// Dot product of equal-length slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc + x.clone() * y.clone();
        }
    }
    acc
}

/// Outcome of an exact linear solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Solve<T> {
    /// Full column rank and consistent: the unique solution.
    Unique(Vec<T>),
    /// The columns are linearly dependent on the given rows.
    Underdetermined,
    /// No solution exists.
    Inconsistent,
}

/// Solve `A x = b` by fraction-free Gaussian reduction (one-step Bareiss),
/// requiring full column rank for a `Unique` answer.
pub fn solve_exact<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Solve<T> {
    assert_eq!(a.rows(), b.len(), "dimension mismatch");
    let nrows = a.rows();
    let ncols = a.cols();
    let mut w: Vec<Vec<T>> = (0..nrows)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut prev_pivot = T::one();
    for col in 0..ncols {
        let Some(pivot_row) = (col..nrows).find(|&r| !w[r][col].is_zero()) else {
            return Solve::Underdetermined;
        };
        w.swap(col, pivot_row);
        let pivot = w[col][col].clone();
        for r in col + 1..nrows {
            let lead = w[r][col].clone();
            for c in col..=ncols {
                let v = pivot.clone() * w[r][c].clone() - lead.clone() * w[col][c].clone();
                // exact by the Bareiss identity: prev_pivot divides v
                w[r][c] = v / prev_pivot.clone();
            }
        }
        prev_pivot = pivot;
    }
    for row in w.iter().take(nrows).skip(ncols) {
        if !row[ncols].is_zero() {
            return Solve::Inconsistent;
        }
    }
    let mut solution = vec![T::zero(); ncols];
    for i in (0..ncols).rev() {
        let mut acc = w[i][ncols].clone();
        for j in i + 1..ncols {
            if !w[i][j].is_zero() && !solution[j].is_zero() {
                acc = acc - w[i][j].clone() * solution[j].clone();
            }
        }
        solution[i] = acc / w[i][i].clone();
    }
    Solve::Unique(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn r(n: i64) -> Rat {
        Rat::from(BigInt::from(n))
    }

    fn rq(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solve_unique() {
        let a = Matrix::from_rows(vec![vec![r(2), r(1)], vec![r(1), r(-1)], vec![r(3), r(0)]]);
        let b = vec![r(5), r(1), r(6)];
        assert_eq!(solve_exact(&a, &b), Solve::Unique(vec![r(2), r(1)]));
    }

    #[test]
    fn solve_inconsistent_and_dependent() {
        let a = Matrix::from_rows(vec![vec![r(1), r(1)], vec![r(1), r(1)]]);
        assert_eq!(solve_exact(&a, &[r(1), r(2)]), Solve::Underdetermined);
        let a = Matrix::from_rows(vec![vec![r(1), r(0)], vec![r(1), r(0)], vec![r(0), r(1)]]);
        assert_eq!(solve_exact(&a, &[r(1), r(2), r(0)]), Solve::Inconsistent);
    }

    #[test]
    fn solve_with_fractions() {
        let a = Matrix::from_rows(vec![vec![rq(1, 2), r(1)], vec![r(1), rq(-1, 3)]]);
        let b = vec![r(2), r(1)];
        match solve_exact(&a, &b) {
            Solve::Unique(x) => {
                assert_eq!(&x[0] * rq(1, 2) + &x[1] * r(1), r(2));
                assert_eq!(&x[0] * r(1) + &x[1] * rq(-1, 3), r(1));
            }
            other => panic!("expected unique solution, got {other:?}"),
        }
    }

    #[test]
    fn kronecker_dimensions_and_entries() {
        let a = Matrix::from_rows(vec![vec![r(1), r(2)], vec![r(3), r(4)]]);
        let b = Matrix::from_rows(vec![vec![r(0), r(5)], vec![r(6), r(7)]]);
        let k = a.kronecker(&b);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k.get(0, 1), &r(5));
        assert_eq!(k.get(2, 1), &r(15));
        assert_eq!(k.get(3, 3), &r(28));
    }

    #[test]
    fn block_diag_shape() {
        let a = Matrix::<Rat>::identity(2);
        let b = Matrix::<Rat>::identity(3);
        let d = a.block_diag(&b);
        assert_eq!((d.rows(), d.cols()), (5, 5));
        assert_eq!(d, Matrix::identity(5));
    }

    proptest! {
        // A returned Unique solution must satisfy every equation exactly.
        #[test]
        fn solve_is_a_solution(
            entries in prop::collection::vec(-6i64..6, 12),
            xs in prop::collection::vec(-6i64..6, 2),
        ) {
            let a = Matrix::from_fn(6, 2, |i, j| r(entries[i * 2 + j]));
            let x_true: Vec<Rat> = xs.iter().map(|&v| r(v)).collect();
            let b: Vec<Rat> = (0..6).map(|i| dot(a.row(i), &x_true)).collect();
            match solve_exact(&a, &b) {
                Solve::Unique(x) => {
                    for i in 0..6 {
                        prop_assert_eq!(dot(a.row(i), &x), b[i].clone());
                    }
                }
                Solve::Underdetermined => {} // rank-deficient draws are fine
                Solve::Inconsistent => prop_assert!(false, "constructed system must be consistent"),
            }
        }
    }
}
