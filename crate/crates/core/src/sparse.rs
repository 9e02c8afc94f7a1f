//! Sparse matrices in triplet/compressed-row form.
//!
//! Two instantiations are used throughout the crate: [`IncidenceMatrix`]
//! holds integer boundary/derivative operators so that identities such as
//! the boundary of a boundary vanishing hold exactly, and
//! [`SparseOperator`] holds real-valued operators (Hodge stars, stiffness
//! matrices).

use std::fmt::Display;
use std::io::{self, Write};
use std::ops::{AddAssign, Mul, Neg};

use num_traits::Zero;
use thiserror::Error;

/// Real-valued sparse operator.
pub type SparseOperator = SparseMatrix<f64>;
/// Integer incidence matrix (boundary operators and derivatives).
pub type IncidenceMatrix = SparseMatrix<i32>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SparseError {
    #[error("entry ({row}, {col}) is outside a {rows}x{cols} matrix")]
    EntryOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

/// Sparse matrix stored row-compressed with sorted column indices.
///
/// Duplicate coordinates are summed and exact zeros are dropped when the
/// matrix is built, so the stored entry list is canonical for a given
/// logical matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T> SparseMatrix<T>
where
    T: Copy + PartialEq + Zero + AddAssign,
{
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, T)>,
    ) -> Result<Self, SparseError> {
        for &(r, c, _) in &triplets {
            if r >= rows || c >= cols {
                return Err(SparseError::EntryOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        Ok(Self::finalize(rows, cols, triplets))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Square diagonal matrix; zero diagonal entries are not stored.
    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let triplets = entries
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect();
        Self::finalize(n, n, triplets)
    }

    fn finalize(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        // Stable sort keeps duplicate accumulation in insertion order,
        // which makes floating-point sums reproducible.
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut rows_seen: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != T::zero() {
                rows_seen.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        for &r in &rows_seen {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// Entry at (row, col), zero if not stored.
    pub fn get(&self, row: usize, col: usize) -> T {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => T::zero(),
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[row]..self.row_ptr[row + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.entries().map(|(r, c, v)| (c, r, v)).collect();
        Self::finalize(self.cols, self.rows, triplets)
    }

    /// Write the coordinate-triplet text form: a header line
    /// `rows cols nnz` followed by one `row col value` line per entry.
    pub fn write_triplets(&self, mut w: impl Write) -> io::Result<()>
    where
        T: Display,
    {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{r} {c} {v}")?;
        }
        Ok(())
    }

    pub fn to_triplet_string(&self) -> String
    where
        T: Display,
    {
        let mut out = Vec::new();
        self.write_triplets(&mut out)
            .expect("write to Vec cannot fail");
        String::from_utf8(out).expect("triplet text is ASCII")
    }
}

impl<T> SparseMatrix<T>
where
    T: Copy + PartialEq + Zero + AddAssign + Mul<Output = T>,
{
    /// Sparse matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "dimension mismatch in sparse product: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut triplets = Vec::new();
        let mut scratch: Vec<T> = vec![T::zero(); rhs.cols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if scratch[c] == T::zero() && !touched.contains(&c) {
                        touched.push(c);
                    }
                    scratch[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                triplets.push((r, c, scratch[c]));
                scratch[c] = T::zero();
            }
            touched.clear();
        }
        Self::finalize(self.rows, rhs.cols, triplets)
    }

    pub fn scaled(&self, s: T) -> Self {
        let triplets = self.entries().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::finalize(self.rows, self.cols, triplets)
    }
}

impl<T> Neg for &SparseMatrix<T>
where
    T: Copy + PartialEq + Zero + AddAssign + Neg<Output = T>,
{
    type Output = SparseMatrix<T>;
    fn neg(self) -> SparseMatrix<T> {
        let triplets = self.entries().map(|(r, c, v)| (r, c, -v)).collect();
        SparseMatrix::finalize(self.rows, self.cols, triplets)
    }
}

impl SparseMatrix<i32> {
    pub fn to_real(&self) -> SparseOperator {
        let triplets = self.entries().map(|(r, c, v)| (r, c, v as f64)).collect();
        SparseMatrix::finalize(self.rows, self.cols, triplets)
    }

    /// Apply the integer operator to a real vector; products are exact.
    pub fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in apply_real");
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for (c, a) in self.row(r) {
                acc += a as f64 * v[c];
            }
            out[r] = acc;
        }
        out
    }
}

impl SparseMatrix<f64> {
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matvec");
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for (c, a) in self.row(r) {
                acc += a * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|` over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        assert_eq!(
            self.rows, self.cols,
            "symmetry is defined for square matrices"
        );
        let mut worst: f64 = 0.0;
        for (r, c, v) in self.entries() {
            worst = worst.max((v - self.get(c, r)).abs());
        }
        worst
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.rows];
        for (r, _, v) in self.entries() {
            sums[r] += v;
        }
        sums
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 0, 1.0),
                (0, 0, 2.0),
                (1, 1, 3.0),
                (1, 1, -3.0),
                (0, 1, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let err = SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).unwrap_err();
        assert_eq!(
            err,
            SparseError::EntryOutOfBounds {
                row: 2,
                col: 0,
                rows: 2,
                cols: 2
            }
        );
    }

    #[test]
    fn transpose_roundtrip() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 2, 1.5), (1, 0, -2.0), (1, 2, 4.0)])
            .unwrap();
        let t = m.transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        assert_eq!(t.get(2, 0), 1.5);
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)])
            .unwrap();
        let b =
            SparseMatrix::from_triplets(3, 2, vec![(0, 0, 3.0), (1, 0, 1.0), (2, 1, 5.0)]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 3.0);
        assert_eq!(c.get(0, 1), 10.0);
        assert_eq!(c.get(1, 0), -1.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn integer_product_is_exact() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 2), (0, 1, -2), (1, 0, 1)]).unwrap();
        let b = SparseMatrix::from_triplets(2, 1, vec![(0, 0, 1), (1, 0, 1)]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 0);
        assert_eq!(c.nnz(), 1);
    }

    #[test]
    fn matvec_and_diagonal() {
        let d = SparseMatrix::diagonal(&[1.0, 0.0, 2.0]);
        assert_eq!(d.nnz(), 2);
        assert_eq!(d.matvec(&[3.0, 5.0, 7.0]), vec![3.0, 0.0, 14.0]);
    }

    #[test]
    fn triplet_text_has_header_and_entries() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 2.5), (1, 0, -1.0)]).unwrap();
        let text = m.to_triplet_string();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("2 2 2"));
        assert_eq!(lines.next(), Some("0 1 2.5"));
        assert_eq!(lines.next(), Some("1 0 -1"));
    }
}
