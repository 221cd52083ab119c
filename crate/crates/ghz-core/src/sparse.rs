//! Coordinate-format complex sparse matrices.
//!
//! Operator sizes here are tiny (a few hundred rows at most) and the
//! products needed are `A·ρ`, `ρ·A†` and `A·ρ·A†` against a dense ρ, so a
//! sorted triplet list is all the structure we need.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    /// Sorted by (row, col), no duplicates, no explicit zeros.
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_triplets(n, n, values.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut t: Vec<_> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
        }
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2 != C64::new(0.0, 0.0));
        Self { rows, cols, entries }
    }

    pub fn from_dense(m: &DMatrix<C64>, drop_below: f64) -> Self {
        let mut t = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)].norm() > drop_below {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries.binary_search_by_key(&(r, c), |&(a, b, _)| (a, b)).map(|i| self.entries[i].2).unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zeros(self.rows, self.cols);
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_triplets(self.rows, self.cols, self.entries.iter().chain(other.entries.iter()).copied())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); other.rows];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut t = Vec::new();
        for &(r, k, a) in &self.entries {
            for &(c, b) in &by_row[k] {
                t.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.rows, other.cols, t)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.cols);
        let mut y = DVector::zeros(self.rows);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// max |A − A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.add(&self.adjoint().scale(C64::new(-1.0, 0.0)));
        d.max_abs()
    }

    /// True when every entry is on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c, _)| r == c)
    }

    /// `out += A · ρ · A†` with ρ column-major and square.
    pub(crate) fn sandwich_acc(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.cols;
        for &(i, k, a) in &self.entries {
            for &(j, l, b) in &self.entries {
                out[i + j * d] += a * rho[k + l * d] * b.conj();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_merge_and_zeros_vanish() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (1, 0, c(0.0, 2.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c(0.0, 2.0));
    }

    #[test]
    fn products_match_dense() {
        let a = SparseMatrix::from_triplets(3, 3, [(0, 1, c(1.0, 1.0)), (2, 0, c(0.5, 0.0))]);
        let b = SparseMatrix::from_triplets(3, 3, [(1, 2, c(2.0, 0.0)), (0, 0, c(0.0, -1.0))]);
        let dense = a.to_dense() * b.to_dense();
        assert!((a.matmul(&b).to_dense() - dense).camax() < 1e-15);

        let rho = DMatrix::from_fn(3, 3, |r, c2| c((r + 2 * c2) as f64, r as f64 - c2 as f64));
        let mut out = vec![C64::default(); 9];
        a.sandwich_acc(rho.as_slice(), &mut out);
        let expect = a.to_dense() * &rho * a.to_dense().adjoint();
        let got = DMatrix::from_column_slice(3, 3, &out);
        assert!((got - expect).camax() < 1e-13);
    }
}
