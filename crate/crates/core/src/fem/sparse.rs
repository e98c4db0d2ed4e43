//! Compressed sparse row storage and a sparse LU wrapper.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds a CSR matrix summing duplicate entries; exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut iter = sorted.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if (r2, c2) != (r, c) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator { nrows, ncols, row_ptr, col_idx, values }
    }

    /// Matrix with a fixed pattern and zero values; entries need not be sorted.
    pub(crate) fn from_pattern(nrows: usize, ncols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        let nnz = col_idx.len();
        SparseOperator { nrows, ncols, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    /// Copy without explicitly stored zeros.
    pub fn pruned(&self) -> SparseOperator {
        let triplets: Vec<_> = (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect();
        SparseOperator::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|&(cc, _)| cc == c).map(|(_, v)| v).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `y += alpha * A x`
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.nrows) {
            let s: f64 = self.row(r).map(|(c, v)| v * x[c]).sum();
            *yr += alpha * s;
        }
    }

    pub fn transpose(&self) -> SparseOperator {
        let triplets: Vec<_> = (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (c, r, v)))
            .collect();
        SparseOperator::from_triplets(self.ncols, self.nrows, &triplets)
    }

    /// `y^T A x`
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        d
    }

    /// Largest entry of `|A - A^T|`.
    pub fn max_asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - t.get(r, c)).abs());
            }
            for (c, v) in t.row(r) {
                worst = worst.max((v - self.get(r, c)).abs());
            }
        }
        worst
    }
}

/// A direct solver that is factorized once and then applied to right-hand sides.
pub trait Factorization {
    fn factor(&mut self, a: &SparseOperator) -> Result<()>;
    fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()>;
}

impl Factorization for SparseLu {
    fn factor(&mut self, a: &SparseOperator) -> Result<()> {
        SparseLu::factor(self, a)
    }

    fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        SparseLu::solve_in_place(self, rhs)
    }
}

/// Sparse LU factorization that keeps the symbolic analysis across refactorizations.
///
/// The CSR arrays of `A` are the CSC arrays of `A^T`, so `A^T` is factorized
/// and systems with `A` are solved through the transposed factors.
#[derive(Default)]
pub struct SparseLu {
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    numeric: Option<Lu<usize, f64>>,
}

impl SparseLu {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn factor(&mut self, a: &SparseOperator) -> Result<()> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch { expected: a.nrows, got: a.ncols });
        }
        let n = a.nrows;
        let reuse = matches!(&self.symbolic, Some((rp, ci, _)) if rp == &a.row_ptr && ci == &a.col_idx);
        if !reuse {
            let pattern = SymbolicSparseColMatRef::new_unsorted_checked(n, n, &a.row_ptr, None, &a.col_idx);
            let sym = SymbolicLu::try_new(pattern)
                .map_err(|e| Error::SingularLinearSystem(format!("symbolic analysis failed: {e:?}")))?;
            self.symbolic = Some((a.row_ptr.clone(), a.col_idx.clone(), sym));
        }
        let (rp, ci, sym) = self.symbolic.as_ref().expect("symbolic factorization present");
        let pattern = SymbolicSparseColMatRef::new_unsorted_checked(n, n, rp, None, ci);
        let mat = SparseColMatRef::new(pattern, &a.values);
        let lu = Lu::try_new_with_symbolic(sym.clone(), mat)
            .map_err(|e| Error::SingularLinearSystem(format!("{e:?}")))?;
        self.numeric = Some(lu);
        Ok(())
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        let lu = self
            .numeric
            .as_ref()
            .ok_or_else(|| Error::SingularLinearSystem("solve called before factor".into()))?;
        let n = rhs.len();
        let col = MatMut::from_column_major_slice_mut(rhs, n, 1);
        lu.solve_transpose_in_place(col);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularLinearSystem("non-finite solution".into()));
        }
        Ok(())
    }
}
