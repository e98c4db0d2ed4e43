use nalgebra::DMatrix;

use super::sparse::{Factorization, SparseLu, SparseOperator};
use crate::error::{Error, Result};

/// Direct solver for matrices whose leading unknowns couple among themselves
/// only inside diagonal blocks of a fixed size, as the discontinuous velocity
/// does. The blocks are inverted densely and only the Schur complement on the
/// trailing unknowns goes through the sparse LU.
pub struct BlockCondensedLu {
    n_lead: usize,
    block: usize,
    a: Option<SparseOperator>,
    inv: Vec<f64>,
    // per block: trailing columns touched and `D^{-1} C` (block x cols)
    coupling: Vec<(Vec<usize>, Vec<f64>)>,
    schur: Option<SparseOperator>,
    pattern_of: Option<(Vec<usize>, Vec<usize>)>,
    lu: SparseLu,
}

impl BlockCondensedLu {
    pub fn new(n_lead: usize, block: usize) -> Result<Self> {
        if block == 0 || n_lead % block != 0 {
            return Err(Error::InvalidArgument(format!("{n_lead} leading unknowns do not split into blocks of {block}")));
        }
        Ok(BlockCondensedLu {
            n_lead,
            block,
            a: None,
            inv: Vec::new(),
            coupling: Vec::new(),
            schur: None,
            pattern_of: None,
            lu: SparseLu::new(),
        })
    }

    fn invert_blocks(&mut self, a: &SparseOperator) -> Result<()> {
        let (nl, bs) = (self.n_lead, self.block);
        self.inv.clear();
        self.coupling.clear();
        for b in 0..nl / bs {
            let mut d = DMatrix::<f64>::zeros(bs, bs);
            let mut cols: Vec<usize> = Vec::new();
            for r in 0..bs {
                for (c, v) in a.row(b * bs + r) {
                    if c < nl {
                        if c / bs != b {
                            return Err(Error::InvalidArgument(format!(
                                "row {} couples leading unknown {c} outside its block",
                                b * bs + r
                            )));
                        }
                        d[(r, c % bs)] = v;
                    } else {
                        cols.push(c);
                    }
                }
            }
            let dinv = d
                .try_inverse()
                .ok_or_else(|| Error::SingularLinearSystem(format!("diagonal block {b} is singular")))?;
            cols.sort_unstable();
            cols.dedup();
            let m = cols.len();
            let mut cmat = DMatrix::<f64>::zeros(bs, m);
            for r in 0..bs {
                for (c, v) in a.row(b * bs + r).filter(|&(c, _)| c >= nl) {
                    let k = cols.binary_search(&c).expect("column collected above");
                    cmat[(r, k)] = v;
                }
            }
            let w = &dinv * cmat;
            self.inv.extend(dinv.transpose().iter());
            self.coupling.push((cols, w.transpose().iter().copied().collect()));
        }
        Ok(())
    }

    fn schur_pattern(&self, a: &SparseOperator) -> SparseOperator {
        let nl = self.n_lead;
        let nt = a.nrows() - nl;
        let mut row_ptr = Vec::with_capacity(nt + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut row = Vec::new();
        for i in 0..nt {
            row.clear();
            for (c, _) in a.row(nl + i) {
                if c >= nl {
                    row.push(c - nl);
                } else {
                    row.extend(self.coupling[c / self.block].0.iter().map(|&k| k - nl));
                }
            }
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(&row);
            row_ptr.push(col_idx.len());
        }
        SparseOperator::from_pattern(nt, nt, row_ptr, col_idx)
    }

    fn fill_schur(&mut self, a: &SparseOperator) {
        let (nl, bs) = (self.n_lead, self.block);
        let s = self.schur.as_mut().expect("pattern built");
        let row_ptr = s.row_ptr().to_vec();
        let col_idx = s.col_idx().to_vec();
        let vals = s.values_mut();
        vals.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..a.nrows() - nl {
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            let base = row_ptr[i];
            let pos = |c: usize| base + cols.binary_search(&c).expect("entry in Schur pattern");
            for (c, v) in a.row(nl + i) {
                if c >= nl {
                    vals[pos(c - nl)] += v;
                } else {
                    let (bcols, w) = &self.coupling[c / bs];
                    let m = bcols.len();
                    let wrow = &w[(c % bs) * m..(c % bs + 1) * m];
                    for (&k, &wk) in bcols.iter().zip(wrow) {
                        vals[pos(k - nl)] -= v * wk;
                    }
                }
            }
        }
    }

    fn apply_inverse(&self, x: &mut [f64]) {
        let bs = self.block;
        let mut tmp = vec![0.0; bs];
        for (b, chunk) in x.chunks_mut(bs).enumerate() {
            let inv = &self.inv[b * bs * bs..(b + 1) * bs * bs];
            for (r, t) in tmp.iter_mut().enumerate() {
                *t = inv[r * bs..(r + 1) * bs].iter().zip(chunk.iter()).map(|(p, q)| p * q).sum();
            }
            chunk.copy_from_slice(&tmp);
        }
    }
}

impl Factorization for BlockCondensedLu {
    fn factor(&mut self, a: &SparseOperator) -> Result<()> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        if a.nrows() < self.n_lead {
            return Err(Error::DimensionMismatch { expected: self.n_lead, got: a.nrows() });
        }
        self.invert_blocks(a)?;
        let same = matches!(&self.pattern_of, Some((rp, ci)) if rp == a.row_ptr() && ci == a.col_idx());
        if !same {
            self.schur = Some(self.schur_pattern(a));
            self.pattern_of = Some((a.row_ptr().to_vec(), a.col_idx().to_vec()));
        }
        self.fill_schur(a);
        self.lu.factor(self.schur.as_ref().expect("pattern built"))?;
        self.a = Some(a.clone());
        Ok(())
    }

    fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        let a = self
            .a
            .as_ref()
            .ok_or_else(|| Error::SingularLinearSystem("solve called before factor".into()))?;
        if rhs.len() != a.nrows() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: rhs.len() });
        }
        let nl = self.n_lead;
        let (lead, trail) = rhs.split_at_mut(nl);
        let mut y = lead.to_vec();
        self.apply_inverse(&mut y);
        for (i, t) in trail.iter_mut().enumerate() {
            *t -= a.row(nl + i).filter(|&(c, _)| c < nl).map(|(c, v)| v * y[c]).sum::<f64>();
        }
        self.lu.solve_in_place(trail)?;
        for (r, l) in lead.iter_mut().enumerate() {
            *l -= a.row(r).filter(|&(c, _)| c >= nl).map(|(c, v)| v * trail[c - nl]).sum::<f64>();
        }
        self.apply_inverse(lead);
        if lead.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularLinearSystem("non-finite solution".into()));
        }
        Ok(())
    }
}
