//! Symmetric block-sparse matrices with a fixed in-block sparsity pattern.
//!
//! Storage is compressed block rows over node pairs. Every stored block keeps
//! only the scalar slots listed in its [`BlockPattern`], in row-major order,
//! so the masked product below touches nothing else.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Positions of the structurally nonzero scalars inside a dense block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPattern {
    size: usize,
    rows: Vec<u8>,
    cols: Vec<u8>,
}

impl BlockPattern {
    /// Pattern from explicit `(row, col)` slots; they are sorted row-major.
    pub fn new(size: usize, mut slots: Vec<(usize, usize)>) -> Self {
        assert!(size <= u8::MAX as usize);
        slots.sort_unstable();
        slots.dedup();
        assert!(slots.iter().all(|&(r, c)| r < size && c < size));
        Self {
            size,
            rows: slots.iter().map(|s| s.0 as u8).collect(),
            cols: slots.iter().map(|s| s.1 as u8).collect(),
        }
    }

    /// Every slot of a `size x size` block.
    pub fn dense(size: usize) -> Self {
        Self::new(size, (0..size).flat_map(|r| (0..size).map(move |c| (r, c))).collect())
    }

    pub fn block_size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn slot(&self, k: usize) -> (usize, usize) {
        (self.rows[k] as usize, self.cols[k] as usize)
    }

    pub fn slots(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().zip(&self.cols).map(|(&r, &c)| (r as usize, c as usize))
    }

    pub fn index_of(&self, row: usize, col: usize) -> Option<usize> {
        self.slots().position(|s| s == (row, col))
    }

    /// Whether the pattern is closed under transposition.
    pub fn is_symmetric(&self) -> bool {
        self.slots().all(|(r, c)| self.index_of(c, r).is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix {
    pattern: BlockPattern,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl BlockSparseMatrix {
    /// Zero matrix over the given block adjacency. Each row's column list
    /// must be strictly increasing.
    pub fn zeros(pattern: BlockPattern, adjacency: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(adjacency.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for row in adjacency {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let values = vec![0.0; cols.len() * pattern.len()];
        Self {
            pattern,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn pattern(&self) -> &BlockPattern {
        &self.pattern
    }

    pub fn block_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn block_size(&self) -> usize {
        self.pattern.size
    }

    /// Scalar dimension.
    pub fn dim(&self) -> usize {
        self.block_rows() * self.block_size()
    }

    pub fn num_blocks(&self) -> usize {
        self.cols.len()
    }

    pub fn row_blocks(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn block_col(&self, k: usize) -> usize {
        self.cols[k]
    }

    pub fn find_block(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.row_blocks(i);
        self.cols[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|p| range.start + p)
    }

    pub fn block_values(&self, k: usize) -> &[f64] {
        let n = self.pattern.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn block_values_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.pattern.len();
        &mut self.values[k * n..(k + 1) * n]
    }

    /// Mutable slot values of every block in row `i`, with their block columns.
    pub(crate) fn row_mut(&mut self, i: usize) -> (&[usize], &mut [f64]) {
        let n = self.pattern.len();
        let range = self.row_blocks(i);
        (&self.cols[range.clone()], &mut self.values[range.start * n..range.end * n])
    }

    pub(crate) fn rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &[usize], &mut [f64])> + '_ {
        let n = self.pattern.len();
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        let mut chunks = Vec::with_capacity(self.block_rows());
        let mut rest: &mut [f64] = &mut self.values;
        for i in 0..row_ptr.len() - 1 {
            let (head, tail) = rest.split_at_mut((row_ptr[i + 1] - row_ptr[i]) * n);
            chunks.push((i, &cols[row_ptr[i]..row_ptr[i + 1]], head));
            rest = tail;
        }
        chunks.into_par_iter()
    }

    /// Dense copy of block `(i, j)`, zero if the pair is not stored.
    pub fn dense_block(&self, i: usize, j: usize) -> Vec<f64> {
        match self.find_block(i, j) {
            Some(k) => self.expand(k),
            None => vec![0.0; self.block_size() * self.block_size()],
        }
    }

    fn expand(&self, k: usize) -> Vec<f64> {
        let bs = self.block_size();
        let mut out = vec![0.0; bs * bs];
        for (s, v) in self.block_values(k).iter().enumerate() {
            let (r, c) = self.pattern.slot(s);
            out[r * bs + c] = *v;
        }
        out
    }

    /// Scalar entry; zero outside the stored pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let bs = self.block_size();
        match (self.find_block(row / bs, col / bs), self.pattern.index_of(row % bs, col % bs)) {
            (Some(k), Some(s)) => self.block_values(k)[s],
            _ => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let bs = self.block_size();
        let diag_slots: Vec<Option<usize>> = (0..bs).map(|r| self.pattern.index_of(r, r)).collect();
        let mut d = vec![0.0; self.dim()];
        for i in 0..self.block_rows() {
            if let Some(k) = self.find_block(i, i) {
                let vals = self.block_values(k);
                for (r, slot) in diag_slots.iter().enumerate() {
                    if let Some(s) = slot {
                        d[i * bs + r] = vals[*s];
                    }
                }
            }
        }
        d
    }

    /// Row-major dense copy; only sensible for small test systems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let bs = self.block_size();
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..self.block_rows() {
            for k in self.row_blocks(i) {
                let j = self.cols[k];
                for (s, v) in self.block_values(k).iter().enumerate() {
                    let (r, c) = self.pattern.slot(s);
                    a[i * bs + r][j * bs + c] = *v;
                }
            }
        }
        a
    }

    /// Largest `|block(i,j) - block(j,i)^T|` over all stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        let bs = self.block_size();
        let mut worst: f64 = 0.0;
        for i in 0..self.block_rows() {
            for k in self.row_blocks(i) {
                let j = self.cols[k];
                let a = self.dense_block(i, j);
                let b = self.dense_block(j, i);
                for r in 0..bs {
                    for c in 0..bs {
                        worst = worst.max((a[r * bs + c] - b[c * bs + r]).abs());
                    }
                }
            }
        }
        worst
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: y.len() });
        }
        Ok(())
    }

    /// `y = A x`, visiting only the structural slots.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_dims(x, y)?;
        let bs = self.block_size();
        let ns = self.pattern.len();
        let (prow, pcol) = (&self.pattern.rows, &self.pattern.cols);
        y.par_chunks_mut(bs).enumerate().for_each(|(i, yi)| {
            let mut acc = [0.0f64; 16];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let xj = &x[j * bs..(j + 1) * bs];
                let vals = &self.values[k * ns..(k + 1) * ns];
                for s in 0..ns {
                    acc[prow[s] as usize] += vals[s] * xj[pcol[s] as usize];
                }
            }
            yi.copy_from_slice(&acc[..bs]);
        });
        Ok(())
    }

    /// `y = A x` through fully expanded dense blocks, zeros included. Per row
    /// the nonzero terms are summed in the same order as [`Self::matvec`].
    pub fn matvec_unmasked(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_dims(x, y)?;
        let bs = self.block_size();
        y.par_chunks_mut(bs).enumerate().for_each(|(i, yi)| {
            let mut acc = [0.0f64; 16];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let dense = self.expand(k);
                let xj = &x[j * bs..(j + 1) * bs];
                for r in 0..bs {
                    for c in 0..bs {
                        acc[r] += dense[r * bs + c] * xj[c];
                    }
                }
            }
            yi.copy_from_slice(&acc[..bs]);
        });
        Ok(())
    }

    /// In-place congruence `A <- S A S` for diagonal `S = diag(s)`.
    pub fn scale_symmetric(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.dim());
        let bs = self.block_size();
        let ns = self.pattern.len();
        let (prow, pcol) = (self.pattern.rows.clone(), self.pattern.cols.clone());
        self.rows_mut().for_each(|(i, cols, vals)| {
            for (b, &j) in cols.iter().enumerate() {
                for t in 0..ns {
                    vals[b * ns + t] *= s[i * bs + prow[t] as usize] * s[j * bs + pcol[t] as usize];
                }
            }
        });
    }
}
