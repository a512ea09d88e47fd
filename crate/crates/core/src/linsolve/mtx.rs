//! Matrix Market coordinate dump of a block-sparse matrix.
//!
//! Every structural slot of every stored block is written, including slots
//! that happen to hold zero; scalars outside the block pattern are omitted.

use std::io::{BufWriter, Write};
use std::path::Path;

use super::block::BlockSparseMatrix;
use crate::error::{Error, Result};

pub fn write_matrix_market_to(matrix: &BlockSparseMatrix, out: &mut impl Write) -> std::io::Result<()> {
    let bs = matrix.block_size();
    let n = matrix.dim();
    let nnz = matrix.num_blocks() * matrix.pattern().len();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{n} {n} {nnz}")?;
    for i in 0..matrix.block_rows() {
        for k in matrix.row_blocks(i) {
            let j = matrix.block_col(k);
            for (s, v) in matrix.block_values(k).iter().enumerate() {
                let (r, c) = matrix.pattern().slot(s);
                writeln!(out, "{} {} {:.17e}", i * bs + r + 1, j * bs + c + 1, v)?;
            }
        }
    }
    Ok(())
}

pub fn write_matrix_market(matrix: &BlockSparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix_market_to(matrix, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
