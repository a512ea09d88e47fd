//! Symmetric Jacobi scaling `K' = S K S` with `S_ii = 1 / sqrt(|K_ii|)`.

use super::block::BlockSparseMatrix;

/// Diagonal scaling produced by [`jacobi_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiScaling {
    pub factors: Vec<f64>,
    /// Rows whose diagonal was exactly zero; they keep factor 1.
    pub zero_diagonals: usize,
}

impl JacobiScaling {
    pub fn from_diagonal(diagonal: &[f64]) -> Self {
        let mut zero_diagonals = 0;
        let factors = diagonal
            .iter()
            .map(|&d| {
                if d == 0.0 || !d.is_finite() {
                    zero_diagonals += 1;
                    1.0
                } else {
                    1.0 / d.abs().sqrt()
                }
            })
            .collect();
        Self {
            factors,
            zero_diagonals,
        }
    }

    /// `b' = S b`.
    pub fn scale_rhs(&self, b: &[f64]) -> Vec<f64> {
        b.iter().zip(&self.factors).map(|(v, s)| v * s).collect()
    }

    /// `x = S x'`.
    pub fn unscale_solution(&self, x: &mut [f64]) {
        for (v, s) in x.iter_mut().zip(&self.factors) {
            *v *= s;
        }
    }
}

/// Returns the scaled copy of `matrix` and the scaling that produced it.
pub fn jacobi_scale(matrix: &BlockSparseMatrix) -> (BlockSparseMatrix, JacobiScaling) {
    let scaling = JacobiScaling::from_diagonal(&matrix.diagonal());
    let mut scaled = matrix.clone();
    scaled.scale_symmetric(&scaling.factors);
    (scaled, scaling)
}
