//! Plain conjugate gradient with residual-history instrumentation.
//!
//! The iteration is run as-is on symmetric indefinite systems too; a
//! vanishing curvature `p^T A p` stops it with [`Termination::Breakdown`]
//! rather than restarting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::BlockSparseMatrix;
use crate::error::{Error, Result};

/// The residual is recomputed as `b - A x` every this many iterations.
pub const RESIDUAL_REFRESH_INTERVAL: usize = 50;

const DOT_CHUNK: usize = 4096;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for BlockSparseMatrix {
    fn dim(&self) -> usize {
        BlockSparseMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Breakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||r_k||` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub achieved_relative_residual: f64,
    pub termination: Termination,
}

/// Dot product with a fixed reduction tree, so the result does not depend
/// on the number of worker threads.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partials: Vec<f64> = a
        .par_chunks(DOT_CHUNK)
        .zip(b.par_chunks(DOT_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partials.iter().sum()
}

fn residual(op: &impl LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) -> Result<()> {
    op.apply(x, r)?;
    r.par_iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    Ok(())
}

/// Solves `A x = b` from `x = 0`, stopping once `||r_k|| / ||r_0|| <= tolerance`
/// or after `max_iterations` steps.
pub fn conjugate_gradient(
    op: &impl LinearOperator,
    b: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: b.len() });
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut rr = dot(&r, &r);
    let r0 = rr.sqrt();
    let mut history = vec![r0];
    let finish = |x: Vec<f64>, history: Vec<f64>, termination: Termination| {
        let last = *history.last().unwrap();
        let achieved = if r0 > 0.0 { last / r0 } else { 0.0 };
        let report = SolveReport {
            iterations: history.len() - 1,
            residual_history: history,
            converged: termination == Termination::Converged,
            achieved_relative_residual: achieved,
            termination,
        };
        Ok((x, report))
    };
    if r0 == 0.0 {
        return finish(x, history, Termination::Converged);
    }

    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    for k in 1..=max_iterations {
        op.apply(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        let scale = dot(&p, &p).sqrt() * dot(&ap, &ap).sqrt();
        if !pap.is_finite() || pap.abs() <= f64::EPSILON * scale {
            return finish(x, history, Termination::Breakdown);
        }
        let alpha = rr / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        if k % RESIDUAL_REFRESH_INTERVAL == 0 {
            residual(op, b, &x, &mut r)?;
        } else {
            r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        }
        let rr_next = dot(&r, &r);
        history.push(rr_next.sqrt());
        if rr_next.sqrt() <= tolerance * r0 {
            return finish(x, history, Termination::Converged);
        }
        let beta = rr_next / rr;
        rr = rr_next;
        p.par_iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
    }
    finish(x, history, Termination::MaxIterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::block::BlockPattern;

    struct Dense(Vec<Vec<f64>>);

    impl LinearOperator for Dense {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
            for (yi, row) in y.iter_mut().zip(&self.0) {
                *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
            }
            Ok(())
        }
    }

    #[test]
    fn two_by_two_spd() {
        let mut m = BlockSparseMatrix::zeros(BlockPattern::dense(2), &[vec![0]]);
        m.block_values_mut(0).copy_from_slice(&[4.0, 1.0, 1.0, 3.0]);
        let (x, report) = conjugate_gradient(&m, &[1.0, 2.0], 1e-12, 10).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 2);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
        assert_eq!(report.residual_history.len(), report.iterations + 1);
    }

    #[test]
    fn zero_rhs() {
        let a = Dense(vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        let (x, report) = conjugate_gradient(&a, &[0.0, 0.0], 1e-3, 10).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
        assert_eq!(report.residual_history, vec![0.0]);
    }

    #[test]
    fn breakdown_is_reported() {
        // r0 = (1, 1) gives p^T A p = 1 - 1 = 0 on diag(1, -1)
        let a = Dense(vec![vec![1.0, 0.0], vec![0.0, -1.0]]);
        let (_, report) = conjugate_gradient(&a, &[1.0, 1.0], 1e-8, 10).unwrap();
        assert_eq!(report.termination, Termination::Breakdown);
        assert!(!report.converged);
        assert_eq!(report.residual_history.len(), 1);
    }

    #[test]
    fn exhaustion_not_converged() {
        let n = 30;
        let a = Dense(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 + i as f64 } else { 0.0 }).collect())
                .collect(),
        );
        let b = vec![1.0; n];
        let (_, report) = conjugate_gradient(&a, &b, 1e-14, 3).unwrap();
        assert_eq!(report.iterations, 3);
        assert!(!report.converged);
        assert_eq!(report.termination, Termination::MaxIterations);
        let ratio = report.residual_history[3] / report.residual_history[0];
        assert_eq!(ratio, report.achieved_relative_residual);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Dense(vec![vec![1.0]]);
        assert!(conjugate_gradient(&a, &[1.0, 2.0], 1e-3, 5).is_err());
    }
}
