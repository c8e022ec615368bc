//! Small dense semidefinite programs over Hermitian PSD blocks.
//!
//! Problems have `n_blocks` variables `X_k` of side `block_dim`, a linear
//! objective `max sum_k Re tr(C_k X_k)` and scalar trace inequalities. They are
//! solved by [`solve_sdp`], an infeasible-start primal-dual interior-point
//! method working directly on the complex blocks.

mod dump;
mod embed;
mod ipm;

pub use dump::{parse_dump, write_dump};
pub use embed::{embed_hermitian, embed_matrix, unembed_matrix};
pub use ipm::solve_sdp;

use thiserror::Error;

use crate::numerics::{CMatrix, Real};

/// Default stopping tolerance on the scaled residuals and duality gap.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `lhs >= rhs`
    Ge,
    /// `lhs <= rhs`
    Le,
}

/// `sum_k Re tr(coeffs[k] X_k)  sense  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<CMatrix<T>>,
    pub sense: Sense,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem<T> {
    pub block_dim: usize,
    pub n_blocks: usize,
    pub objective: Vec<CMatrix<T>>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution<T> {
    pub blocks: Vec<CMatrix<T>>,
    pub objective_value: T,
    /// Largest constraint violation in the problem's own units.
    pub primal_residual: T,
    pub status: SdpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("coefficient matrix {0} is not Hermitian")]
    NotHermitian(String),
    #[error("non-finite data in {0}")]
    NonFinite(String),
    #[error("dump parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Tolerance for the Hermitian check on coefficient matrices.
const HERMITIAN_TOL: f64 = 1e-10;

impl<T: Real> SdpProblem<T> {
    /// Problem with a zero objective and no constraints.
    pub fn new(block_dim: usize, n_blocks: usize) -> Self {
        Self {
            block_dim,
            n_blocks,
            objective: vec![CMatrix::zeros(block_dim, block_dim); n_blocks],
            constraints: Vec::new(),
        }
    }

    pub fn zero_block(&self) -> CMatrix<T> {
        CMatrix::zeros(self.block_dim, self.block_dim)
    }

    pub fn push(&mut self, coeffs: Vec<CMatrix<T>>, sense: Sense, rhs: T) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.block_dim == 0 || self.n_blocks == 0 {
            return Err(SdpError::Malformed("empty block structure".into()));
        }
        if self.objective.len() != self.n_blocks {
            return Err(SdpError::Malformed(format!(
                "{} objective blocks for {} variables",
                self.objective.len(),
                self.n_blocks
            )));
        }
        let check = |m: &CMatrix<T>, what: &dyn Fn() -> String| -> Result<(), SdpError> {
            if m.rows() != self.block_dim || m.cols() != self.block_dim {
                return Err(SdpError::Malformed(format!(
                    "{} is {}x{}, expected {}x{}",
                    what(),
                    m.rows(),
                    m.cols(),
                    self.block_dim,
                    self.block_dim
                )));
            }
            if !m.is_finite() {
                return Err(SdpError::NonFinite(what()));
            }
            let tol = T::lit(HERMITIAN_TOL) * m.frobenius_norm().max(T::one());
            if m.hermitian_defect() > tol {
                return Err(SdpError::NotHermitian(what()));
            }
            Ok(())
        };
        for (k, c) in self.objective.iter().enumerate() {
            check(c, &|| format!("objective block {k}"))?;
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if con.coeffs.len() != self.n_blocks {
                return Err(SdpError::Malformed(format!(
                    "constraint {i} has {} blocks, expected {}",
                    con.coeffs.len(),
                    self.n_blocks
                )));
            }
            if !con.rhs.is_finite() {
                return Err(SdpError::NonFinite(format!("rhs of constraint {i}")));
            }
            for (k, a) in con.coeffs.iter().enumerate() {
                check(a, &|| format!("constraint {i} block {k}"))?;
            }
        }
        Ok(())
    }

    /// `sum_k Re tr(C_k X_k)`.
    pub fn objective_at(&self, blocks: &[CMatrix<T>]) -> T {
        self.objective.iter().zip(blocks).map(|(c, x)| c.inner(x)).sum()
    }

    /// Left-hand side of constraint `i` at `blocks`.
    pub fn lhs_at(&self, i: usize, blocks: &[CMatrix<T>]) -> T {
        self.constraints[i]
            .coeffs
            .iter()
            .zip(blocks)
            .map(|(a, x)| a.inner(x))
            .sum()
    }

    /// Largest violation of any constraint at `blocks` (zero when feasible).
    pub fn max_violation(&self, blocks: &[CMatrix<T>]) -> T {
        (0..self.constraints.len())
            .map(|i| {
                let con = &self.constraints[i];
                let lhs = self.lhs_at(i, blocks);
                match con.sense {
                    Sense::Ge => con.rhs - lhs,
                    Sense::Le => lhs - con.rhs,
                }
                .max(T::zero())
            })
            .fold(T::zero(), T::max)
    }
}
