//! Dense complex linear algebra and seeded sampling.
//!
//! Everything here is generic over [`Real`] (`f32` or `f64`). The optimization
//! layers above use the `f64` aliases exported from the crate root.

mod eig;
mod matrix;
mod rng;

pub use eig::{
    cholesky, hermitian_eig, hermitian_eigenvalues, min_eigenvalue, principal_generalized_eigvec, project_psd,
    EigDecomposition,
};
pub(crate) use eig::{cholesky_with_floor, congruence_inverse, forward_solve};
pub use matrix::CMatrix;
pub use rng::{derive_stream, sample_complex_gaussian, SeededRng};

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use thiserror::Error;

/// Floating-point scalar the kernels are generic over.
pub trait Real: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Errors raised by the dense kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e} exceeds tolerance {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("non-finite entry in matrix")]
    NonFinite,
}
