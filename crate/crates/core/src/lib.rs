//! Joint transmit/receive beamforming and power splitting for integrated
//! sensing, communication and powering.
//!
//! The linear-algebra kernel in [`numerics`] and the SDP solver in [`sdp`]
//! are generic over [`Real`] (`f32`/`f64`); the system model and the
//! optimisation layers above them are `f64`.

pub mod ao;
pub mod baselines;
pub mod channel;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod numerics;
pub mod oracle;
pub mod scenario;
pub mod sdp;
pub mod subproblems;

pub use numerics::Real;

/// Double-precision complex matrix used throughout the system model.
pub type ComplexMatrix = numerics::CMatrix<f64>;
/// Complex column vector stored as an `n x 1` matrix.
pub type ComplexVector = numerics::CMatrix<f64>;
/// Single-precision matrix for the generic kernel.
pub type ComplexMatrixF32 = numerics::CMatrix<f32>;
