//! Low-tubal-rank tensor estimation under the t-product.
//!
//! The crate is organized bottom-up:
//!
//! * [`tensor`]: dense third-order tensors, the DFT along mode 3 and the
//!   t-product algebra.
//! * [`tlinalg`]: frequency-domain t-SVD, t-QR, rank profiles and the damped
//!   preconditioner solve.
//! * [`objectives`]: factorization and Gaussian-sensing losses, their factor
//!   gradients, and initializations.
//! * [`solvers`]: APGD with rebalancing, ScaledGD and factorized GD, with
//!   per-iteration traces.
//! * [`synth`]: seeded ground-truth tensors with prescribed multi-rank and
//!   condition number.

mod dense;
pub mod error;
pub mod factors;
pub mod objectives;
pub mod solvers;
pub mod synth;
pub mod tensor;
pub mod tlinalg;

pub use error::{Result, TubalError};
pub use factors::FactorPair;
pub use tensor::{Dims, FreqTensor, Tensor3};
