//! Numerical core for norm-constrained interpolation in the Schur class.
//!
//! Every function is carried as a finite state-space realization
//! `D + zC(I - zA)^-1 B`. On top of that the crate builds Pick matrices,
//! J-inner generators of all solutions, Redheffer colligations for singular
//! Pick data, interpolation inside de Branges-Rovnyak spaces `H(S)` and
//! boundary (Caratheodory-Julia) interpolation.
//!
//! The crate is `no_std` and only needs `alloc`. The `std` feature switches
//! the elementary functions from libm to the platform implementations.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundary;
mod error;
pub mod hs;
pub mod numerics;
pub mod pick;
pub mod realization;
pub mod redheffer;
pub mod report;
pub mod sampling;
pub mod theta;

pub use error::{Error, ErrorKind, Result};
pub use numerics::{ComplexMatrix, ComplexVector, PsdCertificate, ToleranceConfig};
pub use pick::InterpolationData;
pub use realization::Realization;
pub use report::VerificationReport;

pub use num_complex::Complex64;
