use alloc::string::String;
use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {detail}")]
    Dimension { context: &'static str, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Stein equation has no unique solution: eigenvalue product {product} is within tolerance of 1")]
    NonUniqueStein { product: Complex64 },
    #[error("resolvent I - zA is singular at z = {z}")]
    SingularResolvent { z: Complex64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("spectral radius {rho} is not below 1")]
    NotStable { rho: f64 },
    #[error("series needs more than {cap} terms to reach the truncation tolerance")]
    TruncationCap { cap: usize },
    #[error("explicit formula needs diagonal T with distinct entries inside the disk")]
    NotDiagonalData,
    #[error("Pick matrix is not strictly positive (min eigenvalue {min_eigenvalue:e}); use the Redheffer route")]
    DegeneratePick { min_eigenvalue: f64 },
    #[error("mu = {mu} is not admissible: {reason}")]
    BadMu { mu: Complex64, reason: &'static str },
    #[error("indefinite Gram has inertia ({positives}, {negatives}), expected ({expected_plus}, {expected_minus})")]
    Inertia { positives: usize, negatives: usize, expected_plus: usize, expected_minus: usize },
    #[error("parameter is not in the Schur class (sampled sup {sup})")]
    NotSchur { sup: f64 },
    #[error("Stein identity residual {residual:e} exceeds tolerance")]
    SteinViolation { residual: f64 },
    #[error("problem is not solvable (min eigenvalue {min_eigenvalue:e})")]
    Unsolvable { min_eigenvalue: f64 },
    #[error("parameter norm {norm} exceeds budget {budget}")]
    BudgetExceeded { norm: f64, budget: f64 },
    #[error("Caratheodory-Julia condition fails at t0 = {t0}")]
    CjFails { t0: Complex64 },
    #[error("boundary pole at t0 = {t0} does not cancel")]
    NonCancellation { t0: Complex64 },
    #[error("jet has orders up to {available}, {needed} needed")]
    MissingDerivatives { available: usize, needed: usize },
    #[error("unit-circle data: {0}")]
    BoundaryData(&'static str),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Infeasible,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension { .. }
            | Error::InvalidInput(_)
            | Error::NotDiagonalData
            | Error::BoundaryData(_)
            | Error::MissingDerivatives { .. } => ErrorKind::Input,
            Error::NotPsd { .. }
            | Error::Unsolvable { .. }
            | Error::NotSchur { .. }
            | Error::BudgetExceeded { .. }
            | Error::CjFails { .. }
            | Error::SteinViolation { .. }
            | Error::DegeneratePick { .. } => ErrorKind::Infeasible,
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn dim(context: &'static str, detail: String) -> Self {
        Error::Dimension { context, detail }
    }
}
