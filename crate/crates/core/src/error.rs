use crate::linalg::Complex;
use crate::model::Regime;

/// Failures reported by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is defective (non-diagonalizable) at eigenvalue {eigenvalue}")]
    Defective { eigenvalue: Complex },

    #[error("eigenvector matrix condition number {condition:e} exceeds {limit:e}")]
    NearlyDefective { condition: f64, limit: f64 },

    #[error("cannot pair left and right eigenvalues unambiguously")]
    AmbiguousPairing,

    #[error("matrix is not Hermitian (anti-Hermitian part {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("time {t} lies outside the tabulated drive range [{start}, {end}]")]
    DriveRange { t: f64, start: f64, end: f64 },

    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("closed form {variant} is not valid in the {regime:?} regime")]
    RegimeMismatch {
        variant: &'static str,
        regime: Regime,
    },

    #[error("closed form {variant} is singular at the exceptional point (xi = {xi:e})")]
    EpSingular { variant: &'static str, xi: f64 },

    #[error("matrix eigenvalues {first} and {second} are not of the form +a, -a")]
    NotTemplate { first: Complex, second: Complex },

    #[error("{quantity} should be real but has imaginary part {residue:e}")]
    NonRealResidue {
        quantity: &'static str,
        residue: f64,
    },

    #[error("biorthonormal system fails completeness (residual {residual:e})")]
    InvalidSystem { residual: f64 },

    #[error("signature has {got} entries, system has {expected} pairs")]
    SignatureLength { expected: usize, got: usize },

    #[error("signature entries must be +1 or -1, got {0}")]
    InvalidSignature(i8),

    #[error("time {t} is not on the evolution grid")]
    OffGrid { t: f64 },

    #[error("eigenstate branch flip near t = {t} (overlap {overlap:.3})")]
    BranchFlip { t: f64, overlap: f64 },

    #[error("step count must be at least 1")]
    InvalidSteps,
}

pub type Result<T> = std::result::Result<T, Error>;
