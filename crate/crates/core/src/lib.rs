//! 𝒞-operators, metrics and Lewis-Riesenfeld invariants for quasi-Hermitian
//! two-level Hamiltonians.

pub mod biortho;
pub mod coperator;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod lr_solver;
pub mod model;
pub mod report;

pub use biortho::{BiorthoPair, BiorthoSystem, PairOrdering};
pub use coperator::{
    COperator, DysonConstruction, DysonMap, MetricForm, MetricOperator, Signature,
};
pub use error::{Error, Result};
pub use evolution::{EvolvedState, PhaseConvention, PhaseTrace};
pub use linalg::{Complex, ComplexMatrix2, ComplexVector2, EigenPair2, DEFAULT_TOL};
pub use lr_solver::{ClosedFormInvariant, InvariantState, InvariantVariant, TemplateEntries};
pub use model::{DriveKind, DriveSpec, HamiltonianParams, PauliCoefficients, Regime};
pub use report::{Check, VerificationReport};
