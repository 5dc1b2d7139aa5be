//! Exact-arithmetic lattice toolkit for prime-order Brauer classes on
//! polarized K3 surfaces.
//!
//! The crate is organized around six concerns:
//!
//! - [`lattice`]: integer Gram lattices, Smith normal form, discriminant
//!   groups with their finite quadratic forms;
//! - [`pell`]: continued fractions and the generalized Pell equation
//!   r² − Ds² = ±N with complete solvability decisions;
//! - [`forms`]: rank-2 even lattices — reduction cycles, GL₂(ℤ) isometry
//!   with verified witnesses, represented numbers, automorphism groups and
//!   their action on discriminant groups;
//! - [`brauer`]: parametrization, invariants, classification and counting of
//!   p-torsion Brauer classes of a degree-2d K3 surface of Picard rank one;
//! - [`kappa`]: the Picard-lattice side of the degree-2p²d → degree-2d
//!   moduli map, its Mukai-model oracle, fiber degrees and
//!   Fourier–Mukai partner counts;
//! - [`suite`]: a regression corpus over the worked degree-8/16/18/24/36
//!   examples, emitting a machine-readable report.
//!
//! Everything computes over arbitrary-precision integers and exact
//! rationals; there is no floating point anywhere.
//!
//! Start with the runnable programs under `examples/`, or the `k3b` binary
//! for the command-line interface.

pub mod brauer;
pub mod cli;
pub mod forms;
pub mod kappa;
pub mod lattice;
pub mod mat;
pub mod pell;
pub mod suite;
pub mod wire;

pub use forms::BinaryForm;
pub use lattice::{FiniteQuadForm, GramLattice, SmithDecomposition};
pub use pell::PellResult;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("singular lattice")]
    SingularLattice,
    #[error("trivial functional")]
    TrivialFunctional,
    #[error("enumeration limit")]
    EnumerationLimit,
    #[error("use matrix action")]
    NonCyclicDisc,
    #[error("expected a rank-2 lattice")]
    NotRank2,
    #[error("operation needs an indefinite form")]
    DefiniteForm,
    #[error("zero class")]
    ZeroClass,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("enumeration budget exceeded: requires {required}")]
    BudgetExceeded { required: u128 },
    #[error("signature violation: 4p^2dc - b^2 must be negative")]
    SignatureViolation,
    #[error("discriminant group needs more than two generators")]
    UnsupportedDiscGroup,
    #[error("unknown case id: {0}")]
    UnknownCase(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
