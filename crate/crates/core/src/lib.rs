//! Lebesgue decomposition of representable positive functionals on
//! finite-dimensional *-algebras.
//!
//! A functional `g` is split as `g = g_a + g_s` relative to a second
//! functional `f` by realizing both GNS spaces in coordinates, forming the
//! linear relation `{(Aa, Ba)}` between them and projecting the cyclic vector
//! of `g` onto (and off) the multivalued part of that relation. Every
//! structural property of the result is checkable at run time: absolute
//! continuity, mutual singularity, maximality of the absolutely continuous
//! part and mutual absolute continuity of the two absolutely continuous
//! parts.

pub mod algebra;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod functional;
pub mod gns;
pub mod json;
pub mod linalg;
pub mod relation;

pub use algebra::{Element, StarAlgebra, ValidationReport, Violation, ViolationKind};
pub use decompose::{
    build_t, check_invariance, check_maximality, classical_oracle, decompose,
    is_absolutely_continuous, is_singular, mutual_ac, AcVerdict, DecompositionCertificate,
    DecompositionResult, MaximalityVerdict, MutualAcRecord,
};
pub use error::{Error, Result};
pub use functional::{check_representable, gram, leq, Functional, GramMatrix, RepresentabilityCertificate};
pub use gns::{build_gns, GnsSpace};
pub use linalg::Subspace;
pub use relation::{InjectivePart, LinearRelation, OperatorPart};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Default numerical tolerance for PSD tests, rank cutoffs and residual checks.
pub const DEFAULT_TOL: f64 = 1e-9;
