//! Numerical toolkit for C*-convex sets in the matrix algebras `M_d`.
//!
//! * [`matrix`]: dense complex matrices and Hermitian primitives.
//! * [`kraus`]: C*-convex (exact-unital) and C*-absolutely convex (sub-unital)
//!   combinations `Σ Aᵢ† xᵢ Aᵢ`.
//! * [`hull`]: membership in the closed hull of a finite family via Choi
//!   matrices, distance bounds, and separation certificates.
//! * [`commutative`]: exact oracles for diagonal families and plane geometry.
//! * [`verifier`]: family-level polyhedron checks and finite-rank
//!   frame constructions.

pub mod commutative;
pub mod error;
pub mod format;
pub mod hull;
pub mod kraus;
pub mod matrix;
pub mod sampling;
pub mod verifier;

pub use error::{Error, Result};
pub use hull::{
    decide_membership, hull_distance, solve, verify_certificate, Goal, HullDistance,
    MembershipVerdict, SeparationCertificate, SolveReport, SolverConfig,
};
pub use kraus::{KrausCombination, KrausTerm, MatrixFamily, Mode};
pub use matrix::{CMatrix, HermMatrix, C64};
