//! Hull membership, hull distance and separation certificates.

pub mod certificate;
pub mod choi;
mod dual;
mod polish;
pub mod solver;

pub use certificate::{lmi_matrix, verify_certificate, CertificateCheck, SeparationCertificate};
pub use choi::{choi_apply, choi_of_kraus, extract_kraus, ChoiProgram};
pub use solver::{
    decide_membership, hull_distance, solve, Goal, HullDistance, MembershipVerdict, SolveReport,
    SolverConfig,
};
