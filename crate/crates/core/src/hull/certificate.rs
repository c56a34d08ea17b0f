//! Separation certificates for hull non-membership.
//!
//! A pair `(Λ, Γ)` with `Γ` Hermitian is a certificate for target `Y` when
//!
//! * `Herm(xᵢᵀ ⊗ Λ†) + I ⊗ Γ ⪯ 0` for every generator `xᵢ`,
//! * `Γ ⪯ 0` in sub-unital mode, and
//! * the margin `Re⟨Λ, Y⟩ + Tr Γ` is positive.
//!
//! For PSD Choi matrices `Cᵢ` one has
//! `Re⟨Λ, Σ Φ_{Cᵢ}(xᵢ)⟩ + ⟨Γ, Σ Φ_{Cᵢ}(I)⟩ = Σ Tr[(Herm(xᵢᵀ ⊗ Λ†) + I ⊗ Γ) Cᵢ] ≤ 0`,
//! so every point `Z` of the hull satisfies `Re⟨Λ, Z⟩ + Tr Γ ≤ 0` (in sub-unital
//! mode using `Tr(Γ S) ≤ 0` for the slack `S = I − Σ Φ_{Cᵢ}(I) ⪰ 0`). With the
//! eigenvalue bounds relaxed to `tol`, the left side is at most `d·tol`, which
//! is why validity demands a margin above `d·tol`.

use serde::{Deserialize, Serialize};

use crate::hull::choi::adjoint_raw;
use crate::kraus::{MatrixFamily, Mode};
use crate::matrix::{eig_herm, eigh_raw, nuclear_norm, real_inner, CMatrix, HermMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub lambda: CMatrix,
    pub gamma: HermMatrix,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    /// Largest eigenvalue of each generator's LMI matrix.
    pub lmi_max_eigs: Vec<f64>,
    /// `λ_max(Γ)`; only constrained in sub-unital mode.
    pub gamma_max_eig: f64,
    pub margin: f64,
}

/// `Herm(xᵀ ⊗ Λ†) + I ⊗ Γ`.
pub fn lmi_matrix(x: &CMatrix, lambda: &CMatrix, gamma: &HermMatrix) -> HermMatrix {
    HermMatrix::symmetrized(CMatrix::from_inner_unchecked(adjoint_raw(
        x.inner(),
        lambda.inner(),
        Some(gamma.matrix().inner()),
    )))
}

fn lmi_max_eig(x: &CMatrix, lambda: &CMatrix, gamma: &HermMatrix) -> f64 {
    let m = lmi_matrix(x, lambda, gamma);
    eigh_raw(m.matrix().inner())
        .map(|(v, _)| v[0])
        .unwrap_or(f64::NAN)
}

impl SeparationCertificate {
    /// `Re⟨Λ, Z⟩ + Tr Γ`: positive at the target, at most zero on the hull.
    pub fn functional(&self, z: &CMatrix) -> f64 {
        real_inner(&self.lambda, z).unwrap_or(f64::NAN) + self.gamma.trace()
    }

    pub fn margin(&self, target: &CMatrix) -> f64 {
        self.functional(target)
    }

    /// `‖Λ‖_F + ‖Γ‖_F`.
    pub fn scale(&self) -> f64 {
        self.lambda.frob_norm() + self.gamma.matrix().frob_norm()
    }

    /// The certificate rescaled so that `‖Λ‖_F + ‖Γ‖_F = 1`.
    pub fn normalized(&self) -> Self {
        let s = self.scale();
        if s == 0.0 {
            return self.clone();
        }
        Self {
            lambda: self.lambda.scale(1.0 / s),
            gamma: HermMatrix::symmetrized(self.gamma.matrix().scale(1.0 / s)),
            mode: self.mode,
        }
    }

    /// Lower bound on the Frobenius distance from `target` to the hull.
    pub fn frobenius_lower_bound(&self, target: &CMatrix) -> f64 {
        let n = self.lambda.frob_norm();
        let m = self.margin(target);
        if n == 0.0 {
            return if m > 0.0 { f64::INFINITY } else { 0.0 };
        }
        (m / n).max(0.0)
    }

    /// Lower bound on the operator-norm distance, `margin / ‖Λ‖_*`.
    pub fn operator_lower_bound(&self, target: &CMatrix) -> f64 {
        let n = nuclear_norm(&self.lambda).unwrap_or(f64::NAN);
        let m = self.margin(target);
        if n == 0.0 {
            return if m > 0.0 { f64::INFINITY } else { 0.0 };
        }
        (m / n).max(0.0)
    }

    /// Turns a dual direction into a certificate satisfying every LMI with
    /// largest eigenvalue exactly at (or just below) zero by shifting `Γ` by a
    /// multiple of the identity, then normalizes it.
    pub fn repaired(
        family: &MatrixFamily,
        lambda: CMatrix,
        gamma: HermMatrix,
        mode: Mode,
    ) -> Option<Self> {
        let mut worst = f64::NEG_INFINITY;
        for x in family.generators() {
            let e = lmi_max_eig(x, &lambda, &gamma);
            if !e.is_finite() {
                return None;
            }
            worst = worst.max(e);
        }
        if mode == Mode::SubUnital {
            let g = eig_herm(&gamma).ok()?.max();
            worst = worst.max(g);
        }
        if !worst.is_finite() {
            return None;
        }
        let scale = lambda.frob_norm() + gamma.matrix().frob_norm();
        let shift = worst + 1e-13 * scale.max(f64::MIN_POSITIVE);
        let d = gamma.dim();
        let gamma = HermMatrix::symmetrized(gamma.matrix() - &CMatrix::identity(d).scale(shift));
        let cert = Self {
            lambda,
            gamma,
            mode,
        };
        (cert.scale() > 0.0).then(|| cert.normalized())
    }

    pub fn check(&self, family: &MatrixFamily, target: &CMatrix, tol: f64) -> CertificateCheck {
        verify_certificate(self, family, target, tol)
    }
}

/// Checks every certificate condition at tolerance `tol`. Shape problems make
/// the certificate invalid rather than raising an error.
pub fn verify_certificate(
    cert: &SeparationCertificate,
    family: &MatrixFamily,
    target: &CMatrix,
    tol: f64,
) -> CertificateCheck {
    let d = family.dim();
    let shapes_ok =
        cert.lambda.shape() == (d, d) && cert.gamma.dim() == d && target.shape() == (d, d);
    if !shapes_ok {
        return CertificateCheck {
            valid: false,
            lmi_max_eigs: Vec::new(),
            gamma_max_eig: f64::NAN,
            margin: f64::NAN,
        };
    }
    let lmi_max_eigs: Vec<f64> = family
        .generators()
        .iter()
        .map(|x| lmi_max_eig(x, &cert.lambda, &cert.gamma))
        .collect();
    let gamma_max_eig = eig_herm(&cert.gamma).map(|e| e.max()).unwrap_or(f64::NAN);
    let margin = cert.margin(target);
    let lmis_ok = lmi_max_eigs.iter().all(|&e| e <= tol);
    let gamma_ok = cert.mode == Mode::ExactUnital || gamma_max_eig <= tol;
    let valid = lmis_ok && gamma_ok && margin > d as f64 * tol;
    CertificateCheck {
        valid,
        lmi_max_eigs,
        gamma_max_eig,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_family() -> MatrixFamily {
        MatrixFamily::new(vec![CMatrix::identity(2)]).unwrap()
    }

    #[test]
    fn doubling_certificate() {
        let cert = SeparationCertificate {
            lambda: CMatrix::identity(2),
            gamma: HermMatrix::symmetrized(CMatrix::identity(2).scale(-1.0)),
            mode: Mode::ExactUnital,
        };
        let target = CMatrix::identity(2).scale(2.0);
        let check = verify_certificate(&cert, &identity_family(), &target, 1e-8);
        assert!(check.valid);
        assert!((check.margin - 2.0).abs() < 1e-15);
        assert!(check.lmi_max_eigs[0].abs() < 1e-15);
    }

    #[test]
    fn zero_certificate_is_invalid() {
        let cert = SeparationCertificate {
            lambda: CMatrix::zeros(2, 2),
            gamma: HermMatrix::zeros(2),
            mode: Mode::ExactUnital,
        };
        let check = verify_certificate(
            &cert,
            &identity_family(),
            &CMatrix::identity(2).scale(2.0),
            1e-8,
        );
        assert!(!check.valid);
        assert_eq!(check.margin, 0.0);
    }

    #[test]
    fn sub_mode_requires_negative_gamma() {
        // Γ = I is fine for exact hulls of the empty set, not for sub-unital ones.
        let cert = SeparationCertificate {
            lambda: CMatrix::zeros(1, 1),
            gamma: HermMatrix::identity(1),
            mode: Mode::SubUnital,
        };
        let fam = MatrixFamily::empty(1);
        let target = CMatrix::identity(1);
        assert!(!verify_certificate(&cert, &fam, &target, 1e-8).valid);
        let exact = SeparationCertificate {
            mode: Mode::ExactUnital,
            ..cert
        };
        assert!(verify_certificate(&exact, &fam, &target, 1e-8).valid);
    }

    #[test]
    fn repair_makes_lmis_nonpositive() {
        let fam = identity_family();
        let cert = SeparationCertificate::repaired(
            &fam,
            CMatrix::identity(2),
            HermMatrix::zeros(2),
            Mode::ExactUnital,
        )
        .unwrap();
        let check = cert.check(&fam, &CMatrix::identity(2).scale(2.0), 0.0);
        assert!(check.valid);
        assert!((cert.scale() - 1.0).abs() < 1e-12);
        // Distance from 2I to {I} is 1 in operator norm, √2 in Frobenius.
        let target = CMatrix::identity(2).scale(2.0);
        assert!((cert.operator_lower_bound(&target) - 1.0).abs() < 1e-9);
        assert!((cert.frobenius_lower_bound(&target) - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch_is_invalid() {
        let cert = SeparationCertificate {
            lambda: CMatrix::identity(3),
            gamma: HermMatrix::zeros(3),
            mode: Mode::ExactUnital,
        };
        assert!(!verify_certificate(&cert, &identity_family(), &CMatrix::identity(2), 1e-8).valid);
    }
}
