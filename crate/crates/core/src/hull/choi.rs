//! Choi matrices of completely positive maps on `M_d`.
//!
//! Convention: `C(Φ) = Σ_{pq} E_pq ⊗ Φ(E_pq)` and `Φ_C(X) = Tr₁[(Xᵀ ⊗ I) C]`,
//! so the `(p, q)` block of `C` is `Φ(E_pq)` and `Φ_C(X) = Σ_{pq} X_pq C_[pq]`.
//! A Kraus coefficient `A` acting as `X ↦ A† X A` has the rank-one Choi
//! matrix `v v†` with `v = Σ_p e_p ⊗ A†e_p`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kraus::{KrausCombination, KrausTerm, MatrixFamily, Mode};
use crate::matrix::{eigh_raw, CMatrix, HermMatrix, C64};

/// Negative Choi eigenvalues down to this are clamped during extraction.
pub const EXTRACT_PSD_TOL: f64 = 1e-7;
/// Relative cutoff below which Choi eigenvalues are dropped.
pub const EXTRACT_RANK_CUTOFF: f64 = 1e-10;

/// `Σ_{pq} X_pq C_[pq]`.
pub(crate) fn apply_raw(c: &DMatrix<C64>, x: &DMatrix<C64>) -> DMatrix<C64> {
    let d = x.nrows();
    let mut out = DMatrix::zeros(d, d);
    for p in 0..d {
        for q in 0..d {
            let w = x[(p, q)];
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    out[(a, b)] += w * c[(p * d + a, q * d + b)];
                }
            }
        }
    }
    out
}

/// `Tr₁ C = Σ_p C_[pp] = Φ_C(I)`.
pub(crate) fn partial_trace_first_raw(c: &DMatrix<C64>, d: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d, d);
    for p in 0..d {
        for a in 0..d {
            for b in 0..d {
                out[(a, b)] += c[(p * d + a, p * d + b)];
            }
        }
    }
    out
}

/// Adjoint of `C ↦ Φ_C(X)` under `Re Tr(A†B)`: the Hermitian matrix
/// `(conj(X) ⊗ R + Xᵀ ⊗ R†)/2`, plus `I ⊗ M` when `shift` is given.
pub(crate) fn adjoint_raw(
    x: &DMatrix<C64>,
    r: &DMatrix<C64>,
    shift: Option<&DMatrix<C64>>,
) -> DMatrix<C64> {
    let d = x.nrows();
    let n = d * d;
    let mut out = DMatrix::zeros(n, n);
    for p in 0..d {
        for q in 0..d {
            let xpq = x[(p, q)].conj() * 0.5;
            let xqp = x[(q, p)] * 0.5;
            for a in 0..d {
                for b in 0..d {
                    let mut v = xpq * r[(a, b)] + xqp * r[(b, a)].conj();
                    if p == q {
                        if let Some(m) = shift {
                            v += m[(a, b)];
                        }
                    }
                    out[(p * d + a, q * d + b)] = v;
                }
            }
        }
    }
    out
}

/// `Φ_C(X)` for a Choi matrix of size `d²×d²`.
pub fn choi_apply(c: &HermMatrix, x: &CMatrix) -> Result<CMatrix> {
    let d = x.require_square()?;
    if c.dim() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: c.dim(),
        });
    }
    Ok(CMatrix::from_inner_unchecked(apply_raw(
        c.matrix().inner(),
        x.inner(),
    )))
}

/// The direct definition `Tr₁[(Xᵀ ⊗ I) C]`, used as an independent check.
pub fn choi_apply_partial_trace(c: &HermMatrix, x: &CMatrix) -> Result<CMatrix> {
    let d = x.require_square()?;
    let m = &x.transpose().kron(&CMatrix::identity(d)) * c.matrix();
    Ok(CMatrix::from_inner_unchecked(partial_trace_first_raw(
        m.inner(),
        d,
    )))
}

/// Choi matrix of `X ↦ Σ_j A_j† X A_j`.
pub fn choi_of_kraus(coeffs: &[CMatrix], d: usize) -> Result<HermMatrix> {
    let n = d * d;
    let mut c = DMatrix::<C64>::zeros(n, n);
    for a in coeffs {
        if a.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                left: a.shape(),
                right: (d, d),
            });
        }
        // v = Σ_p e_p ⊗ A†e_p; block p of v is column p of A†.
        let adj = a.inner().adjoint();
        let mut v = nalgebra::DVector::<C64>::zeros(n);
        for p in 0..d {
            for i in 0..d {
                v[p * d + i] = adj[(i, p)];
            }
        }
        c += &v * v.adjoint();
    }
    Ok(HermMatrix::symmetrized(CMatrix::from_inner_unchecked(c)))
}

/// Kraus coefficients of a single PSD Choi matrix.
pub(crate) fn kraus_of_choi_raw(c: &DMatrix<C64>, d: usize) -> Result<Vec<CMatrix>> {
    let (values, vectors) = eigh_raw(c)?;
    let top = values.first().copied().unwrap_or(0.0);
    let min = values.last().copied().unwrap_or(0.0);
    if min < -EXTRACT_PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let mut out = Vec::new();
    if top <= 0.0 {
        return Ok(out);
    }
    for (j, &lam) in values.iter().enumerate() {
        if lam <= EXTRACT_RANK_CUTOFF * top {
            break;
        }
        let s = lam.sqrt();
        // Column p of A† is block p of the eigenvector.
        let mut adj = DMatrix::<C64>::zeros(d, d);
        for p in 0..d {
            for i in 0..d {
                adj[(i, p)] = vectors[(p * d + i, j)] * s;
            }
        }
        out.push(CMatrix::from_inner_unchecked(adj.adjoint()));
    }
    Ok(out)
}

/// Kraus decomposition of a list of Choi matrices, one per generator.
///
/// Terms are emitted generator by generator in descending eigenvalue order;
/// eigenvalues below `1e-10·λ_max` are dropped.
pub fn extract_kraus(choi_list: &[HermMatrix], mode: Mode) -> Result<KrausCombination> {
    let mut terms = Vec::new();
    for (gen, c) in choi_list.iter().enumerate() {
        let n = c.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Precondition(format!(
                "Choi matrix size {n} is not a perfect square"
            )));
        }
        for coeff in kraus_of_choi_raw(c.matrix().inner(), d)? {
            terms.push(KrausTerm { gen, coeff });
        }
    }
    Ok(KrausCombination::new(mode, terms))
}

/// The conic feasibility instance behind hull membership: find PSD Choi
/// matrices `Cᵢ` with `Σ Φ_{Cᵢ}(xᵢ) = Y` and `Σ Φ_{Cᵢ}(I) = I` (exact) or
/// `⪯ I` (sub-unital).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiProgram {
    pub family: MatrixFamily,
    pub target: CMatrix,
    pub mode: Mode,
}

impl ChoiProgram {
    pub fn new(family: MatrixFamily, target: CMatrix, mode: Mode) -> Result<Self> {
        let d = target.require_square()?;
        if d != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                found: d,
            });
        }
        if family.is_empty() && mode == Mode::ExactUnital {
            return Err(Error::EmptyFamily);
        }
        Ok(Self {
            family,
            target,
            mode,
        })
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    fn check_len(&self, chois: &[HermMatrix]) -> Result<()> {
        if chois.len() != self.family.len() {
            return Err(Error::DimensionMismatch {
                expected: self.family.len(),
                found: chois.len(),
            });
        }
        Ok(())
    }

    /// `Σ Φ_{Cᵢ}(xᵢ)`.
    pub fn evaluate(&self, chois: &[HermMatrix]) -> Result<CMatrix> {
        self.check_len(chois)?;
        let d = self.dim();
        let mut acc = CMatrix::zeros(d, d);
        for (c, x) in chois.iter().zip(self.family.generators()) {
            acc = &acc + &choi_apply(c, x)?;
        }
        Ok(acc)
    }

    /// `Σ Φ_{Cᵢ}(I)`.
    pub fn unitality(&self, chois: &[HermMatrix]) -> Result<CMatrix> {
        self.evaluate_on(chois, &CMatrix::identity(self.dim()))
    }

    fn evaluate_on(&self, chois: &[HermMatrix], x: &CMatrix) -> Result<CMatrix> {
        self.check_len(chois)?;
        let d = self.dim();
        let mut acc = CMatrix::zeros(d, d);
        for c in chois {
            acc = &acc + &choi_apply(c, x)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kraus::evaluate_terms;
    use crate::sampling::{ginibre, random_psd, seeded};

    #[test]
    fn identity_map_extracts_identity() {
        let c = choi_of_kraus(&[CMatrix::identity(2)], 2).unwrap();
        let comb = extract_kraus(&[c], Mode::ExactUnital).unwrap();
        assert_eq!(comb.terms.len(), 1);
        assert!(comb.terms[0].coeff.frob_dist(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn unitary_conjugation_extracts_unitary() {
        let u = CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let c = choi_of_kraus(std::slice::from_ref(&u), 2).unwrap();
        let comb = extract_kraus(&[c], Mode::ExactUnital).unwrap();
        assert_eq!(comb.terms.len(), 1);
        assert!(comb.terms[0].coeff.frob_dist(&u) < 1e-12);
    }

    #[test]
    fn block_formula_matches_partial_trace() {
        let mut rng = seeded(3);
        for d in 1..=3 {
            let c = random_psd(&mut rng, d * d);
            let x = ginibre(&mut rng, d, d);
            let fast = choi_apply(&c, &x).unwrap();
            let slow = choi_apply_partial_trace(&c, &x).unwrap();
            assert!(fast.frob_dist(&slow) < 1e-12);
        }
    }

    #[test]
    fn random_choi_round_trips_through_kraus() {
        let mut rng = seeded(5);
        let d = 2;
        let c = random_psd(&mut rng, d * d);
        let comb = extract_kraus(std::slice::from_ref(&c), Mode::SubUnital).unwrap();
        for _ in 0..5 {
            let x = ginibre(&mut rng, d, d);
            let fam = MatrixFamily::new(vec![x.clone()]).unwrap();
            let via_kraus = evaluate_terms(&fam, &comb.terms).unwrap();
            let direct = choi_apply_partial_trace(&c, &x).unwrap();
            assert!(via_kraus.frob_dist(&direct) < 1e-9);
        }
    }

    #[test]
    fn adjoint_is_adjoint() {
        let mut rng = seeded(9);
        let d = 3;
        let x = ginibre(&mut rng, d, d);
        let r = ginibre(&mut rng, d, d);
        let c = crate::sampling::random_hermitian(&mut rng, d * d);
        let lhs = crate::matrix::real_inner(&r, &choi_apply(&c, &x).unwrap()).unwrap();
        let adj = CMatrix::from_inner_unchecked(adjoint_raw(x.inner(), r.inner(), None));
        let rhs = crate::matrix::real_inner(&adj, c.matrix()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
        assert!(adj.frob_dist(&adj.adjoint()) < 1e-14);
    }

    #[test]
    fn rejects_indefinite_choi() {
        let c = HermMatrix::from_real_diagonal(&[1.0, -0.5, 0.0, 0.0]);
        assert!(matches!(
            extract_kraus(&[c], Mode::SubUnital),
            Err(Error::NotPsd { .. })
        ));
    }
}
