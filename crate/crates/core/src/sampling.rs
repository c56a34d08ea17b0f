//! Seeded random matrices and combinations for tests, benches and the
//! oracle-comparison command.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::kraus::{KrausCombination, KrausTerm, Mode};
use crate::matrix::{eig_herm, CMatrix, HermMatrix, C64};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    CMatrix::from_row_major(rows, cols, data).expect("finite samples")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermMatrix {
    HermMatrix::symmetrized(ginibre(rng, d, d))
}

/// `G†G` for a Ginibre `G`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermMatrix {
    let g = ginibre(rng, d, d);
    HermMatrix::symmetrized(&g.adjoint() * &g)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d).into_inner();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out: DMatrix<C64> = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            out[(i, j)] *= phase;
        }
    }
    CMatrix::from_inner(out).expect("finite")
}

/// The first `rank` columns of a Haar unitary on `ℂ^ambient`, as vectors.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, rank: usize, ambient: usize) -> Vec<Vec<C64>> {
    assert!(rank <= ambient);
    let u = random_unitary(rng, ambient);
    (0..rank)
        .map(|j| (0..ambient).map(|i| u.get(i, j)).collect())
        .collect()
}

/// Random Hermitian matrix with the given spectrum.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> HermMatrix {
    let u = random_unitary(rng, spectrum.len());
    let d = CMatrix::from_real_diagonal(spectrum);
    HermMatrix::symmetrized(&(&u * &d) * &u.adjoint())
}

/// `P^{-1/2}` for a positive definite `P`.
fn inv_sqrt(p: &CMatrix) -> Option<CMatrix> {
    let e = eig_herm(&HermMatrix::symmetrized(p.clone())).ok()?;
    if e.min() <= 1e-12 {
        return None;
    }
    Some(e.reconstruct_with(|l| 1.0 / l.sqrt()))
}

/// A random combination with `n_terms` terms over a family of `family_len`
/// generators in dimension `d`, valid in `mode`.
///
/// Exact-unital coefficients are normalized by `(Σ Aᵢ†Aᵢ)^{-1/2}`;
/// sub-unital ones are additionally shrunk by a random factor in `(0, 1]`.
pub fn random_combination<R: Rng + ?Sized>(
    rng: &mut R,
    family_len: usize,
    d: usize,
    n_terms: usize,
    mode: Mode,
) -> KrausCombination {
    assert!(family_len > 0 && n_terms > 0);
    loop {
        let raw: Vec<KrausTerm> = (0..n_terms)
            .map(|_| KrausTerm {
                gen: rng.random_range(0..family_len),
                coeff: ginibre(rng, d, d),
            })
            .collect();
        let comb = KrausCombination::new(mode, raw);
        let Some(norm) = inv_sqrt(&comb.gram(d)) else {
            continue;
        };
        let shrink = match mode {
            Mode::ExactUnital => 1.0,
            Mode::SubUnital => rng.random_range(0.0..1.0f64).sqrt().max(1e-3),
        };
        let terms = comb
            .terms
            .into_iter()
            .map(|t| KrausTerm {
                gen: t.gen,
                coeff: (&t.coeff * &norm).scale(shrink),
            })
            .collect();
        return KrausCombination::new(mode, terms);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kraus::{validate_combination, MatrixFamily};

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(7);
        for d in 1..=5 {
            let u = random_unitary(&mut rng, d);
            assert!((&u.adjoint() * &u).frob_dist(&CMatrix::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn combinations_validate() {
        let mut rng = seeded(11);
        let fam = MatrixFamily::new(vec![CMatrix::identity(3); 4]).unwrap();
        for mode in [Mode::ExactUnital, Mode::SubUnital] {
            for n in 1..5 {
                let c = random_combination(&mut rng, 4, 3, n, mode);
                assert!(validate_combination(&fam, &c, 1e-10).valid);
            }
        }
    }
}
