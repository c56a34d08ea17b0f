use cstar_core::commutative::lambda_sequence;
use cstar_core::matrix::{eig_herm, op_norm};
use cstar_core::sampling::{complex_normal, ginibre, random_frame, seeded};
use cstar_core::verifier::{
    collapse_bound, collapse_witness, frame_intertwiner, normalize_family, perturbation_margin,
    verify_polyhedron, verify_polyhedron_with_jobs, Overall, PolyhedronMode, SpectralFamily,
};
use cstar_core::{CMatrix, HermMatrix, MatrixFamily, SolverConfig, C64};
use rand::Rng;

fn lambda_family(d: usize) -> MatrixFamily {
    MatrixFamily::new(
        lambda_sequence(6)
            .into_iter()
            .map(|l| CMatrix::scalar(d, l))
            .collect(),
    )
    .unwrap()
}

fn random_spectral<R: Rng>(rng: &mut R, n: usize, rank: usize, ambient: usize) -> SpectralFamily {
    let eigs = (0..n)
        .map(|_| (0..rank).map(|_| complex_normal(rng)).collect())
        .collect();
    let frames = (0..n).map(|_| random_frame(rng, rank, ambient)).collect();
    SpectralFamily::new(eigs, frames).unwrap()
}

#[test]
fn report_is_consistent_and_job_count_independent() {
    let fam = lambda_family(1);
    let cfg = SolverConfig::default();
    let a = verify_polyhedron(&fam, PolyhedronMode::CStarZero, &cfg).unwrap();
    let b = verify_polyhedron_with_jobs(&fam, PolyhedronMode::CStarZero, &cfg, Some(1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.overall, Overall::IsPolyhedron);
    assert!(a
        .entries
        .iter()
        .enumerate()
        .all(|(i, e)| e.index == i && e.certificate().is_some()));
}

#[test]
fn zero_polyhedra_are_polyhedra() {
    let mut rng = seeded(31);
    let cfg = SolverConfig::default();
    let mut families = vec![lambda_family(2)];
    for _ in 0..3 {
        let d = rng.random_range(1..=2);
        families
            .push(MatrixFamily::new((0..3).map(|_| ginibre(&mut rng, d, d)).collect()).unwrap());
    }
    for fam in families {
        let zero = verify_polyhedron(&fam, PolyhedronMode::CStarZero, &cfg).unwrap();
        if zero.overall == Overall::IsPolyhedron {
            let plain = verify_polyhedron(&fam, PolyhedronMode::CStar, &cfg).unwrap();
            assert_eq!(plain.overall, Overall::IsPolyhedron);
        }
    }
}

#[test]
fn normalization_preserves_verdicts() {
    let cfg = SolverConfig::default();
    let p1 = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
    let p2 = CMatrix::from_real_diagonal(&[0.0, 1.0]);
    let families = [lambda_family(1), MatrixFamily::new(vec![p1, p2]).unwrap()];
    for fam in families {
        let (scaled, factor) = normalize_family(&fam).unwrap();
        assert!(scaled
            .generators()
            .iter()
            .all(|x| op_norm(x).unwrap() < 1.0));
        assert!(factor > 0.0 && factor < 1.0);
        for mode in [PolyhedronMode::CStar, PolyhedronMode::CStarZero] {
            let a = verify_polyhedron(&fam, mode, &cfg).unwrap();
            let b = verify_polyhedron(&scaled, mode, &cfg).unwrap();
            assert_eq!(a.overall, b.overall, "{mode}");
        }
    }
}

#[test]
fn perturbations_within_margin_stay_polyhedra() {
    let fam = lambda_family(1);
    let cfg = SolverConfig::default();
    let eps = perturbation_margin(&fam, PolyhedronMode::CStarZero, &cfg).unwrap();
    assert!(eps > 0.0);
    let mut rng = seeded(32);
    for _ in 0..5 {
        let i = rng.random_range(0..fam.len());
        let dir = ginibre(&mut rng, 1, 1);
        let step = dir.scale(eps * rng.random::<f64>() / op_norm(&dir).unwrap());
        let moved = fam.replaced(i, &fam.generators()[i] + &step).unwrap();
        let report = verify_polyhedron(&moved, PolyhedronMode::CStarZero, &cfg).unwrap();
        assert_eq!(report.overall, Overall::IsPolyhedron);
    }
}

#[test]
fn intertwiner_compresses_onto_source_frame() {
    let mut rng = seeded(33);
    for _ in 0..20 {
        let fam = random_spectral(&mut rng, 2, 3, 5);
        let t = frame_intertwiner(fam.frame(0), fam.frame(1)).unwrap();
        let compressed = &(&t.adjoint() * &fam.element(1)) * &t;
        // Oracle: rebuild Σ λ_{β,j} f_{α,j} f_{α,j}† one rank-one term at a time.
        let mut expected = CMatrix::zeros(5, 5);
        for (j, &l) in fam.eigs(1).iter().enumerate() {
            let f = CMatrix::column(&fam.frame(0)[j]);
            expected = &expected + &(&f * &f.adjoint()).scale_c(l);
        }
        assert!(compressed.frob_dist(&expected) <= 1e-10);
    }
}

#[test]
fn collapse_bound_sweep() {
    let mut rng = seeded(34);
    for _ in 0..100 {
        let rank = rng.random_range(1..=5);
        let ambient = rank + rng.random_range(0..=2);
        let fam = random_spectral(&mut rng, 2, rank, ambient);
        let cb = collapse_bound(&fam, 0, 1).unwrap();
        assert!(cb.actual <= cb.bound + 1e-9);
        let tt = HermMatrix::symmetrized(&cb.t.adjoint() * &cb.t);
        assert!(eig_herm(&tt).unwrap().max() <= 1.0 + 1e-9);
    }
}

#[test]
fn clustered_tuples_collapse() {
    let mut rng = seeded(35);
    // Any two points of a radius-0.07 ball differ by < 0.15 per coordinate.
    let centre = [C64::new(1.0, 0.0), C64::new(2.0, -1.0)];
    let eigs: Vec<Vec<C64>> = (0..50)
        .map(|_| {
            centre
                .iter()
                .map(|&c| {
                    c + C64::from_polar(
                        0.07 * rng.random::<f64>().sqrt(),
                        rng.random_range(0.0..6.3),
                    )
                })
                .collect()
        })
        .collect();
    let frames = (0..50).map(|_| random_frame(&mut rng, 2, 3)).collect();
    let fam = SpectralFamily::new(eigs, frames).unwrap();
    let w = collapse_witness(&fam, 0.3)
        .unwrap()
        .expect("pigeonhole pair");
    // Exhaustive pair scan as the oracle.
    let mut best = f64::INFINITY;
    for a in 0..50 {
        for b in (a + 1)..50 {
            let gap = fam
                .eigs(a)
                .iter()
                .zip(fam.eigs(b))
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            best = best.min(gap);
        }
    }
    assert!(2.0 * best < 0.3);
    assert!(w.residual <= 2.0 * best + 1e-9);
    let rest = fam.to_matrix_family().unwrap().without(w.alpha);
    let value = cstar_core::kraus::apply_combination(&rest, &w.combination).unwrap();
    assert!(op_norm(&(&value - &fam.element(w.alpha))).unwrap() <= w.residual + 1e-9);
}
