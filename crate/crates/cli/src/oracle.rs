//! Seeded agreement suites between the matrix solver and exact oracles.

use cstar_core::commutative::{pointwise_hull_membership, scalar_hull_membership, DiagonalFamily};
use cstar_core::matrix::eig_herm;
use cstar_core::sampling::{complex_normal, hermitian_with_spectrum, random_hermitian, seeded};
use cstar_core::{
    decide_membership, CMatrix, MatrixFamily, MembershipVerdict, Mode, SeparationCertificate,
    SolverConfig, C64,
};
use rand::Rng;
use serde::Serialize;

use crate::CliError;

/// Spectral tolerance of the single-generator criterion.
pub const SPECTRAL_TOL: f64 = 1e-6;

/// Counts for one suite. A contradiction is a decided solver verdict that
/// the oracle refutes.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub instances: usize,
    pub agreements: usize,
    pub undecided: usize,
    pub contradictions: usize,
}

/// A separation certificate together with the query it answers.
#[derive(Clone, Debug)]
pub struct Certified {
    pub family: MatrixFamily,
    pub target: CMatrix,
    pub certificate: SeparationCertificate,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub summary: SuiteSummary,
    pub certified: Vec<Certified>,
}

impl SuiteOutcome {
    /// Records a solver verdict against what the oracle knows about it.
    fn record(
        &mut self,
        family: MatrixFamily,
        target: CMatrix,
        verdict: MembershipVerdict,
        truth: Truth,
    ) {
        let s = &mut self.summary;
        s.instances += 1;
        let agrees = match (&verdict, truth) {
            (MembershipVerdict::Undecided { .. }, _) => {
                s.undecided += 1;
                None
            }
            (v, Truth::Exact(t)) => Some(v.is_member() == t),
            (v, Truth::MemberImplied(t)) => Some(!(t && v.is_not_member())),
        };
        match agrees {
            Some(true) => s.agreements += 1,
            Some(false) => s.contradictions += 1,
            None => {}
        }
        if let MembershipVerdict::NotMember { certificate, .. } = verdict {
            self.certified.push(Certified {
                family,
                target,
                certificate,
            });
        }
    }
}

/// Oracle knowledge: the exact answer, or only that a member must not be
/// rejected.
#[derive(Clone, Copy)]
enum Truth {
    Exact(bool),
    MemberImplied(bool),
}

fn random_mode<R: Rng>(rng: &mut R) -> Mode {
    if rng.random() {
        Mode::SubUnital
    } else {
        Mode::ExactUnital
    }
}

/// Convex (or sub-convex) weights for `n` points.
fn random_weights<R: Rng>(rng: &mut R, n: usize, mode: Mode) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let slack = if mode == Mode::SubUnital {
        rng.random::<f64>()
    } else {
        0.0
    };
    let total = w.iter().sum::<f64>() + slack;
    w.into_iter().map(|x| x / total).collect()
}

/// `d = 1`: the solver against planar convex-hull geometry.
pub fn scalar_suite(
    seed: u64,
    instances: usize,
    cfg: &SolverConfig,
) -> Result<SuiteOutcome, CliError> {
    let mut rng = seeded(seed);
    let mut out = SuiteOutcome::default();
    for _ in 0..instances {
        let n = rng.random_range(1..=6);
        let values: Vec<C64> = (0..n).map(|_| complex_normal(&mut rng)).collect();
        let mode = random_mode(&mut rng);
        let target = if rng.random() {
            let w = random_weights(&mut rng, n, mode);
            values.iter().zip(&w).map(|(v, w)| v * w).sum()
        } else {
            complex_normal(&mut rng)
        };
        let family = MatrixFamily::new(values.iter().map(|&v| CMatrix::scalar(1, v)).collect())?;
        let target_m = CMatrix::scalar(1, target);
        let verdict = decide_membership(&family, &target_m, mode, cfg)?;
        let truth = scalar_hull_membership(&values, target, mode);
        out.record(family, target_m, verdict, Truth::Exact(truth));
    }
    Ok(out)
}

/// Diagonal families: pointwise membership must lift to matrix membership.
/// The converse is not required, so only pointwise members can contradict.
pub fn diagonal_suite(
    seed: u64,
    instances: usize,
    cfg: &SolverConfig,
) -> Result<SuiteOutcome, CliError> {
    let mut rng = seeded(seed);
    let mut out = SuiteOutcome::default();
    for _ in 0..instances {
        let points = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let functions: Vec<Vec<C64>> = (0..n)
            .map(|_| (0..points).map(|_| complex_normal(&mut rng)).collect())
            .collect();
        let diag = DiagonalFamily::new(points, functions)?;
        let mode = random_mode(&mut rng);
        let target: Vec<C64> = if rng.random() {
            (0..points)
                .map(|x| {
                    let w = random_weights(&mut rng, n, mode);
                    diag.values_at(x).iter().zip(&w).map(|(v, w)| v * w).sum()
                })
                .collect()
        } else {
            (0..points).map(|_| complex_normal(&mut rng)).collect()
        };
        let oracle = pointwise_hull_membership(&diag, &target, mode)?;
        let family = diag.to_matrix_family()?;
        let target_m = CMatrix::from_diagonal(&target);
        let verdict = decide_membership(&family, &target_m, mode, cfg)?;
        out.record(
            family,
            target_m,
            verdict,
            Truth::MemberImplied(oracle.member),
        );
    }
    Ok(out)
}

/// One Hermitian generator `X`: `Y` is a member iff its spectrum lies in
/// `[λ_min(X), λ_max(X)]`.
pub fn hermitian_suite(
    seed: u64,
    instances: usize,
    cfg: &SolverConfig,
) -> Result<SuiteOutcome, CliError> {
    let mut rng = seeded(seed);
    let mut out = SuiteOutcome::default();
    for _ in 0..instances {
        let d = rng.random_range(1..=4);
        let x = random_hermitian(&mut rng, d);
        let e = eig_herm(&x)?;
        let (lo, hi) = (e.min(), e.max());
        let width = hi - lo + 0.6;
        let spec: Vec<f64> = (0..d)
            .map(|_| lo - 0.3 + rng.random::<f64>() * width)
            .collect();
        let y = hermitian_with_spectrum(&mut rng, &spec);
        let family = MatrixFamily::new(vec![x.into_matrix()])?;
        let target = y.into_matrix();
        let verdict = decide_membership(&family, &target, Mode::ExactUnital, cfg)?;
        let inside = spec
            .iter()
            .all(|&s| s >= lo - SPECTRAL_TOL && s <= hi + SPECTRAL_TOL);
        out.record(family, target, verdict, Truth::Exact(inside));
    }
    Ok(out)
}
