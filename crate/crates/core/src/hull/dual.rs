//! Projected supergradient ascent on the certificate margin.
//!
//! For a direction `(Λ, Γ)` let `t` be the largest eigenvalue over all LMI
//! matrices (and of `Γ` in sub-unital mode). Shifting `Γ` by `−t·I` makes the
//! pair feasible, leaving the margin
//! `g(Λ, Γ) = Re⟨Λ, Y⟩ + Tr Γ − d·t(Λ, Γ)`, which is concave and positively
//! homogeneous. We maximize it over `‖Λ‖_F + ‖Γ‖_F ≤ 1`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::hull::certificate::{lmi_matrix, SeparationCertificate};
use crate::hull::choi::{apply_raw, partial_trace_first_raw};
use crate::kraus::{MatrixFamily, Mode};
use crate::matrix::{eigh_raw, CMatrix, HermMatrix, C64};
use crate::sampling::{ginibre, random_hermitian, seeded};

const RANDOM_STARTS: usize = 3;

struct Eval {
    value: f64,
    grad_lambda: DMatrix<C64>,
    grad_gamma: DMatrix<C64>,
}

fn evaluate(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    lambda: &DMatrix<C64>,
    gamma: &DMatrix<C64>,
) -> Option<Eval> {
    let d = family.dim();
    let lam = CMatrix::from_inner(lambda.clone()).ok()?;
    let gam = HermMatrix::symmetrized(CMatrix::from_inner(gamma.clone()).ok()?);
    let mut best: Option<(f64, DMatrix<C64>, DMatrix<C64>)> = None;
    for x in family.generators() {
        let m = lmi_matrix(x, &lam, &gam);
        let (vals, vecs) = eigh_raw(m.matrix().inner()).ok()?;
        if best.as_ref().is_none_or(|b| vals[0] > b.0) {
            let v = vecs.column(0).into_owned();
            let vv = &v * v.adjoint();
            best = Some((
                vals[0],
                apply_raw(&vv, x.inner()),
                partial_trace_first_raw(&vv, d),
            ));
        }
    }
    if mode == Mode::SubUnital {
        let (vals, vecs) = eigh_raw(gam.matrix().inner()).ok()?;
        if best.as_ref().is_none_or(|b| vals[0] > b.0) {
            let w = vecs.column(0).into_owned();
            best = Some((vals[0], DMatrix::zeros(d, d), &w * w.adjoint()));
        }
    }
    let (t, dl, dg) = best?;
    let df = d as f64;
    let value = crate::matrix::real_inner(&lam, target).ok()? + gam.trace() - df * t;
    let grad_lambda = target.inner() - dl * C64::new(df, 0.0);
    let grad_gamma = DMatrix::<C64>::identity(d, d) - dg * C64::new(df, 0.0);
    Some(Eval {
        value,
        grad_lambda,
        grad_gamma,
    })
}

/// Projection onto `{‖a‖_F + ‖b‖_F ≤ 1}`.
fn project_ball(a: &mut DMatrix<C64>, b: &mut DMatrix<C64>) {
    let na = a.norm();
    let nb = b.norm();
    if na + nb <= 1.0 {
        return;
    }
    let (sa, sb) = if na - nb >= 1.0 {
        (1.0, 0.0)
    } else if nb - na >= 1.0 {
        (0.0, 1.0)
    } else {
        ((na - nb + 1.0) / 2.0, (nb - na + 1.0) / 2.0)
    };
    let fa = if na > 0.0 { sa / na } else { 0.0 };
    let fb = if nb > 0.0 { sb / nb } else { 0.0 };
    *a *= C64::new(fa, 0.0);
    *b *= C64::new(fb, 0.0);
}

fn ascend(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    mut lambda: DMatrix<C64>,
    mut gamma: DMatrix<C64>,
    iters: usize,
) -> Option<(f64, DMatrix<C64>, DMatrix<C64>)> {
    project_ball(&mut lambda, &mut gamma);
    let mut best: Option<(f64, DMatrix<C64>, DMatrix<C64>)> = None;
    for k in 0..iters {
        let e = evaluate(family, target, mode, &lambda, &gamma)?;
        if best.as_ref().is_none_or(|b| e.value > b.0) {
            best = Some((e.value, lambda.clone(), gamma.clone()));
        }
        let gn = (e.grad_lambda.norm_squared() + e.grad_gamma.norm_squared()).sqrt();
        if gn == 0.0 {
            break;
        }
        let step = C64::new(0.2 / ((k + 1) as f64).sqrt() / gn, 0.0);
        lambda += e.grad_lambda * step;
        gamma += e.grad_gamma * step;
        gamma = (&gamma + gamma.adjoint()) * C64::new(0.5, 0.0);
        project_ball(&mut lambda, &mut gamma);
    }
    best
}

/// Searches for a certificate starting from `start` and a few seeded random
/// directions. Returns the best repaired certificate found, valid or not.
pub(crate) fn refine(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    start: (CMatrix, HermMatrix),
    iters: usize,
    seed: u64,
) -> Option<SeparationCertificate> {
    if family.is_empty() {
        return None;
    }
    let d = family.dim();
    let mut starts = vec![(start.0.into_inner(), start.1.into_matrix().into_inner())];
    // Direction from the centroid of the candidate hull points.
    let mut centroid = DMatrix::<C64>::zeros(d, d);
    for x in family.generators() {
        centroid += x.inner();
    }
    let count = family.len() + usize::from(mode == Mode::SubUnital);
    centroid /= C64::new(count as f64, 0.0);
    starts.push((target.inner() - centroid, DMatrix::zeros(d, d)));
    let mut rng = seeded(seed);
    for _ in 0..RANDOM_STARTS {
        let l = ginibre(&mut rng, d, d).into_inner();
        let g = random_hermitian(&mut rng, d).into_matrix().into_inner();
        let s: f64 = rng.random_range(0.1..1.0);
        starts.push((l, g * C64::new(s, 0.0)));
    }

    let mut best: Option<(f64, DMatrix<C64>, DMatrix<C64>)> = None;
    for (l, g) in starts {
        if let Some(found) = ascend(family, target, mode, l, g, iters) {
            if best.as_ref().is_none_or(|b| found.0 > b.0) {
                best = Some(found);
            }
        }
    }
    let (_, l, g) = best?;
    SeparationCertificate::repaired(
        family,
        CMatrix::from_inner(l).ok()?,
        HermMatrix::symmetrized(CMatrix::from_inner(g).ok()?),
        mode,
    )
}
