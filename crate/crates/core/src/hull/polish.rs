//! Levenberg–Marquardt refinement of Kraus factors.
//!
//! ADMM converges slowly when the hull point is reached by an essentially
//! unique low-rank combination (a generator tested against itself, say).
//! Near such points it is much faster to fix the rank found by ADMM and solve
//! the nonlinear equations `Σ Aₖ† x_{g(k)} Aₖ = Y`, `Σ Aₖ†Aₖ (+ B†B) = I`
//! directly, where `B` absorbs the slack in sub-unital mode. The caller
//! re-checks whatever comes out, so this step can only help.

use nalgebra::{DMatrix, DVector};

use crate::kraus::{KrausCombination, KrausTerm, MatrixFamily, Mode};
use crate::matrix::{eigh_raw, CMatrix, C64};

const MAX_STEPS: usize = 40;
const DROP_BELOW: f64 = 1e-8;
const DONE_BELOW: f64 = 1e-28;
const MAX_DAMPING_TRIES: usize = 30;
const MAX_RANK_TRIES: usize = 8;

struct Problem<'a> {
    xs: Vec<&'a DMatrix<C64>>,
    /// Generator of each factor; `None` marks the slack factor.
    gens: Vec<Option<usize>>,
    y: DMatrix<C64>,
    d: usize,
    weight: f64,
}

fn push_complex(out: &mut Vec<f64>, m: &DMatrix<C64>) {
    for z in m.iter() {
        out.push(z.re);
        out.push(z.im);
    }
}

impl Problem<'_> {
    fn residual(&self, factors: &[DMatrix<C64>]) -> DVector<f64> {
        let d = self.d;
        let mut value = -self.y.clone();
        let mut gram = -DMatrix::<C64>::identity(d, d);
        for (a, g) in factors.iter().zip(&self.gens) {
            if let Some(g) = g {
                value += a.adjoint() * self.xs[*g] * a;
            }
            gram += a.adjoint() * a;
        }
        value *= C64::new(self.weight, 0.0);
        let mut out = Vec::with_capacity(4 * d * d);
        push_complex(&mut out, &value);
        push_complex(&mut out, &gram);
        DVector::from_vec(out)
    }

    fn jacobian(&self, factors: &[DMatrix<C64>]) -> DMatrix<f64> {
        let d = self.d;
        let rows = 4 * d * d;
        let cols = 2 * d * d * factors.len();
        let mut jac = DMatrix::<f64>::zeros(rows, cols);
        let mut col = 0;
        let mut buf = Vec::with_capacity(rows);
        for (a, g) in factors.iter().zip(&self.gens) {
            let xa = g.map(|g| self.xs[g] * a);
            let ax = g.map(|g| a.adjoint() * self.xs[g]);
            let ad = a.adjoint();
            // nalgebra is column-major, so parameter order is (j, i).
            for j in 0..d {
                for i in 0..d {
                    for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                        // E = unit·e_i e_jᵀ; d(A†MA) = E†MA + A†ME.
                        let mut dv = DMatrix::<C64>::zeros(d, d);
                        if let (Some(xa), Some(ax)) = (&xa, &ax) {
                            for c in 0..d {
                                dv[(j, c)] += unit.conj() * xa[(i, c)];
                                dv[(c, j)] += ax[(c, i)] * unit;
                            }
                            dv *= C64::new(self.weight, 0.0);
                        }
                        let mut dg = DMatrix::<C64>::zeros(d, d);
                        for c in 0..d {
                            dg[(j, c)] += unit.conj() * a[(i, c)];
                            dg[(c, j)] += ad[(c, i)] * unit;
                        }
                        buf.clear();
                        push_complex(&mut buf, &dv);
                        push_complex(&mut buf, &dg);
                        jac.column_mut(col).copy_from_slice(&buf);
                        col += 1;
                    }
                }
            }
        }
        jac
    }
}

fn apply_step(factors: &[DMatrix<C64>], step: &DVector<f64>) -> Vec<DMatrix<C64>> {
    let mut k = 0;
    factors
        .iter()
        .map(|a| {
            let mut b = a.clone();
            for z in b.iter_mut() {
                *z += C64::new(step[k], step[k + 1]);
                k += 2;
            }
            b
        })
        .collect()
}

/// `√(I − G)` with negative eigenvalues clipped.
fn slack_root(gram: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let d = gram.nrows();
    let s = DMatrix::<C64>::identity(d, d) - gram;
    let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
    let (vals, vecs) = eigh_raw(&s).ok()?;
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l.max(0.0).sqrt());
    }
    Some(scaled * vecs.adjoint())
}

/// Levenberg–Marquardt on the residual; returns the final factors and cost.
fn levenberg_marquardt(
    problem: &Problem,
    mut factors: Vec<DMatrix<C64>>,
) -> (Vec<DMatrix<C64>>, f64) {
    let mut r = problem.residual(&factors);
    let mut cost = r.norm_squared();
    let mut mu = 1e-6;
    for _ in 0..MAX_STEPS {
        if cost < DONE_BELOW {
            break;
        }
        let jac = problem.jacobian(&factors);
        let jjt = &jac * jac.transpose();
        let mut improved = false;
        for _ in 0..MAX_DAMPING_TRIES {
            let mut lhs = jjt.clone();
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += mu * (1.0 + jjt[(i, i)]);
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = -(jac.transpose() * chol.solve(&r));
            let trial = apply_step(&factors, &step);
            let r_trial = problem.residual(&trial);
            let c_trial = r_trial.norm_squared();
            if c_trial.is_finite() && c_trial < cost {
                factors = trial;
                r = r_trial;
                cost = c_trial;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (factors, cost)
}

/// Refines `start` toward an exact solution. The true solution often has
/// lower rank than the ADMM iterate, so the leading `r` terms are tried for
/// increasing `r`. Returns the best refined terms found (unitality is only
/// approximate; the caller renormalizes).
pub(crate) fn polish(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    start: &KrausCombination,
    scale: f64,
) -> Option<Vec<KrausTerm>> {
    let d = family.dim();
    let total: f64 = start
        .terms
        .iter()
        .map(|t| t.coeff.inner().norm_squared())
        .sum();
    let mut kept: Vec<&KrausTerm> = start
        .terms
        .iter()
        .filter(|t| t.coeff.inner().norm_squared() > DROP_BELOW * total)
        .collect();
    if kept.is_empty() {
        return None;
    }
    kept.sort_by(|a, b| {
        b.coeff
            .inner()
            .norm_squared()
            .total_cmp(&a.coeff.inner().norm_squared())
    });
    let xs: Vec<&DMatrix<C64>> = family.generators().iter().map(CMatrix::inner).collect();

    let mut best: Option<(f64, Vec<KrausTerm>)> = None;
    for rank in 1..=kept.len().min(MAX_RANK_TRIES) {
        let lead = &kept[..rank];
        let mut gens: Vec<Option<usize>> = lead.iter().map(|t| Some(t.gen)).collect();
        let mut factors: Vec<DMatrix<C64>> = lead.iter().map(|t| t.coeff.inner().clone()).collect();
        if mode == Mode::SubUnital {
            let gram = factors
                .iter()
                .fold(DMatrix::<C64>::zeros(d, d), |acc, a| acc + a.adjoint() * a);
            gens.push(None);
            factors.push(slack_root(&gram)?);
        }
        let problem = Problem {
            xs: xs.clone(),
            gens,
            y: target.inner().clone(),
            d,
            weight: 1.0 / scale,
        };
        let (factors, cost) = levenberg_marquardt(&problem, factors);
        if best.as_ref().is_none_or(|b| cost < b.0) {
            let mut terms = Vec::with_capacity(factors.len());
            for (a, g) in factors.into_iter().zip(&problem.gens) {
                if let Some(gen) = *g {
                    terms.push(KrausTerm {
                        gen,
                        coeff: CMatrix::from_inner(a).ok()?,
                    });
                }
            }
            best = Some((cost, terms));
        }
        if best.as_ref().is_some_and(|b| b.0 < DONE_BELOW) {
            break;
        }
    }
    best.map(|(_, terms)| terms)
}
