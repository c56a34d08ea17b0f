//! Hull membership and hull distance via the Choi-matrix distance problem
//!
//! ```text
//! minimize   ½ ‖Σᵢ Φ_{Cᵢ}(xᵢ) − Y‖_F²
//! subject to Cᵢ ⪰ 0,  Σᵢ Φ_{Cᵢ}(I) + S = I,  S ⪰ 0 (sub-unital) or S = 0 (exact)
//! ```
//!
//! solved by over-relaxed ADMM that alternates between the affine/quadratic
//! part (a small dense KKT solve in the residual `R` and the unitality
//! multiplier `M`) and the product of PSD cones (eigenvalue clipping).
//!
//! At a fixed point, `Λ = −R` and `Γ = −M` satisfy the certificate LMIs, so
//! every check turns the current dual iterate into a candidate separation
//! certificate. The primal iterate is renormalized by `(Σ Φ_{Cᵢ}(I))^{-1/2}`
//! to obtain an exactly feasible witness. Targets are declared members when
//! that witness is within `feas_tol`, non-members when a valid certificate has
//! been found, and undecided otherwise.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::certificate::{verify_certificate, SeparationCertificate};
use crate::hull::choi::{
    adjoint_raw, apply_raw, kraus_of_choi_raw, partial_trace_first_raw, ChoiProgram,
};
use crate::hull::{dual, polish};
use crate::kraus::{evaluate_terms, KrausCombination, KrausTerm, MatrixFamily, Mode};
use crate::matrix::{eigh_raw, op_norm, CMatrix, HermMatrix, C64};

const CHECK_EVERY: usize = 10;
/// Distance runs stop once a window fails to shrink the gap by this ratio.
const STALL_WINDOW: usize = 5000;
const STALL_RATIO: f64 = 0.9;
/// Kraus polishing kicks in once the relative residual is this small.
const POLISH_BELOW: f64 = 1e-1;
const POLISH_EVERY: usize = 200;
const ADAPT_EVERY: usize = 50;
const DUAL_REFINE_ITERS: usize = 1500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Frobenius residual at which a witness counts as membership.
    pub feas_tol: f64,
    /// Eigenvalue slack allowed in certificate checks.
    pub cert_tol: f64,
    pub max_iter: usize,
    /// ADMM over-relaxation factor in `(0, 2)`.
    pub over_relaxation: f64,
    pub seed: u64,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Relative Frobenius gap at which distance runs stop.
    pub gap_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            cert_tol: 1e-8,
            max_iter: 50_000,
            over_relaxation: 1.6,
            seed: 0,
            rho: 1.0,
            gap_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.feas_tol, self.cert_tol, self.rho, self.gap_tol];
        if positive.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Precondition(
                "tolerances and rho must be positive".into(),
            ));
        }
        if !(self.over_relaxation > 0.0 && self.over_relaxation < 2.0) {
            return Err(Error::Precondition(
                "over_relaxation must lie in (0, 2)".into(),
            ));
        }
        Ok(())
    }
}

/// Three-valued outcome of a membership query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MembershipVerdict {
    Member {
        witness: KrausCombination,
        residual: f64,
    },
    NotMember {
        certificate: SeparationCertificate,
        distance_lower_bound: f64,
    },
    Undecided {
        best_residual: f64,
        iterations: usize,
    },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member { .. })
    }

    pub fn is_not_member(&self) -> bool {
        matches!(self, MembershipVerdict::NotMember { .. })
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, MembershipVerdict::Undecided { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            MembershipVerdict::Member { .. } => "member",
            MembershipVerdict::NotMember { .. } => "not_member",
            MembershipVerdict::Undecided { .. } => "undecided",
        }
    }
}

/// Certified operator-norm distance interval from a target to a hull.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullDistance {
    pub upper: f64,
    pub lower: f64,
    pub primal_witness: Option<KrausCombination>,
    pub dual_witness: Option<SeparationCertificate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    /// Stop at the first witness or certificate.
    Decide,
    /// Keep going until the primal and dual bounds meet.
    Distance,
}

/// Everything one solver run produces.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub verdict: MembershipVerdict,
    /// `‖apply(witness) − Y‖_op` for the best feasible witness.
    pub upper: f64,
    /// Certified lower bound on the operator-norm distance.
    pub lower: f64,
    pub witness: Option<KrausCombination>,
    pub certificate: Option<SeparationCertificate>,
    pub iterations: usize,
}

impl SolveReport {
    pub fn distance(&self) -> HullDistance {
        HullDistance {
            upper: self.upper,
            lower: self.lower,
            primal_witness: self.witness.clone(),
            dual_witness: self.certificate.clone(),
        }
    }
}

pub fn decide_membership(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    config: &SolverConfig,
) -> Result<MembershipVerdict> {
    Ok(solve(family, target, mode, config, Goal::Decide)?.verdict)
}

pub fn hull_distance(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    config: &SolverConfig,
) -> Result<HullDistance> {
    Ok(solve(family, target, mode, config, Goal::Distance)?.distance())
}

pub fn solve(
    family: &MatrixFamily,
    target: &CMatrix,
    mode: Mode,
    config: &SolverConfig,
    goal: Goal,
) -> Result<SolveReport> {
    config.validate()?;
    let program = ChoiProgram::new(family.clone(), target.clone(), mode)?;
    if family.is_empty() {
        return Ok(solve_zero_hull(&program, config));
    }
    Solver::new(&program, config, goal).run()
}

/// The sub-unital hull of the empty family is `{0}`.
fn solve_zero_hull(program: &ChoiProgram, config: &SolverConfig) -> SolveReport {
    let y = &program.target;
    let d = program.dim();
    let upper = op_norm(y).unwrap_or(f64::NAN);
    let residual = y.frob_norm();
    if residual <= config.feas_tol {
        let witness = KrausCombination::new(Mode::SubUnital, Vec::new());
        return SolveReport {
            verdict: MembershipVerdict::Member {
                witness: witness.clone(),
                residual,
            },
            upper,
            lower: 0.0,
            witness: Some(witness),
            certificate: None,
            iterations: 0,
        };
    }
    let cert = SeparationCertificate {
        lambda: y.clone(),
        gamma: HermMatrix::zeros(d),
        mode: Mode::SubUnital,
    }
    .normalized();
    let lower = cert.operator_lower_bound(y);
    SolveReport {
        verdict: MembershipVerdict::NotMember {
            certificate: cert.clone(),
            distance_lower_bound: lower,
        },
        upper,
        lower,
        witness: Some(KrausCombination::new(Mode::SubUnital, Vec::new())),
        certificate: Some(cert),
        iterations: 0,
    }
}

struct Witness {
    residual_f: f64,
    chois: Vec<DMatrix<C64>>,
}

struct Solver<'a> {
    program: &'a ChoiProgram,
    config: &'a SolverConfig,
    goal: Goal,
    d: usize,
    sub: bool,
    /// Data are divided by `scale` so generators and target have unit size.
    scale: f64,
    xs: Vec<DMatrix<C64>>,
    y: DMatrix<C64>,
    rho: f64,
    factor: Cholesky<f64, Dyn>,
    /// Choi blocks followed by the slack block in sub-unital mode.
    z: Vec<DMatrix<C64>>,
    u: Vec<DMatrix<C64>>,
    r: DMatrix<C64>,
    mu: DMatrix<C64>,
    prim_res: f64,
    dual_res: f64,
}

impl<'a> Solver<'a> {
    fn new(program: &'a ChoiProgram, config: &'a SolverConfig, goal: Goal) -> Self {
        let d = program.dim();
        let k = program.family.len();
        let sub = program.mode == Mode::SubUnital;
        let size = |m: &CMatrix| m.frob_norm() / (d as f64).sqrt();
        let scale = program
            .family
            .generators()
            .iter()
            .map(size)
            .fold(size(&program.target), f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let xs: Vec<DMatrix<C64>> = program
            .family
            .generators()
            .iter()
            .map(|x| x.inner() / C64::new(scale, 0.0))
            .collect();
        let y = program.target.inner() / C64::new(scale, 0.0);
        let n = d * d;
        let init = DMatrix::<C64>::identity(n, n) * C64::new(1.0 / (k * d) as f64, 0.0);
        let mut z = vec![init; k];
        let mut u = vec![DMatrix::zeros(n, n); k];
        if sub {
            z.push(DMatrix::zeros(d, d));
            u.push(DMatrix::zeros(d, d));
        }
        let mut solver = Solver {
            program,
            config,
            goal,
            d,
            sub,
            scale,
            xs,
            y,
            rho: config.rho,
            factor: Cholesky::new(DMatrix::identity(1, 1)).expect("1x1 identity"),
            z,
            u,
            r: DMatrix::zeros(d, d),
            mu: DMatrix::zeros(d, d),
            prim_res: f64::INFINITY,
            dual_res: f64::INFINITY,
        };
        solver.factor = solver.build_factor();
        solver
    }

    fn k(&self) -> usize {
        self.xs.len()
    }

    // Real coordinates: R as (re, im) pairs; M as its diagonal followed by
    // √2·(re, im) of the strict upper triangle. Both are orthonormal for
    // the real inner product Re Tr(A†B).
    fn pack(&self, r: &DMatrix<C64>, mu: &DMatrix<C64>) -> DVector<f64> {
        let d = self.d;
        let mut v = DVector::zeros(3 * d * d);
        let mut idx = 0;
        for i in 0..d {
            for j in 0..d {
                v[idx] = r[(i, j)].re;
                v[idx + 1] = r[(i, j)].im;
                idx += 2;
            }
        }
        for p in 0..d {
            v[idx] = mu[(p, p)].re;
            idx += 1;
        }
        let s2 = std::f64::consts::SQRT_2;
        for p in 0..d {
            for q in p + 1..d {
                v[idx] = s2 * mu[(p, q)].re;
                v[idx + 1] = s2 * mu[(p, q)].im;
                idx += 2;
            }
        }
        v
    }

    fn unpack(&self, v: &DVector<f64>) -> (DMatrix<C64>, DMatrix<C64>) {
        let d = self.d;
        let mut r = DMatrix::zeros(d, d);
        let mut mu = DMatrix::zeros(d, d);
        let mut idx = 0;
        for i in 0..d {
            for j in 0..d {
                r[(i, j)] = C64::new(v[idx], v[idx + 1]);
                idx += 2;
            }
        }
        for p in 0..d {
            mu[(p, p)] = C64::new(v[idx], 0.0);
            idx += 1;
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for p in 0..d {
            for q in p + 1..d {
                let z = C64::new(v[idx] * h, v[idx + 1] * h);
                mu[(p, q)] = z;
                mu[(q, p)] = z.conj();
                idx += 2;
            }
        }
        (r, mu)
    }

    /// The KKT operator `(R, M) ↦ (R + ρ⁻¹ Σ Φᵢ(Hᵢ), ρ⁻¹(Σ Tr₁ Hᵢ + [sub] M))`
    /// with `Hᵢ = Φᵢ*(R) + I ⊗ M`.
    fn kkt_apply(&self, r: &DMatrix<C64>, mu: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
        let d = self.d;
        let inv = C64::new(1.0 / self.rho, 0.0);
        let mut out_r = r.clone();
        let mut out_mu = DMatrix::zeros(d, d);
        for x in &self.xs {
            let h = adjoint_raw(x, r, Some(mu));
            out_r += apply_raw(&h, x) * inv;
            out_mu += partial_trace_first_raw(&h, d) * inv;
        }
        if self.sub {
            out_mu += mu * inv;
        }
        (out_r, out_mu)
    }

    fn build_factor(&self) -> Cholesky<f64, Dyn> {
        let n = 3 * self.d * self.d;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let (r, mu) = self.unpack(&e);
            let (or, omu) = self.kkt_apply(&r, &mu);
            m.set_column(j, &self.pack(&or, &omu));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Cholesky::new(sym).expect("KKT operator is positive definite")
    }

    fn set_rho(&mut self, rho: f64) {
        let ratio = C64::new(self.rho / rho, 0.0);
        for u in &mut self.u {
            *u *= ratio;
        }
        self.rho = rho;
        self.factor = self.build_factor();
    }

    #[allow(clippy::needless_range_loop)]
    fn step(&mut self) {
        let d = self.d;
        let k = self.k();
        let alpha = self.config.over_relaxation;
        let inv = C64::new(1.0 / self.rho, 0.0);
        let v: Vec<DMatrix<C64>> = self.z.iter().zip(&self.u).map(|(z, u)| z - u).collect();

        let mut b_r = -self.y.clone();
        let mut b_mu = -DMatrix::<C64>::identity(d, d);
        for (vi, x) in v.iter().zip(&self.xs) {
            b_r += apply_raw(vi, x);
            b_mu += partial_trace_first_raw(vi, d);
        }
        if self.sub {
            b_mu += &v[k];
        }
        let b_mu = (&b_mu + b_mu.adjoint()) * C64::new(0.5, 0.0);
        let sol = self.factor.solve(&self.pack(&b_r, &b_mu));
        let (r, mu) = self.unpack(&sol);

        let mut prim = 0.0;
        let mut dual = 0.0;
        for i in 0..self.z.len() {
            let w = if i < k {
                &v[i] - adjoint_raw(&self.xs[i], &r, Some(&mu)) * inv
            } else {
                &v[i] - &mu * inv
            };
            let w_hat = &w * C64::new(alpha, 0.0) + &self.z[i] * C64::new(1.0 - alpha, 0.0);
            let z_new = project_psd(&(&w_hat + &self.u[i]));
            self.u[i] += &w_hat - &z_new;
            prim += (&w - &z_new).norm_squared();
            dual += (&z_new - &self.z[i]).norm_squared();
            self.z[i] = z_new;
        }
        self.r = r;
        self.mu = mu;
        self.prim_res = prim.sqrt();
        self.dual_res = self.rho * dual.sqrt();
    }

    fn adapt_rho(&mut self) {
        if self.prim_res > 10.0 * self.dual_res && self.rho < 1e6 {
            self.set_rho(self.rho * 2.0);
        } else if self.dual_res > 10.0 * self.prim_res && self.rho > 1e-6 {
            self.set_rho(self.rho / 2.0);
        }
    }

    /// Renormalizes the cone iterate into an exactly feasible point and
    /// returns its (unscaled) Frobenius residual.
    fn witness_check(&self) -> Option<Witness> {
        let d = self.d;
        let k = self.k();
        let mut p = DMatrix::<C64>::zeros(d, d);
        let mut val = DMatrix::<C64>::zeros(d, d);
        for (c, x) in self.z[..k].iter().zip(&self.xs) {
            p += partial_trace_first_raw(c, d);
            val += apply_raw(c, x);
        }
        let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
        let (vals, vecs) = eigh_raw(&p).ok()?;
        let norm = match self.program.mode {
            Mode::ExactUnital => {
                if *vals.last()? <= 1e-14 {
                    return None;
                }
                reconstruct(&vals, &vecs, |l| 1.0 / l.sqrt())
            }
            Mode::SubUnital => {
                let top = vals[0];
                let s = if top > 1.0 { 1.0 / top.sqrt() } else { 1.0 };
                DMatrix::identity(d, d) * C64::new(s, 0.0)
            }
        };
        let fixed = &norm * val * &norm;
        let residual_f = (&fixed - &self.y).norm() * self.scale;
        let chois = self.z[..k]
            .iter()
            .map(|c| {
                let big = kron_identity(&norm);
                &big * c * &big
            })
            .collect();
        Some(Witness { residual_f, chois })
    }

    fn certificate_check(&self) -> Option<SeparationCertificate> {
        let lambda = CMatrix::from_inner(-&self.r).ok()?;
        let gamma = CMatrix::from_inner(&self.mu * C64::new(-self.scale, 0.0)).ok()?;
        let cert = SeparationCertificate::repaired(
            &self.program.family,
            lambda,
            HermMatrix::symmetrized(gamma),
            self.program.mode,
        )?;
        self.is_valid(&cert).then_some(cert)
    }

    fn is_valid(&self, cert: &SeparationCertificate) -> bool {
        verify_certificate(
            cert,
            &self.program.family,
            &self.program.target,
            self.config.cert_tol,
        )
        .valid
    }

    fn extract(&self, chois: &[DMatrix<C64>]) -> Option<(KrausCombination, f64)> {
        let d = self.d;
        let mut terms = Vec::new();
        for (gen, c) in chois.iter().enumerate() {
            for coeff in kraus_of_choi_raw(c, d).ok()? {
                terms.push(KrausTerm { gen, coeff });
            }
        }
        let comb = normalize_terms(KrausCombination::new(self.program.mode, terms), d)?;
        let value = evaluate_terms(&self.program.family, &comb.terms).ok()?;
        let residual = value.frob_dist(&self.program.target);
        Some((comb, residual))
    }

    fn polished(&self, chois: &[DMatrix<C64>]) -> Option<(KrausCombination, f64)> {
        let (start, _) = self.extract(chois)?;
        let p = &self.program;
        let terms = polish::polish(&p.family, &p.target, p.mode, &start, self.scale)?;
        let comb = normalize_terms(KrausCombination::new(p.mode, terms), self.d)?;
        let value = evaluate_terms(&p.family, &comb.terms).ok()?;
        Some((comb, value.frob_dist(&p.target)))
    }

    fn run(mut self) -> Result<SolveReport> {
        let cfg = self.config;
        let target = &self.program.target;
        let mut best_witness: Option<Witness> = None;
        let mut best_cert: Option<(SeparationCertificate, f64)> = None;
        let mut member: Option<(KrausCombination, f64)> = None;
        let mut iterations = 0;
        let adapt_until = cfg.max_iter * 4 / 5;
        let mut checkpoint_gap = f64::INFINITY;
        let mut next_polish = 0;

        for it in 1..=cfg.max_iter {
            self.step();
            iterations = it;
            if it % ADAPT_EVERY == 0 && it <= adapt_until {
                self.adapt_rho();
            }
            if it % CHECK_EVERY != 0 && it != cfg.max_iter {
                continue;
            }
            if let Some(w) = self.witness_check() {
                if w.residual_f <= cfg.feas_tol {
                    if let Some((comb, res)) = self.extract(&w.chois) {
                        if res <= cfg.feas_tol {
                            member = Some((comb, res));
                        }
                    }
                }
                if member.is_none()
                    && it >= next_polish
                    && w.residual_f <= POLISH_BELOW * self.scale
                {
                    next_polish = it + POLISH_EVERY;
                    if let Some((comb, res)) = self.polished(&w.chois) {
                        if res <= cfg.feas_tol {
                            member = Some((comb, res));
                        }
                    }
                }
                if best_witness
                    .as_ref()
                    .is_none_or(|b| w.residual_f < b.residual_f)
                {
                    best_witness = Some(w);
                }
                if member.is_some() {
                    break;
                }
            }
            if let Some(cert) = self.certificate_check() {
                let lower_f = cert.frobenius_lower_bound(target);
                if best_cert.as_ref().is_none_or(|(_, l)| lower_f > *l) {
                    best_cert = Some((cert, lower_f));
                }
                match self.goal {
                    Goal::Decide => break,
                    Goal::Distance => {
                        let upper_f = best_witness
                            .as_ref()
                            .map_or(f64::INFINITY, |w| w.residual_f);
                        let lower_f = best_cert.as_ref().map_or(0.0, |(_, l)| *l);
                        let gap = upper_f - lower_f;
                        if gap <= cfg.gap_tol * (1.0 + upper_f) {
                            break;
                        }
                        if it % STALL_WINDOW == 0 {
                            if gap > STALL_RATIO * checkpoint_gap {
                                break;
                            }
                            checkpoint_gap = gap;
                        }
                    }
                }
            }
        }

        if member.is_none() && best_cert.is_none() {
            let start_lambda = CMatrix::from_inner(-&self.r).ok();
            let start_gamma = CMatrix::from_inner(&self.mu * C64::new(-self.scale, 0.0)).ok();
            if let (Some(l), Some(g)) = (start_lambda, start_gamma) {
                let refined = dual::refine(
                    &self.program.family,
                    target,
                    self.program.mode,
                    (l, HermMatrix::symmetrized(g)),
                    DUAL_REFINE_ITERS,
                    cfg.seed,
                );
                if let Some(cert) = refined.filter(|c| self.is_valid(c)) {
                    let l = cert.frobenius_lower_bound(target);
                    best_cert = Some((cert, l));
                }
            }
        }

        let witness = match &member {
            Some((comb, _)) => Some(comb.clone()),
            None => best_witness
                .as_ref()
                .and_then(|w| self.extract(&w.chois))
                .map(|(c, _)| c),
        };
        let upper = match &witness {
            Some(w) => {
                let value = evaluate_terms(&self.program.family, &w.terms)?;
                op_norm(&(&value - target))?
            }
            None => f64::INFINITY,
        };
        let certificate = best_cert.map(|(c, _)| c);
        let lower = if member.is_some() {
            0.0
        } else {
            certificate
                .as_ref()
                .map_or(0.0, |c| c.operator_lower_bound(target))
        };
        let verdict = match (member, &certificate) {
            (Some((witness, residual)), _) => MembershipVerdict::Member { witness, residual },
            (None, Some(cert)) => MembershipVerdict::NotMember {
                certificate: cert.clone(),
                distance_lower_bound: lower,
            },
            (None, None) => MembershipVerdict::Undecided {
                best_residual: best_witness.map_or(f64::INFINITY, |w| w.residual_f),
                iterations,
            },
        };
        Ok(SolveReport {
            verdict,
            upper,
            lower,
            witness,
            certificate,
            iterations,
        })
    }
}

fn reconstruct(vals: &[f64], vecs: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(l));
    }
    scaled * vecs.adjoint()
}

fn kron_identity(m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    DMatrix::<C64>::identity(d, d).kronecker(m)
}

/// Euclidean projection of a (numerically) Hermitian matrix onto the PSD cone.
fn project_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    if h.nrows() == 1 {
        return DMatrix::from_element(1, 1, C64::new(h[(0, 0)].re.max(0.0), 0.0));
    }
    let eig = h.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    let mut any_neg = false;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        if l < 0.0 {
            any_neg = true;
            scaled.column_mut(j).fill(C64::new(0.0, 0.0));
        } else {
            scaled.column_mut(j).scale_mut(l);
        }
    }
    if !any_neg {
        return h;
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Rescales Kraus coefficients so that `Σ Aᵢ†Aᵢ = I` (exact) or `⪯ I` (sub).
fn normalize_terms(comb: KrausCombination, d: usize) -> Option<KrausCombination> {
    let p = comb.gram(d);
    let (vals, vecs) = eigh_raw(p.inner()).ok()?;
    let norm = match comb.mode {
        Mode::ExactUnital => {
            if *vals.last()? <= 1e-14 {
                return None;
            }
            reconstruct(&vals, &vecs, |l| 1.0 / l.sqrt())
        }
        Mode::SubUnital => {
            let top = vals.first().copied().unwrap_or(0.0);
            let s = if top > 1.0 { 1.0 / top.sqrt() } else { 1.0 };
            DMatrix::identity(d, d) * C64::new(s, 0.0)
        }
    };
    let norm = CMatrix::from_inner(norm).ok()?;
    let terms = comb
        .terms
        .into_iter()
        .map(|t| KrausTerm {
            gen: t.gen,
            coeff: &t.coeff * &norm,
        })
        .collect();
    Some(KrausCombination::new(comb.mode, terms))
}
