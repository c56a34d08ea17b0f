//! Family-level polyhedron verification and fixed-rank frame constructions.
//!
//! A family `{a_α}` is a C*-polyhedron when no element lies in the closed
//! C*-convex hull of the others, and a C*₀-polyhedron when no element lies in
//! the C*-absolutely convex hull of the others together with `0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{solve, Goal, MembershipVerdict, SeparationCertificate, SolverConfig};
use crate::kraus::{KrausCombination, MatrixFamily, Mode};
use crate::matrix::{op_norm, CMatrix, HermMatrix, C64};

/// Which hull each element is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolyhedronMode {
    #[serde(rename = "cstar")]
    CStar,
    #[serde(rename = "cstar0")]
    CStarZero,
}

impl PolyhedronMode {
    pub fn hull_mode(self) -> Mode {
        match self {
            PolyhedronMode::CStar => Mode::ExactUnital,
            PolyhedronMode::CStarZero => Mode::SubUnital,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolyhedronMode::CStar => "cstar",
            PolyhedronMode::CStarZero => "cstar0",
        }
    }
}

impl fmt::Display for PolyhedronMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolyhedronMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cstar" => Ok(PolyhedronMode::CStar),
            "cstar0" => Ok(PolyhedronMode::CStarZero),
            other => Err(Error::Precondition(format!(
                "unknown polyhedron mode {other:?} (expected cstar or cstar0)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    IsPolyhedron,
    IsNot,
    Inconclusive,
}

/// Operator-norm distance interval from an element to the hull of the rest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementReport {
    pub index: usize,
    pub verdict: MembershipVerdict,
    pub distance_bounds: Option<DistanceBounds>,
}

impl ElementReport {
    pub fn certificate(&self) -> Option<&SeparationCertificate> {
        match &self.verdict {
            MembershipVerdict::NotMember { certificate, .. } => Some(certificate),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub mode: PolyhedronMode,
    pub overall: Overall,
    pub entries: Vec<ElementReport>,
}

fn overall_of(entries: &[ElementReport]) -> Overall {
    if entries.iter().any(|e| e.verdict.is_member()) {
        Overall::IsNot
    } else if entries.iter().all(|e| e.verdict.is_not_member()) {
        Overall::IsPolyhedron
    } else {
        Overall::Inconclusive
    }
}

/// The exact-unital hull of nothing is empty; anything is separated from it
/// by `Λ = 0, Γ = I`.
fn empty_hull_entry(index: usize, d: usize) -> ElementReport {
    let certificate = SeparationCertificate {
        lambda: CMatrix::zeros(d, d),
        gamma: HermMatrix::identity(d),
        mode: Mode::ExactUnital,
    };
    ElementReport {
        index,
        verdict: MembershipVerdict::NotMember {
            certificate,
            distance_lower_bound: f64::INFINITY,
        },
        distance_bounds: None,
    }
}

fn check_element(
    family: &MatrixFamily,
    index: usize,
    mode: PolyhedronMode,
    config: &SolverConfig,
) -> Result<ElementReport> {
    let rest = family.without(index);
    if rest.is_empty() && mode == PolyhedronMode::CStar {
        return Ok(empty_hull_entry(index, family.dim()));
    }
    let report = solve(
        &rest,
        &family.generators()[index],
        mode.hull_mode(),
        config,
        Goal::Distance,
    )?;
    Ok(ElementReport {
        index,
        distance_bounds: Some(DistanceBounds {
            lower: report.lower,
            upper: report.upper,
        }),
        verdict: report.verdict,
    })
}

/// Tests every element against the hull of the others, in parallel on the
/// global rayon pool.
pub fn verify_polyhedron(
    family: &MatrixFamily,
    mode: PolyhedronMode,
    config: &SolverConfig,
) -> Result<FamilyReport> {
    verify_polyhedron_with_jobs(family, mode, config, None)
}

/// Like [`verify_polyhedron`], with at most `jobs` worker threads when given.
pub fn verify_polyhedron_with_jobs(
    family: &MatrixFamily,
    mode: PolyhedronMode,
    config: &SolverConfig,
    jobs: Option<usize>,
) -> Result<FamilyReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    config.validate()?;
    let run = || -> Result<Vec<ElementReport>> {
        (0..family.len())
            .into_par_iter()
            .map(|i| check_element(family, i, mode, config))
            .collect()
    };
    let entries = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(FamilyReport {
        mode,
        overall: overall_of(&entries),
        entries,
    })
}

/// Scales the family by `1/(max‖aᵢ‖_op + 1)`, returning the scaled family
/// and the factor.
pub fn normalize_family(family: &MatrixFamily) -> Result<(MatrixFamily, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut top: f64 = 0.0;
    for x in family.generators() {
        top = top.max(op_norm(x)?);
    }
    let factor = 1.0 / (top + 1.0);
    let scaled = MatrixFamily::with_dim(
        family.dim(),
        family
            .generators()
            .iter()
            .map(|x| x.scale(factor))
            .collect(),
    )?;
    Ok((scaled, factor))
}

/// Half the smallest certified distance in a polyhedron report.
pub fn margin_from_report(report: &FamilyReport) -> Result<f64> {
    if report.overall != Overall::IsPolyhedron {
        return Err(Error::Precondition(
            "perturbation margin needs a verified polyhedron".into(),
        ));
    }
    let min = report
        .entries
        .iter()
        .map(|e| match &e.verdict {
            MembershipVerdict::NotMember {
                distance_lower_bound,
                ..
            } => *distance_lower_bound,
            _ => 0.0,
        })
        .fold(f64::INFINITY, f64::min);
    if min.is_nan() || min <= 0.0 {
        return Err(Error::Precondition("no positive certified distance".into()));
    }
    Ok(min / 2.0)
}

/// Radius `ε` such that moving any single element by at most `ε` in operator
/// norm keeps the family a polyhedron.
pub fn perturbation_margin(
    family: &MatrixFamily,
    mode: PolyhedronMode,
    config: &SolverConfig,
) -> Result<f64> {
    margin_from_report(&verify_polyhedron(family, mode, config)?)
}

const FRAME_TOL: f64 = 1e-10;

/// Elements `Σⱼ λⱼ fⱼ fⱼ†` given by eigenvalue tuples and orthonormal frames
/// `f₁, …, f_d` in `ℂ^D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralRepr", into = "SpectralRepr")]
pub struct SpectralFamily {
    rank: usize,
    ambient: usize,
    eigs: Vec<Vec<C64>>,
    frames: Vec<Vec<Vec<C64>>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SpectralRepr {
    eigs: Vec<Vec<C64>>,
    frames: Vec<Vec<Vec<C64>>>,
}

impl TryFrom<SpectralRepr> for SpectralFamily {
    type Error = Error;

    fn try_from(r: SpectralRepr) -> Result<Self> {
        SpectralFamily::new(r.eigs, r.frames)
    }
}

impl From<SpectralFamily> for SpectralRepr {
    fn from(f: SpectralFamily) -> Self {
        SpectralRepr {
            eigs: f.eigs,
            frames: f.frames,
        }
    }
}

fn frame_matrix(frame: &[Vec<C64>], ambient: usize) -> DMatrix<C64> {
    DMatrix::from_fn(ambient, frame.len(), |i, j| frame[j][i])
}

fn check_frame(frame: &[Vec<C64>], ambient: usize) -> Result<()> {
    if frame.iter().any(|v| v.len() != ambient) {
        return Err(Error::Precondition("frame vectors differ in length".into()));
    }
    if frame.len() > ambient {
        return Err(Error::Precondition(
            "frame has more vectors than dimensions".into(),
        ));
    }
    let f = frame_matrix(frame, ambient);
    let defect = (f.adjoint() * &f - DMatrix::<C64>::identity(frame.len(), frame.len())).camax();
    if defect.is_nan() || defect > FRAME_TOL {
        return Err(Error::Precondition(format!(
            "frame is not orthonormal (defect {defect:e})"
        )));
    }
    Ok(())
}

impl SpectralFamily {
    pub fn new(eigs: Vec<Vec<C64>>, frames: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        if eigs.len() != frames.len() {
            return Err(Error::DimensionMismatch {
                expected: eigs.len(),
                found: frames.len(),
            });
        }
        let rank = eigs.first().map_or(0, Vec::len);
        let ambient = frames
            .first()
            .and_then(|f| f.first())
            .map_or(rank, Vec::len);
        for (e, f) in eigs.iter().zip(&frames) {
            if e.len() != rank || f.len() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    found: e.len().max(f.len()),
                });
            }
            if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            check_frame(f, ambient)?;
        }
        Ok(Self {
            rank,
            ambient,
            eigs,
            frames,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.eigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigs.is_empty()
    }

    pub fn eigs(&self, index: usize) -> &[C64] {
        &self.eigs[index]
    }

    pub fn frame(&self, index: usize) -> &[Vec<C64>] {
        &self.frames[index]
    }

    /// `Σⱼ λⱼ fⱼ fⱼ†` for element `index`.
    pub fn element(&self, index: usize) -> CMatrix {
        spectral_matrix(&self.eigs[index], &self.frames[index], self.ambient)
    }

    pub fn to_matrix_family(&self) -> Result<MatrixFamily> {
        MatrixFamily::with_dim(
            self.ambient,
            (0..self.len()).map(|i| self.element(i)).collect(),
        )
    }
}

fn spectral_matrix(eigs: &[C64], frame: &[Vec<C64>], ambient: usize) -> CMatrix {
    let f = frame_matrix(frame, ambient);
    let mut scaled = f.clone();
    for (j, &l) in eigs.iter().enumerate() {
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= l);
    }
    CMatrix::from_inner_unchecked(scaled * f.adjoint())
}

/// `T = Σⱼ f_{β,j} f_{α,j}†`, sending each source vector `f_{α,j}` to the
/// matching destination vector `f_{β,j}`.
pub fn frame_intertwiner(source: &[Vec<C64>], dest: &[Vec<C64>]) -> Result<CMatrix> {
    if source.len() != dest.len() {
        return Err(Error::DimensionMismatch {
            expected: source.len(),
            found: dest.len(),
        });
    }
    let ambient = source.first().map_or(0, Vec::len);
    if dest.first().map_or(0, Vec::len) != ambient {
        return Err(Error::Precondition(
            "frames live in different dimensions".into(),
        ));
    }
    check_frame(source, ambient)?;
    check_frame(dest, ambient)?;
    let fs = frame_matrix(source, ambient);
    let fd = frame_matrix(dest, ambient);
    CMatrix::from_inner(fd * fs.adjoint())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseBound {
    pub t: CMatrix,
    /// `d · maxᵢ |λ_{α,i} − λ_{β,i}|`.
    pub bound: f64,
    /// `‖a_α − T† a_β T‖_op`.
    pub actual: f64,
}

fn max_eig_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Compresses `a_β` onto the frame of `a_α` and compares.
pub fn collapse_bound(family: &SpectralFamily, alpha: usize, beta: usize) -> Result<CollapseBound> {
    for i in [alpha, beta] {
        if i >= family.len() {
            return Err(Error::InvalidIndex {
                index: i,
                len: family.len(),
            });
        }
    }
    let t = frame_intertwiner(family.frame(alpha), family.frame(beta))?;
    let compressed = &(&t.adjoint() * &family.element(beta)) * &t;
    let actual = op_norm(&(&family.element(alpha) - &compressed))?;
    let bound = family.rank() as f64 * max_eig_gap(family.eigs(alpha), family.eigs(beta));
    Ok(CollapseBound { t, bound, actual })
}

pub const DEFAULT_COLLAPSE_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseWitness {
    pub alpha: usize,
    pub beta: usize,
    /// Single-term sub-unital combination with coefficient `T`, indexed into
    /// the family with `alpha` removed.
    pub combination: KrausCombination,
    pub residual: f64,
}

/// Finds the pair with the closest eigenvalue tuples; when `d` times their
/// gap is below `threshold`, returns `T† a_β T` as a near-membership witness
/// for `a_α` against the sub-unital hull of the others.
pub fn collapse_witness(
    family: &SpectralFamily,
    threshold: f64,
) -> Result<Option<CollapseWitness>> {
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..family.len() {
        for b in 0..family.len() {
            if a == b {
                continue;
            }
            let gap = max_eig_gap(family.eigs(a), family.eigs(b));
            if best.is_none_or(|(g, _, _)| gap < g) {
                best = Some((gap, a, b));
            }
        }
    }
    let Some((gap, alpha, beta)) = best else {
        return Ok(None);
    };
    if family.rank() as f64 * gap >= threshold {
        return Ok(None);
    }
    let cb = collapse_bound(family, alpha, beta)?;
    let gen = if beta > alpha { beta - 1 } else { beta };
    Ok(Some(CollapseWitness {
        alpha,
        beta,
        combination: KrausCombination::single(Mode::SubUnital, gen, cb.t),
        residual: cb.actual,
    }))
}
