//! C*-convex and C*-absolutely convex combinations `Σ Aᵢ† x_{σ(i)} Aᵢ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eig_herm, sqrt_psd, CMatrix, HermMatrix};

/// Default tolerance for combination validity.
pub const COMB_TOL: f64 = 1e-8;

/// Unitality constraint on the coefficients of a combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// `Σ Aᵢ†Aᵢ = I`: C*-convex combinations.
    #[serde(rename = "exact")]
    ExactUnital,
    /// `Σ Aᵢ†Aᵢ ⪯ I`: C*-absolutely convex combinations.
    #[serde(rename = "sub")]
    SubUnital,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ExactUnital => "exact",
            Mode::SubUnital => "sub",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::ExactUnital),
            "sub" => Ok(Mode::SubUnital),
            other => Err(Error::Precondition(format!("unknown mode {other:?}"))),
        }
    }
}

/// A finite indexed family of `d×d` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct MatrixFamily {
    dim: usize,
    generators: Vec<CMatrix>,
    labels: Option<Vec<String>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct FamilyRepr {
    dim: usize,
    generators: Vec<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<FamilyRepr> for MatrixFamily {
    type Error = Error;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        let mut fam = MatrixFamily::with_dim(r.dim, r.generators)?;
        if let Some(labels) = r.labels {
            fam = fam.with_labels(labels)?;
        }
        Ok(fam)
    }
}

impl From<MatrixFamily> for FamilyRepr {
    fn from(f: MatrixFamily) -> Self {
        FamilyRepr {
            dim: f.dim,
            generators: f.generators,
            labels: f.labels,
        }
    }
}

impl MatrixFamily {
    /// A nonempty family; the dimension is taken from the first generator.
    pub fn new(generators: Vec<CMatrix>) -> Result<Self> {
        let first = generators.first().ok_or(Error::EmptyFamily)?;
        let dim = first.require_square()?;
        Self::with_dim(dim, generators)
    }

    /// A family with an explicit dimension, possibly empty.
    pub fn with_dim(dim: usize, generators: Vec<CMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        for g in &generators {
            let n = g.require_square()?;
            if n != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: n,
                });
            }
        }
        Ok(Self {
            dim,
            generators,
            labels: None,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            generators: Vec::new(),
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.generators.len() {
            return Err(Error::Precondition(format!(
                "{} labels for {} generators",
                labels.len(),
                self.generators.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn get(&self, index: usize) -> Result<&CMatrix> {
        self.generators.get(index).ok_or(Error::InvalidIndex {
            index,
            len: self.len(),
        })
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(index))
            .map(String::as_str)
    }

    /// The family with generator `index` removed (labels dropped).
    pub fn without(&self, index: usize) -> MatrixFamily {
        let generators = self
            .generators
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, g)| g.clone())
            .collect();
        MatrixFamily {
            dim: self.dim,
            generators,
            labels: None,
        }
    }

    /// The family with generator `index` replaced.
    pub fn replaced(&self, index: usize, m: CMatrix) -> Result<MatrixFamily> {
        self.get(index)?;
        let mut out = self.clone();
        out.generators[index] = m;
        Self::with_dim(out.dim, out.generators).map(|f| MatrixFamily {
            labels: self.labels.clone(),
            ..f
        })
    }

    /// Index of an exactly-zero generator, appending one if absent.
    pub fn with_zero(&self) -> (MatrixFamily, usize) {
        if let Some(i) = self
            .generators
            .iter()
            .position(|g| g.inner().iter().all(|z| z.re == 0.0 && z.im == 0.0))
        {
            return (self.clone(), i);
        }
        let mut out = self.clone();
        out.generators.push(CMatrix::zeros(self.dim, self.dim));
        if let Some(labels) = out.labels.as_mut() {
            labels.push("0".into());
        }
        (out, self.len())
    }
}

/// One term `(generator index, coefficient)` of a combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausTerm {
    pub gen: usize,
    pub coeff: CMatrix,
}

/// An explicit combination `Σ Aᵢ† x_{gen(i)} Aᵢ`. Repeated generators are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausCombination {
    pub mode: Mode,
    pub terms: Vec<KrausTerm>,
}

impl KrausCombination {
    pub fn new(mode: Mode, terms: Vec<KrausTerm>) -> Self {
        Self { mode, terms }
    }

    pub fn single(mode: Mode, gen: usize, coeff: CMatrix) -> Self {
        Self::new(mode, vec![KrausTerm { gen, coeff }])
    }

    /// `Σ Aᵢ†Aᵢ` over the terms, as a `d×d` matrix.
    pub fn gram(&self, dim: usize) -> CMatrix {
        let mut s = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            if t.coeff.shape() == (dim, dim) {
                s = &s + &(&t.coeff.adjoint() * &t.coeff);
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationReport {
    pub valid: bool,
    /// `‖Σ Aᵢ†Aᵢ − I‖_F`.
    pub unitality_residual: f64,
    /// `λ_min(I − Σ Aᵢ†Aᵢ)`.
    pub min_slack_eig: f64,
}

/// Checks a combination against a family in its own mode.
pub fn validate_combination(
    family: &MatrixFamily,
    comb: &KrausCombination,
    tol: f64,
) -> CombinationReport {
    let d = family.dim();
    let structural = comb
        .terms
        .iter()
        .all(|t| t.gen < family.len() && t.coeff.shape() == (d, d));
    let mut report = unitality_report(comb, d, tol);
    report.valid &= structural;
    report
}

fn unitality_report(comb: &KrausCombination, d: usize, tol: f64) -> CombinationReport {
    let s = comb.gram(d);
    let id = CMatrix::identity(d);
    let unitality_residual = s.frob_dist(&id);
    let slack = HermMatrix::symmetrized(&id - &s);
    let min_slack_eig = eig_herm(&slack).map(|e| e.min()).unwrap_or(f64::NAN);
    let valid = match comb.mode {
        Mode::ExactUnital => unitality_residual <= tol,
        Mode::SubUnital => min_slack_eig >= -tol,
    };
    CombinationReport {
        valid,
        unitality_residual,
        min_slack_eig,
    }
}

/// `Σ Aᵢ† x_{gen(i)} Aᵢ` in term order, without any validity check.
pub fn evaluate_terms(family: &MatrixFamily, terms: &[KrausTerm]) -> Result<CMatrix> {
    let d = family.dim();
    let mut acc = CMatrix::zeros(d, d);
    for t in terms {
        let x = family.get(t.gen)?;
        if t.coeff.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                left: t.coeff.shape(),
                right: (d, d),
            });
        }
        let term = &(&t.coeff.adjoint() * x) * &t.coeff;
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Evaluates a combination after validating it at [`COMB_TOL`].
pub fn apply_combination(family: &MatrixFamily, comb: &KrausCombination) -> Result<CMatrix> {
    for t in &comb.terms {
        family.get(t.gen)?;
    }
    let report = validate_combination(family, comb, COMB_TOL);
    if !report.valid {
        return Err(Error::InvalidCombination {
            residual: report.unitality_residual,
            min_slack_eig: report.min_slack_eig,
        });
    }
    evaluate_terms(family, &comb.terms)
}

/// Completes a sub-unital combination to an exact one by adjoining the zero
/// generator with coefficient `√(I − Σ Aᵢ†Aᵢ)`.
///
/// Returns the (possibly extended) family and the exact combination over it.
pub fn augment_to_exact(
    family: &MatrixFamily,
    comb: &KrausCombination,
) -> Result<(MatrixFamily, KrausCombination)> {
    let d = family.dim();
    for t in &comb.terms {
        family.get(t.gen)?;
    }
    let sub = KrausCombination::new(Mode::SubUnital, comb.terms.clone());
    let report = validate_combination(family, &sub, COMB_TOL);
    if !report.valid {
        return Err(Error::InvalidCombination {
            residual: report.unitality_residual,
            min_slack_eig: report.min_slack_eig,
        });
    }
    let slack = HermMatrix::symmetrized(&CMatrix::identity(d) - &comb.gram(d));
    let root = sqrt_psd(&slack)?;
    let (extended, zero) = family.with_zero();
    let mut terms = comb.terms.clone();
    terms.push(KrausTerm {
        gen: zero,
        coeff: root.into_matrix(),
    });
    Ok((extended, KrausCombination::new(Mode::ExactUnital, terms)))
}

/// Flattens a combination of combinations.
///
/// `outer` ranges over the values produced by `inners` (its generator indices
/// index into `inners`); the result has coefficients `B·A` for every outer
/// term `(j, A)` and inner term `(g, B)` of `inners[j]`.
pub fn compose_combinations(
    outer: &KrausCombination,
    inners: &[KrausCombination],
) -> Result<KrausCombination> {
    let d = outer
        .terms
        .first()
        .map(|t| t.coeff.rows())
        .or_else(|| {
            inners
                .iter()
                .flat_map(|c| c.terms.first())
                .map(|t| t.coeff.rows())
                .next()
        })
        .ok_or_else(|| Error::Precondition("cannot compose empty combinations".into()))?;
    for comb in std::iter::once(outer).chain(inners) {
        if comb.mode != Mode::ExactUnital {
            return Err(Error::Precondition(
                "composition requires exact-unital combinations".into(),
            ));
        }
        let report = unitality_report(comb, d, COMB_TOL);
        if !report.valid {
            return Err(Error::InvalidCombination {
                residual: report.unitality_residual,
                min_slack_eig: report.min_slack_eig,
            });
        }
    }
    let mut terms = Vec::new();
    for t in &outer.terms {
        let inner = inners.get(t.gen).ok_or(Error::InvalidIndex {
            index: t.gen,
            len: inners.len(),
        })?;
        for s in &inner.terms {
            terms.push(KrausTerm {
                gen: s.gen,
                coeff: &s.coeff * &t.coeff,
            });
        }
    }
    Ok(KrausCombination::new(Mode::ExactUnital, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;

    fn p1() -> CMatrix {
        CMatrix::from_real_diagonal(&[1.0, 0.0])
    }

    fn p2() -> CMatrix {
        CMatrix::from_real_diagonal(&[0.0, 1.0])
    }

    fn u_rot() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap()
    }

    fn scalar(z: C64) -> CMatrix {
        CMatrix::from_row_major(1, 1, vec![z]).unwrap()
    }

    #[test]
    fn conjugating_p1_gives_p2() {
        let fam = MatrixFamily::new(vec![p1()]).unwrap();
        let comb = KrausCombination::single(Mode::ExactUnital, 0, u_rot());
        let out = apply_combination(&fam, &comb).unwrap();
        assert!(out.max_abs_diff(&p2()) <= 1e-12);
    }

    #[test]
    fn identity_combination_echoes() {
        let x = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let fam = MatrixFamily::new(vec![x.clone()]).unwrap();
        let comb = KrausCombination::single(Mode::ExactUnital, 0, CMatrix::identity(2));
        assert_eq!(apply_combination(&fam, &comb).unwrap(), x);
    }

    #[test]
    fn rotation_of_two_one_one_one() {
        // Oracle: multiply out U†AU by hand-coded products.
        let a = CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let s = 0.5f64.sqrt();
        let u = CMatrix::from_real_rows(&[&[s, -s], &[s, s]]).unwrap();
        let fam = MatrixFamily::new(vec![a]).unwrap();
        let out =
            apply_combination(&fam, &KrausCombination::single(Mode::ExactUnital, 0, u)).unwrap();
        let expected = CMatrix::from_real_rows(&[&[2.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!(out.max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn validation_examples() {
        let fam = MatrixFamily::new(vec![p1()]).unwrap();
        let r = validate_combination(
            &fam,
            &KrausCombination::single(Mode::ExactUnital, 0, u_rot()),
            COMB_TOL,
        );
        assert!(r.valid && r.unitality_residual < 1e-15);

        let fam = MatrixFamily::new(vec![scalar(C64::new(1.0, 0.0)), scalar(C64::new(0.0, 1.0))])
            .unwrap();
        let a = scalar(C64::new(1.0 / 3f64.sqrt(), 0.0));
        let terms = vec![
            KrausTerm {
                gen: 0,
                coeff: a.clone(),
            },
            KrausTerm { gen: 1, coeff: a },
        ];
        let exact = KrausCombination::new(Mode::ExactUnital, terms.clone());
        let sub = KrausCombination::new(Mode::SubUnital, terms);
        assert!(!validate_combination(&fam, &exact, COMB_TOL).valid);
        let r = validate_combination(&fam, &sub, COMB_TOL);
        assert!(r.valid);
        assert!((r.min_slack_eig - 1.0 / 3.0).abs() < 1e-15);

        let empty_exact = KrausCombination::new(Mode::ExactUnital, vec![]);
        let empty_sub = KrausCombination::new(Mode::SubUnital, vec![]);
        assert!(!validate_combination(&fam, &empty_exact, COMB_TOL).valid);
        assert!(validate_combination(&fam, &empty_sub, COMB_TOL).valid);
    }

    #[test]
    fn invalid_index_rejected() {
        let fam = MatrixFamily::new(vec![p1()]).unwrap();
        let comb = KrausCombination::single(Mode::ExactUnital, 3, CMatrix::identity(2));
        assert!(matches!(
            apply_combination(&fam, &comb),
            Err(Error::InvalidIndex { index: 3, len: 1 })
        ));
        let bad = KrausCombination::single(Mode::ExactUnital, 0, CMatrix::identity(2).scale(2.0));
        assert!(matches!(
            apply_combination(&fam, &bad),
            Err(Error::InvalidCombination { .. })
        ));
    }

    #[test]
    fn augment_examples() {
        let fam = MatrixFamily::new(vec![p1()]).unwrap();
        let comb = KrausCombination::single(Mode::SubUnital, 0, u_rot());
        let (ext, exact) = augment_to_exact(&fam, &comb).unwrap();
        assert_eq!(ext.len(), 2);
        assert!(exact.terms[1].coeff.frob_norm() < 1e-12);

        let fam = MatrixFamily::new(vec![scalar(C64::new(1.0, 0.0))]).unwrap();
        let comb =
            KrausCombination::single(Mode::SubUnital, 0, scalar(C64::new(1.0 / 3f64.sqrt(), 0.0)));
        let (ext, exact) = augment_to_exact(&fam, &comb).unwrap();
        let c = exact.terms[1].coeff.get(0, 0);
        assert!((c.re - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!(validate_combination(&ext, &exact, 1e-7).valid);
        let before = apply_combination(&fam, &comb).unwrap();
        let after = apply_combination(&ext, &exact).unwrap();
        assert!(before.frob_dist(&after) < 1e-12);

        let fam = MatrixFamily::new(vec![p1()]).unwrap();
        let comb = KrausCombination::single(Mode::SubUnital, 0, CMatrix::identity(2).scale(0.5));
        let (_, exact) = augment_to_exact(&fam, &comb).unwrap();
        let expected = CMatrix::identity(2).scale(3f64.sqrt() / 2.0);
        assert!(exact.terms[1].coeff.frob_dist(&expected) < 1e-14);
    }

    #[test]
    fn augment_reuses_existing_zero() {
        let fam = MatrixFamily::new(vec![p1(), CMatrix::zeros(2, 2)]).unwrap();
        let comb = KrausCombination::single(Mode::SubUnital, 0, CMatrix::identity(2).scale(0.5));
        let (ext, exact) = augment_to_exact(&fam, &comb).unwrap();
        assert_eq!(ext.len(), 2);
        assert_eq!(exact.terms[1].gen, 1);
    }

    #[test]
    fn compose_examples() {
        let id = KrausCombination::single(Mode::ExactUnital, 0, CMatrix::identity(2));
        let c = compose_combinations(&id, std::slice::from_ref(&id)).unwrap();
        assert_eq!(c, id);

        let u = u_rot();
        let s = 0.5f64.sqrt();
        let v = CMatrix::from_real_rows(&[&[s, -s], &[s, s]]).unwrap();
        let outer = KrausCombination::single(Mode::ExactUnital, 0, u.clone());
        let inner = KrausCombination::single(Mode::ExactUnital, 0, v.clone());
        let c = compose_combinations(&outer, &[inner]).unwrap();
        assert_eq!(c.terms.len(), 1);
        assert!(c.terms[0].coeff.frob_dist(&(&v * &u)) < 1e-15);
    }

    #[test]
    fn family_serde_validates_dimension() {
        let json = r#"{"dim":2,"generators":[{"rows":1,"cols":1,"data":[[1,0]]}]}"#;
        assert!(serde_json::from_str::<MatrixFamily>(json).is_err());
    }
}
