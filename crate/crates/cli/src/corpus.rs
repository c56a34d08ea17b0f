//! Worked examples with known answers, replayed by `cstar-hull examples`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use cstar_core::commutative::{
    lambda_sequence, plane_hull_distance, pointwise_hull_membership, projection_cover_decompose,
    scalar_hull_membership, ubabs_gap, verify_polyhedron_pointwise, DiagonalFamily, UbabsSystem,
};
use cstar_core::format::to_canonical_string;
use cstar_core::kraus::{apply_combination, augment_to_exact, validate_combination, COMB_TOL};
use cstar_core::matrix::{adjoint, psd_check, HermMatrix};
use cstar_core::verifier::{
    collapse_bound, collapse_witness, verify_polyhedron, Overall, PolyhedronMode, SpectralFamily,
};
use cstar_core::{
    decide_membership, verify_certificate, CMatrix, KrausCombination, KrausTerm, MatrixFamily,
    MembershipVerdict, Mode, SolverConfig, C64,
};
use serde::Serialize;

use crate::CliError;

const EXACT_TOL: f64 = 1e-12;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A value worked out in the source literature.
    Published,
    /// Immediate from the definitions.
    Trivial,
    /// Recomputed independently for this corpus.
    Derived,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Trivial => "trivial",
            Provenance::Derived => "derived",
        }
    }
}

struct Check {
    passed: bool,
    observed: String,
}

fn check(passed: bool, observed: impl Into<String>) -> Result<Check, CliError> {
    Ok(Check {
        passed,
        observed: observed.into(),
    })
}

pub struct CorpusCase {
    pub id: &'static str,
    pub provenance: Provenance,
    pub citation: &'static str,
    pub expected: &'static str,
    run: fn(&SolverConfig) -> Result<Check, CliError>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub id: String,
    pub provenance: Provenance,
    pub citation: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub cases: Vec<CaseResult>,
    pub passed: usize,
    pub failed: usize,
}

pub fn p1() -> CMatrix {
    CMatrix::from_real_diagonal(&[1.0, 0.0])
}

pub fn p2() -> CMatrix {
    CMatrix::from_real_diagonal(&[0.0, 1.0])
}

/// `[[0, 1], [−1, 0]]`, which conjugates `P₁` onto `P₂`.
pub fn swap_unitary() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).expect("2x2")
}

/// `(1/√2)[[1, −1], [1, 1]]`.
pub fn rotation_unitary() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    CMatrix::from_real_rows(&[&[s, -s], &[s, s]]).expect("2x2")
}

pub fn lambda_family(dim: usize, count: usize) -> MatrixFamily {
    let gens = lambda_sequence(count)
        .into_iter()
        .map(|l| CMatrix::scalar(dim, l))
        .collect();
    MatrixFamily::new(gens).expect("nonempty")
}

fn scalars(values: &[C64]) -> MatrixFamily {
    MatrixFamily::new(values.iter().map(|&v| CMatrix::scalar(1, v)).collect()).expect("nonempty")
}

fn one_i() -> [C64; 2] {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0)]
}

fn one_plus_i_over_three() -> C64 {
    C64::new(1.0, 1.0) / 3.0
}

fn adjoint_of_swap(_: &SolverConfig) -> Result<Check, CliError> {
    let expected = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])?;
    let diff = adjoint(&swap_unitary()).max_abs_diff(&expected);
    check(diff == 0.0, format!("max entry error {diff:e}"))
}

fn p1_is_psd(_: &SolverConfig) -> Result<Check, CliError> {
    let c = psd_check(&HermMatrix::new(p1())?, 0.0)?;
    check(
        c.is_psd && c.min_eigenvalue == 0.0,
        format!("psd {}, min eigenvalue {}", c.is_psd, c.min_eigenvalue),
    )
}

fn p1_conjugation(_: &SolverConfig) -> Result<Check, CliError> {
    let fam = MatrixFamily::new(vec![p1()])?;
    let comb = KrausCombination::single(Mode::ExactUnital, 0, swap_unitary());
    let diff = apply_combination(&fam, &comb)?.max_abs_diff(&p2());
    check(diff <= EXACT_TOL, format!("max entry error {diff:e}"))
}

fn rotation_of_a(_: &SolverConfig) -> Result<Check, CliError> {
    let a = CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]])?;
    let fam = MatrixFamily::new(vec![a])?;
    let comb = KrausCombination::single(Mode::ExactUnital, 0, rotation_unitary());
    let expected = CMatrix::from_real_rows(&[&[2.5, -0.5], &[-0.5, 0.5]])?;
    let diff = apply_combination(&fam, &comb)?.max_abs_diff(&expected);
    check(diff <= EXACT_TOL, format!("max entry error {diff:e}"))
}

fn two_thirds_validity(_: &SolverConfig) -> Result<Check, CliError> {
    let fam = scalars(&one_i());
    let a = CMatrix::scalar(1, C64::new(1.0 / 3f64.sqrt(), 0.0));
    let terms = vec![
        KrausTerm {
            gen: 0,
            coeff: a.clone(),
        },
        KrausTerm { gen: 1, coeff: a },
    ];
    let exact = validate_combination(
        &fam,
        &KrausCombination::new(Mode::ExactUnital, terms.clone()),
        COMB_TOL,
    );
    let sub = validate_combination(
        &fam,
        &KrausCombination::new(Mode::SubUnital, terms),
        COMB_TOL,
    );
    check(
        !exact.valid && sub.valid,
        format!(
            "exact valid {}, sub valid {}, slack {:.17}",
            exact.valid, sub.valid, sub.min_slack_eig
        ),
    )
}

fn augment_one_third(_: &SolverConfig) -> Result<Check, CliError> {
    let fam = scalars(&[C64::new(1.0, 0.0)]);
    let a = CMatrix::scalar(1, C64::new(1.0 / 3f64.sqrt(), 0.0));
    let comb = KrausCombination::single(Mode::SubUnital, 0, a);
    let (ext, exact) = augment_to_exact(&fam, &comb)?;
    let appended = exact
        .terms
        .last()
        .map(|t| t.coeff.get(0, 0))
        .unwrap_or_default();
    let err = (appended - C64::new((2.0f64 / 3.0).sqrt(), 0.0)).norm();
    let same = apply_combination(&ext, &exact)?.max_abs_diff(&apply_combination(&fam, &comb)?);
    check(
        err <= EXACT_TOL && same <= 1e-9,
        format!("appended {appended}, value change {same:e}"),
    )
}

fn p1_to_p2(cfg: &SolverConfig) -> Result<Check, CliError> {
    let fam = MatrixFamily::new(vec![p1()])?;
    let v = decide_membership(&fam, &p2(), Mode::ExactUnital, cfg)?;
    check(v.is_member(), v.label())
}

fn identity_doubling(cfg: &SolverConfig) -> Result<Check, CliError> {
    let fam = MatrixFamily::new(vec![CMatrix::identity(2)])?;
    let target = CMatrix::identity(2).scale(2.0);
    let v = decide_membership(&fam, &target, Mode::ExactUnital, cfg)?;
    match &v {
        MembershipVerdict::NotMember {
            certificate,
            distance_lower_bound,
        } => {
            let ok = verify_certificate(certificate, &fam, &target, cfg.cert_tol).valid;
            check(
                ok && *distance_lower_bound <= 1.0 + 1e-9 && *distance_lower_bound > 0.0,
                format!("not_member, certificate valid {ok}, distance >= {distance_lower_bound}"),
            )
        }
        other => check(false, other.label()),
    }
}

fn scalar_exact_outside(cfg: &SolverConfig) -> Result<Check, CliError> {
    let t = one_plus_i_over_three();
    let oracle = scalar_hull_membership(&one_i(), t, Mode::ExactUnital);
    let v = decide_membership(
        &scalars(&one_i()),
        &CMatrix::scalar(1, t),
        Mode::ExactUnital,
        cfg,
    )?;
    check(
        !oracle && v.is_not_member(),
        format!("oracle member {oracle}, solver {}", v.label()),
    )
}

fn scalar_sub_inside(cfg: &SolverConfig) -> Result<Check, CliError> {
    let t = one_plus_i_over_three();
    let oracle = scalar_hull_membership(&one_i(), t, Mode::SubUnital);
    let v = decide_membership(
        &scalars(&one_i()),
        &CMatrix::scalar(1, t),
        Mode::SubUnital,
        cfg,
    )?;
    // The plane weights are unique: t = w₀·1 + w₁·i forces w₀ = w₁ = 1/3.
    let weights = pointwise_hull_membership(
        &DiagonalFamily::new(1, one_i().iter().map(|&v| vec![v]).collect())?,
        &[t],
        Mode::SubUnital,
    )?
    .weights
    .into_iter()
    .next()
    .flatten()
    .unwrap_or_default();
    let thirds = weights.len() == 2 && weights.iter().all(|w| (w - 1.0 / 3.0).abs() <= 1e-9);
    check(
        oracle && v.is_member() && thirds,
        format!(
            "oracle member {oracle}, solver {}, weights {weights:?}",
            v.label()
        ),
    )
}

fn diagonal_p2_rejected(_: &SolverConfig) -> Result<Check, CliError> {
    let fam = DiagonalFamily::from_real(2, &[vec![1.0, 0.0]])?;
    let v = pointwise_hull_membership(
        &fam,
        &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        Mode::SubUnital,
    )?;
    check(
        !v.member,
        format!("member {}, distance {}", v.member, v.distance),
    )
}

fn lambda_first_term(_: &SolverConfig) -> Result<Check, CliError> {
    let l0 = lambda_sequence(1)[0];
    check(l0 == C64::new(1.0, 0.0), format!("{l0}"))
}

fn lambda_first_four(_: &SolverConfig) -> Result<Check, CliError> {
    let got = lambda_sequence(4);
    let angles = [0.0, FRAC_PI_4, 3.0 * FRAC_PI_2 / 4.0, 7.0 * FRAC_PI_2 / 8.0];
    let err = got
        .iter()
        .zip(angles)
        .map(|(z, a)| (z - C64::from_polar(1.0, a)).norm())
        .fold(0.0, f64::max);
    check(err <= EXACT_TOL, format!("max error {err:e}"))
}

fn projections_not_polyhedron(cfg: &SolverConfig) -> Result<Check, CliError> {
    let fam = MatrixFamily::new(vec![p1(), p2()])?;
    let report = verify_polyhedron(&fam, PolyhedronMode::CStar, cfg)?;
    check(
        report.overall == Overall::IsNot,
        format!("{:?}", report.overall),
    )
}

fn lambda_zero_polyhedron(cfg: &SolverConfig) -> Result<Check, CliError> {
    let report = verify_polyhedron(&lambda_family(2, 6), PolyhedronMode::CStarZero, cfg)?;
    check(
        report.overall == Overall::IsPolyhedron,
        format!("{:?}", report.overall),
    )
}

fn lambda_distances(cfg: &SolverConfig) -> Result<Check, CliError> {
    let lambdas = lambda_sequence(6);
    let report = verify_polyhedron(&lambda_family(1, 6), PolyhedronMode::CStarZero, cfg)?;
    let mut worst = 0.0f64;
    for e in &report.entries {
        let others: Vec<C64> = (0..6)
            .filter(|&k| k != e.index)
            .map(|k| lambdas[k])
            .collect();
        let truth = plane_hull_distance(lambdas[e.index], &others, true);
        let Some(b) = &e.distance_bounds else {
            return check(false, format!("element {} has no bounds", e.index));
        };
        worst = worst.max(b.lower - truth).max(truth - b.upper);
    }
    check(worst <= 1e-5, format!("worst bracket violation {worst:e}"))
}

fn ubabs_indicators(_: &SolverConfig) -> Result<Check, CliError> {
    let sys = UbabsSystem::indicators(5);
    let gap = ubabs_gap(&sys)?;
    let report = verify_polyhedron_pointwise(&sys.family, Mode::SubUnital)?;
    check(
        gap == 1.0 && report.is_polyhedron,
        format!("gap {gap}, zero polyhedron {}", report.is_polyhedron),
    )
}

fn greedy_cover(_: &SolverConfig) -> Result<Check, CliError> {
    let dec = projection_cover_decompose(3, &[0, 1, 2], &[vec![0, 1], vec![1, 2]])?;
    let value = apply_combination(&dec.family, &dec.combination)?;
    let diff = value.max_abs_diff(&CMatrix::identity(3));
    check(
        dec.parts == vec![vec![0, 1], vec![2]] && diff == 0.0,
        format!("parts {:?}, max entry error {diff:e}", dec.parts),
    )
}

fn singleton_identity(cfg: &SolverConfig) -> Result<Check, CliError> {
    let fam = MatrixFamily::new(vec![CMatrix::identity(2)])?;
    let report = verify_polyhedron(&fam, PolyhedronMode::CStarZero, cfg)?;
    check(
        report.overall == Overall::IsPolyhedron,
        format!("{:?}", report.overall),
    )
}

fn standard_frame(rank: usize, ambient: usize, offset: usize) -> Vec<Vec<C64>> {
    (0..rank)
        .map(|j| {
            (0..ambient)
                .map(|i| {
                    C64::new(
                        if i == (j + offset) % ambient {
                            1.0
                        } else {
                            0.0
                        },
                        0.0,
                    )
                })
                .collect()
        })
        .collect()
}

fn collapse_identical(_: &SolverConfig) -> Result<Check, CliError> {
    let tuple = vec![C64::new(1.0, 0.0), C64::new(-0.5, 2.0)];
    let fam = SpectralFamily::new(
        vec![tuple.clone(), tuple],
        vec![standard_frame(2, 3, 0), standard_frame(2, 3, 1)],
    )?;
    match collapse_witness(&fam, 0.5)? {
        Some(w) => check(w.residual <= 1e-10, format!("residual {:e}", w.residual)),
        None => check(false, "no witness"),
    }
}

fn collapse_shifted(_: &SolverConfig) -> Result<Check, CliError> {
    let fam = SpectralFamily::new(
        vec![
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            vec![C64::new(1.1, 0.0), C64::new(2.1, 0.0)],
        ],
        vec![standard_frame(2, 2, 0), standard_frame(2, 2, 1)],
    )?;
    let cb = collapse_bound(&fam, 0, 1)?;
    check(
        (cb.bound - 0.2).abs() <= 1e-12 && (cb.actual - 0.1).abs() <= 1e-12,
        format!("bound {}, actual {}", cb.bound, cb.actual),
    )
}

pub fn cases() -> Vec<CorpusCase> {
    use Provenance::*;
    vec![
        CorpusCase {
            id: "adjoint-of-swap",
            provenance: Published,
            citation: "adjoint of the swap unitary: [[0,1],[-1,0]]* = [[0,-1],[1,0]]",
            expected: "[[0,-1],[1,0]]",
            run: adjoint_of_swap,
        },
        CorpusCase {
            id: "p1-is-psd",
            provenance: Published,
            citation: "rank-one projection P1 = diag(1,0) is positive",
            expected: "psd with minimum eigenvalue 0",
            run: p1_is_psd,
        },
        CorpusCase {
            id: "p1-conjugation",
            provenance: Published,
            citation: "projection orbit: U* P1 U = P2 with U = [[0,1],[-1,0]]",
            expected: "P2 = diag(0,1) within 1e-12",
            run: p1_conjugation,
        },
        CorpusCase {
            id: "rotation-of-a",
            provenance: Derived,
            citation: "rotation U = (1/sqrt 2)[[1,-1],[1,1]] of A = [[2,1],[1,1]]: U* A U",
            expected: "(1/2)[[5,-1],[-1,1]] within 1e-12",
            run: rotation_of_a,
        },
        CorpusCase {
            id: "two-thirds-validity",
            provenance: Published,
            citation: "scalar weights a = b = 1/sqrt 3: |a|^2 + |b|^2 = 2/3 < 1",
            expected: "exact invalid, sub valid",
            run: two_thirds_validity,
        },
        CorpusCase {
            id: "augment-one-third",
            provenance: Published,
            citation: "zero completion: A_(n+1) = sqrt(1 - sum A_i* A_i), x_(n+1) = 0",
            expected: "appended coefficient sqrt(2/3), value unchanged",
            run: augment_one_third,
        },
        CorpusCase {
            id: "p1-to-p2",
            provenance: Published,
            citation: "projection orbit: P2 lies in the C*-convex hull of {P1}",
            expected: "member",
            run: p1_to_p2,
        },
        CorpusCase {
            id: "identity-doubling",
            provenance: Trivial,
            citation: "hull of {I} is {I}; 2I is at operator distance 1",
            expected: "not_member with a valid certificate",
            run: identity_doubling,
        },
        CorpusCase {
            id: "scalar-exact-outside",
            provenance: Published,
            citation: "F = {1, i}: (1+i)/3 is off the segment [1, i]",
            expected: "not_member (oracle and solver)",
            run: scalar_exact_outside,
        },
        CorpusCase {
            id: "scalar-sub-inside",
            provenance: Published,
            citation: "(1/3, 1/3) = (1/sqrt 3)(1,0)(1/sqrt 3) + (1/sqrt 3)(0,1)(1/sqrt 3)",
            expected: "member with weights 1/3, 1/3",
            run: scalar_sub_inside,
        },
        CorpusCase {
            id: "diagonal-p2-rejected",
            provenance: Published,
            citation: "two-point algebra: P2 = (0,1) is not in the absolute hull of {P1 = (1,0)}",
            expected: "pointwise non-member",
            run: diagonal_p2_rejected,
        },
        CorpusCase {
            id: "lambda-first-term",
            provenance: Published,
            citation: "lambda_0 = (1, 0)",
            expected: "1",
            run: lambda_first_term,
        },
        CorpusCase {
            id: "lambda-first-four",
            provenance: Derived,
            citation: "lambda_n = exp(i (1 - 2^-n) pi/2)",
            expected: "[1, e^(i pi/4), e^(i 3pi/8), e^(i 7pi/16)]",
            run: lambda_first_four,
        },
        CorpusCase {
            id: "projections-not-polyhedron",
            provenance: Published,
            citation: "K = {P1, P2} in M_2: each is a unitary conjugate of the other",
            expected: "is_not",
            run: projections_not_polyhedron,
        },
        CorpusCase {
            id: "lambda-zero-polyhedron",
            provenance: Published,
            citation: "{lambda_n I_2 : n < 6} is a C*_0-polyhedron",
            expected: "is_polyhedron",
            run: lambda_zero_polyhedron,
        },
        CorpusCase {
            id: "lambda-distances",
            provenance: Derived,
            citation: "scalar reduction: dist(lambda_m, hull({lambda_n : n != m} + {0}))",
            expected: "plane distance inside every certified interval within 1e-5",
            run: lambda_distances,
        },
        CorpusCase {
            id: "ubabs-indicators",
            provenance: Published,
            citation: "indicators of distinct points form a system of type eta = 0",
            expected: "gap 1, zero polyhedron",
            run: ubabs_indicators,
        },
        CorpusCase {
            id: "greedy-cover",
            provenance: Derived,
            citation: "p = q_1 p_1 q_1 + ... + q_k p_k q_k over covers {0,1}, {1,2} of {0,1,2}",
            expected: "parts {0,1}, {2}; exact indicator",
            run: greedy_cover,
        },
        CorpusCase {
            id: "singleton-identity",
            provenance: Trivial,
            citation: "{I} against the zero hull {0}",
            expected: "is_polyhedron",
            run: singleton_identity,
        },
        CorpusCase {
            id: "collapse-identical",
            provenance: Trivial,
            citation: "equal eigenvalue tuples: T* a_beta T = a_alpha",
            expected: "witness residual <= 1e-10",
            run: collapse_identical,
        },
        CorpusCase {
            id: "collapse-shifted",
            provenance: Derived,
            citation: "||a_alpha - T* a_beta T|| <= d max |lambda_(alpha,i) - lambda_(beta,i)|",
            expected: "bound 0.2, actual 0.1",
            run: collapse_shifted,
        },
    ]
}

/// Runs every case; an error counts as a failure with the message recorded.
pub fn run_all(cfg: &SolverConfig) -> CorpusReport {
    let cases: Vec<CaseResult> = cases()
        .into_iter()
        .map(|c| {
            let (passed, observed) = match (c.run)(cfg) {
                Ok(r) => (r.passed, r.observed),
                Err(e) => (false, format!("error: {e}")),
            };
            CaseResult {
                id: c.id.into(),
                provenance: c.provenance,
                citation: c.citation.into(),
                expected: c.expected.into(),
                observed,
                passed,
            }
        })
        .collect();
    let passed = cases.iter().filter(|c| c.passed).count();
    CorpusReport {
        failed: cases.len() - passed,
        passed,
        cases,
    }
}

/// Input files for the matrix examples, as `(file name, canonical JSON)`.
pub fn input_files() -> Result<Vec<(&'static str, String)>, CliError> {
    let id = CMatrix::identity(2);
    Ok(vec![
        (
            "p1-family.json",
            to_canonical_string(&MatrixFamily::new(vec![p1()])?)?,
        ),
        ("p2.json", to_canonical_string(&p2())?),
        (
            "swap-combination.json",
            to_canonical_string(&KrausCombination::single(
                Mode::ExactUnital,
                0,
                swap_unitary(),
            ))?,
        ),
        (
            "projections-family.json",
            to_canonical_string(&MatrixFamily::new(vec![p1(), p2()])?)?,
        ),
        (
            "identity-family.json",
            to_canonical_string(&MatrixFamily::new(vec![id.clone()])?)?,
        ),
        ("two-identity.json", to_canonical_string(&id.scale(2.0))?),
        (
            "lambda-family.json",
            to_canonical_string(&lambda_family(2, 6))?,
        ),
    ])
}
