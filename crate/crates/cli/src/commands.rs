//! Subcommand bodies. Each returns the JSON printed on stdout and the exit
//! code; nothing here touches the process directly.

use std::fs;
use std::path::Path;

use cstar_core::commutative::lambda_sequence;
use cstar_core::format::to_canonical_string;
use cstar_core::kraus::{apply_combination, validate_combination, COMB_TOL};
use cstar_core::verifier::{verify_polyhedron_with_jobs, Overall, PolyhedronMode};
use cstar_core::{
    decide_membership, hull_distance, verify_certificate, CMatrix, MatrixFamily, MembershipVerdict,
    Mode, SolverConfig,
};
use serde::Serialize;
use serde_json::json;

use crate::corpus::{self, CorpusReport};
use crate::oracle::{diagonal_suite, scalar_suite, SuiteSummary};
use crate::workspace::{load_certificate, load_combination, load_matrix, Workspace};
use crate::{CliError, Output, EXIT_FAILURE, EXIT_INVALID, EXIT_OK, EXIT_UNDECIDED};

fn emit<T: Serialize>(value: &T, code: u8) -> Result<Output, CliError> {
    Ok(Output {
        json: to_canonical_string(value)?,
        code,
    })
}

fn family_and_target(
    ws: &mut Workspace,
    family: &Path,
    target: &Path,
) -> Result<(MatrixFamily, CMatrix), CliError> {
    let name = ws.add_family_file(family)?;
    let fam = ws.matrix_family(&name)?;
    let target = load_matrix(target)?;
    let (rows, cols) = target.shape();
    if rows != cols {
        return Err(CliError::invalid(format!(
            "target is {rows}x{cols}, not square"
        )));
    }
    if rows != fam.dim() {
        return Err(CliError::invalid(format!(
            "dimension mismatch: family is {0}x{0}, target is {rows}x{rows}",
            fam.dim()
        )));
    }
    Ok((fam, target))
}

pub fn eval(family: &Path, combination: &Path) -> Result<Output, CliError> {
    let mut ws = Workspace::default();
    let name = ws.add_family_file(family)?;
    let fam = ws.matrix_family(&name)?;
    let comb = load_combination(combination)?;
    let report = validate_combination(&fam, &comb, COMB_TOL);
    if !report.valid {
        return Err(CliError::invalid(format!(
            "invalid {} combination: unitality residual {:e}, minimum slack eigenvalue {:e}",
            comb.mode.as_str(),
            report.unitality_residual,
            report.min_slack_eig
        )));
    }
    emit(&apply_combination(&fam, &comb)?, EXIT_OK)
}

pub fn member(
    family: &Path,
    target: &Path,
    mode: Mode,
    cfg: SolverConfig,
) -> Result<Output, CliError> {
    let mut ws = Workspace::new(cfg);
    let (fam, target) = family_and_target(&mut ws, family, target)?;
    let verdict = decide_membership(&fam, &target, mode, &ws.config)?;
    let code = if verdict.is_undecided() {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    emit(&verdict, code)
}

pub fn dist(
    family: &Path,
    target: &Path,
    mode: Mode,
    cfg: SolverConfig,
) -> Result<Output, CliError> {
    let mut ws = Workspace::new(cfg);
    let (fam, target) = family_and_target(&mut ws, family, target)?;
    emit(&hull_distance(&fam, &target, mode, &ws.config)?, EXIT_OK)
}

pub fn verify(
    family: &Path,
    mode: PolyhedronMode,
    cfg: SolverConfig,
    jobs: Option<usize>,
) -> Result<Output, CliError> {
    let mut ws = Workspace::new(cfg);
    let name = ws.add_family_file(family)?;
    let fam = ws.matrix_family(&name)?;
    let report = verify_polyhedron_with_jobs(&fam, mode, &ws.config, jobs)?;
    let code = if report.overall == Overall::Inconclusive {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    emit(&report, code)
}

/// Checks a supplied certificate, or searches for one when none is given.
pub fn certify(
    family: &Path,
    target: &Path,
    certificate: Option<&Path>,
    mode: Mode,
    cfg: SolverConfig,
) -> Result<Output, CliError> {
    let mut ws = Workspace::new(cfg);
    let (fam, target) = family_and_target(&mut ws, family, target)?;
    let tol = ws.config.cert_tol;
    if let Some(path) = certificate {
        let cert = load_certificate(path)?;
        let check = verify_certificate(&cert, &fam, &target, tol);
        let code = if check.valid { EXIT_OK } else { EXIT_INVALID };
        return emit(
            &json!({
                "check": check,
                "distance_lower_bound": check.valid.then(|| cert.operator_lower_bound(&target)),
            }),
            code,
        );
    }
    let verdict = decide_membership(&fam, &target, mode, &ws.config)?;
    let (code, payload) = match &verdict {
        MembershipVerdict::NotMember {
            certificate,
            distance_lower_bound,
        } => (
            EXIT_OK,
            json!({
                "verdict": verdict.label(),
                "certificate": certificate,
                "check": verify_certificate(certificate, &fam, &target, tol),
                "distance_lower_bound": distance_lower_bound,
            }),
        ),
        MembershipVerdict::Member { residual, .. } => (
            EXIT_OK,
            json!({"verdict": verdict.label(), "certificate": null, "residual": residual}),
        ),
        MembershipVerdict::Undecided {
            best_residual,
            iterations,
        } => (
            EXIT_UNDECIDED,
            json!({
                "verdict": verdict.label(),
                "certificate": null,
                "best_residual": best_residual,
                "iterations": iterations,
            }),
        ),
    };
    emit(&payload, code)
}

pub fn lambda(count: usize) -> Result<Output, CliError> {
    emit(&lambda_sequence(count), EXIT_OK)
}

/// Runs the corpus. Per-case lines go to `log`; the JSON report is returned.
pub fn examples(
    cfg: SolverConfig,
    export: Option<&Path>,
    log: &mut dyn std::io::Write,
) -> Result<Output, CliError> {
    if let Some(dir) = export {
        fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
        for (name, text) in corpus::input_files()? {
            let path = dir.join(name);
            fs::write(&path, text + "\n")
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        }
    }
    let report: CorpusReport = corpus::run_all(&cfg);
    for c in &report.cases {
        let status = if c.passed { "PASS" } else { "FAIL" };
        // Logging is best effort; the JSON report is authoritative.
        let _ = writeln!(
            log,
            "{status} {:<28} [{}] {} | expected {} | observed {}",
            c.id,
            c.provenance.as_str(),
            c.citation,
            c.expected,
            c.observed
        );
    }
    let _ = writeln!(log, "{} passed, {} failed", report.passed, report.failed);
    let code = if report.failed == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    emit(&report, code)
}

#[derive(Serialize)]
struct OracleReport {
    seed: u64,
    scalar: SuiteSummary,
    diagonal: SuiteSummary,
}

pub fn oracle_compare(instances: usize, cfg: SolverConfig) -> Result<Output, CliError> {
    let seed = cfg.seed;
    let scalar = scalar_suite(seed, instances, &cfg)?.summary;
    let diagonal = diagonal_suite(seed.wrapping_add(1), instances, &cfg)?.summary;
    let code = if scalar.contradictions + diagonal.contradictions == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    emit(
        &OracleReport {
            seed,
            scalar,
            diagonal,
        },
        code,
    )
}
