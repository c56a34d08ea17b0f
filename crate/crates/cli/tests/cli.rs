use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cstar_core::format::{from_json_str, to_canonical_string};
use cstar_core::verifier::FamilyReport;
use cstar_core::{CMatrix, KrausCombination, MatrixFamily, MembershipVerdict, Mode};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cstar-hull"));
    cmd.env_remove("CSTAR_HULL_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Writes the corpus input files and returns the directory.
fn corpus_dir() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().to_path_buf();
    let out = run(&["examples", "--export", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    (dir, path)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn eval_reproduces_p2() {
    let (_g, d) = corpus_dir();
    let out = run(&[
        "eval",
        "--family",
        arg(&d.join("p1-family.json")),
        "--combination",
        arg(&d.join("swap-combination.json")),
    ]);
    assert_eq!(code(&out), 0);
    let m: CMatrix = from_json_str(&stdout(&out)).unwrap();
    assert_eq!(m, CMatrix::from_real_diagonal(&[0.0, 1.0]));
}

#[test]
fn eval_identity_combination_echoes_generator() {
    let dir = TempDir::new().unwrap();
    let x = CMatrix::from_real_rows(&[&[1.0, -2.5], &[0.25, 4.0]]).unwrap();
    let fam = write(
        dir.path(),
        "f.json",
        &to_canonical_string(&MatrixFamily::new(vec![x.clone()]).unwrap()).unwrap(),
    );
    let comb = KrausCombination::single(Mode::ExactUnital, 0, CMatrix::identity(2));
    let c = write(dir.path(), "c.json", &to_canonical_string(&comb).unwrap());
    let out = run(&["eval", "--family", arg(&fam), "--combination", arg(&c)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim_end(), to_canonical_string(&x).unwrap());
}

#[test]
fn invalid_combination_exits_3_with_diagnostics() {
    let (_g, d) = corpus_dir();
    let half = KrausCombination::single(Mode::ExactUnital, 0, CMatrix::identity(2).scale(0.5));
    let c = write(&d, "half.json", &to_canonical_string(&half).unwrap());
    let out = run(&[
        "eval",
        "--family",
        arg(&d.join("p1-family.json")),
        "--combination",
        arg(&c),
    ]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("unitality residual") && err.contains("slack"),
        "{err}"
    );
}

#[test]
fn member_verdicts_and_exit_codes() {
    let (_g, d) = corpus_dir();
    let out = run(&[
        "member",
        "--family",
        arg(&d.join("p1-family.json")),
        "--target",
        arg(&d.join("p2.json")),
    ]);
    assert_eq!(code(&out), 0);
    let v: MembershipVerdict = from_json_str(&stdout(&out)).unwrap();
    assert!(v.is_member());

    let out = run(&[
        "member",
        "--family",
        arg(&d.join("identity-family.json")),
        "--target",
        arg(&d.join("two-identity.json")),
    ]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["verdict"], "not_member");
    assert!(json["certificate"].is_object());

    let out = run(&[
        "member",
        "--family",
        arg(&d.join("p1-family.json")),
        "--target",
        arg(&d.join("p2.json")),
        "--max-iter",
        "1",
    ]);
    assert_eq!(code(&out), 4);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["verdict"], "undecided");
}

#[test]
fn parse_and_dimension_errors() {
    let (_g, d) = corpus_dir();
    let fam = d.join("p1-family.json");
    let truncated = write(&d, "bad.json", "{\"rows\": 2");
    let out = run(&["member", "--family", arg(&fam), "--target", arg(&truncated)]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());

    let small = write(&d, "one.json", "{\"rows\":1,\"cols\":1,\"data\":[[1,0]]}");
    let out = run(&["member", "--family", arg(&fam), "--target", arg(&small)]);
    assert_eq!(code(&out), 3);

    let short = write(&d, "short.json", "{\"rows\":2,\"cols\":2,\"data\":[[1,0]]}");
    let out = run(&["dist", "--family", arg(&fam), "--target", arg(&short)]);
    assert_eq!(code(&out), 3);

    let out = run(&[
        "member",
        "--family",
        arg(&fam),
        "--target",
        arg(&d.join("missing.json")),
    ]);
    assert_eq!(code(&out), 2);

    let out = run(&["member", "--family", arg(&fam)]);
    assert_eq!(code(&out), 2);

    let out = bin()
        .args([
            "member",
            "--family",
            arg(&fam),
            "--target",
            arg(&d.join("p2.json")),
        ])
        .env("CSTAR_HULL_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn seed_from_environment_is_accepted() {
    let (_g, d) = corpus_dir();
    let (fam, target) = (d.join("p1-family.json"), d.join("p2.json"));
    let args = ["member", "--family", arg(&fam), "--target", arg(&target)];
    let out = bin()
        .args(args)
        .env("CSTAR_HULL_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn dist_brackets_identity_doubling() {
    let (_g, d) = corpus_dir();
    let out = run(&[
        "dist",
        "--family",
        arg(&d.join("identity-family.json")),
        "--target",
        arg(&d.join("two-identity.json")),
    ]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let (lo, hi) = (
        json["lower"].as_f64().unwrap(),
        json["upper"].as_f64().unwrap(),
    );
    assert!(
        lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9 && hi - lo <= 1e-6,
        "{lo} {hi}"
    );
}

#[test]
fn verify_reports_and_jobs_agree() {
    let (_g, d) = corpus_dir();
    let fam = d.join("lambda-family.json");
    let one = run(&[
        "verify",
        "--family",
        arg(&fam),
        "--mode",
        "cstar0",
        "--jobs",
        "1",
    ]);
    let many = run(&[
        "verify",
        "--family",
        arg(&fam),
        "--mode",
        "cstar0",
        "--jobs",
        "3",
    ]);
    assert_eq!(code(&one), 0);
    assert_eq!(stdout(&one), stdout(&many));
    let report: FamilyReport = from_json_str(&stdout(&one)).unwrap();
    assert_eq!(report.entries.len(), 6);
    assert!(stdout(&one).contains("\"overall\":\"is_polyhedron\""));

    let out = run(&[
        "verify",
        "--family",
        arg(&d.join("projections-family.json")),
    ]);
    assert!(stdout(&out).contains("\"overall\":\"is_not\""));
}

#[test]
fn verify_accepts_diagonal_and_spectral_families() {
    let dir = TempDir::new().unwrap();
    let diag = write(
        dir.path(),
        "diag.json",
        "{\"points\":2,\"functions\":[[[1,0],[0,0]],[[0,0],[1,0]]]}",
    );
    // Pointwise the two indicators are far apart, but in M_2 each is a
    // unitary conjugate of the other.
    let out = run(&["verify", "--family", arg(&diag), "--mode", "cstar0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("\"overall\":\"is_not\""));

    let spec = write(
        dir.path(),
        "spec.json",
        "{\"eigs\":[[[1,0]],[[1,0]]],\"frames\":[[[[1,0],[0,0]]],[[[0,0],[1,0]]]]}",
    );
    let out = run(&["verify", "--family", arg(&spec)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("\"overall\":\"is_not\""));

    let skew = write(
        dir.path(),
        "skew.json",
        "{\"eigs\":[[[1,0]]],\"frames\":[[[[1,0],[1,0]]]]}",
    );
    let out = run(&["verify", "--family", arg(&skew)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn certify_finds_and_checks_certificates() {
    let (_g, d) = corpus_dir();
    let fam = d.join("identity-family.json");
    let target = d.join("two-identity.json");
    let out = run(&["certify", "--family", arg(&fam), "--target", arg(&target)]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["check"]["valid"], true);
    let cert = write(&d, "cert.json", &json["certificate"].to_string());
    let out = run(&[
        "certify",
        "--family",
        arg(&fam),
        "--target",
        arg(&target),
        "--certificate",
        arg(&cert),
    ]);
    assert_eq!(code(&out), 0);

    // The same certificate cannot separate I from its own hull.
    let id = write(
        &d,
        "id.json",
        &to_canonical_string(&CMatrix::identity(2)).unwrap(),
    );
    let out = run(&[
        "certify",
        "--family",
        arg(&fam),
        "--target",
        arg(&id),
        "--certificate",
        arg(&cert),
    ]);
    assert_eq!(code(&out), 3);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["check"]["valid"], false);
}

#[test]
fn lambda_prints_the_sequence() {
    let out = run(&["lambda", "4"]);
    assert_eq!(code(&out), 0);
    let got: Vec<(f64, f64)> = serde_json::from_str(&stdout(&out)).unwrap();
    let angles = [0.0, 0.25, 0.375, 0.4375].map(|t| t * std::f64::consts::PI);
    assert_eq!(got.len(), 4);
    for ((re, im), a) in got.into_iter().zip(angles) {
        assert!((re - a.cos()).abs() <= 1e-15 && (im - a.sin()).abs() <= 1e-15);
    }
}

#[test]
fn examples_report_every_case() {
    let out = run(&["examples"]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["failed"], 0);
    let cases = json["cases"].as_array().unwrap();
    assert!(cases.len() >= 20);
    assert!(cases
        .iter()
        .all(|c| c["passed"] == true && !c["citation"].as_str().unwrap().is_empty()));
    let log = String::from_utf8(out.stderr).unwrap();
    assert_eq!(
        log.lines().filter(|l| l.starts_with("PASS")).count(),
        cases.len()
    );
}

#[test]
fn oracle_compare_finds_no_contradictions() {
    let out = run(&["oracle-compare", "--instances", "20", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["scalar"]["contradictions"], 0);
    assert_eq!(json["diagonal"]["contradictions"], 0);
    assert_eq!(json["scalar"]["instances"], 20);
}

#[test]
fn outputs_round_trip_byte_identically() {
    let (_g, d) = corpus_dir();
    let outputs = [
        run(&[
            "member",
            "--family",
            arg(&d.join("p1-family.json")),
            "--target",
            arg(&d.join("p2.json")),
        ]),
        run(&[
            "verify",
            "--family",
            arg(&d.join("projections-family.json")),
        ]),
        run(&["lambda", "6"]),
    ];
    for out in outputs {
        let text = stdout(&out);
        let text = text.trim_end();
        let value: Value = serde_json::from_str(text).unwrap();
        assert_eq!(to_canonical_string(&value).unwrap(), text);
    }
    for name in ["p1-family.json", "lambda-family.json"] {
        let text = fs::read_to_string(d.join(name)).unwrap();
        let fam: MatrixFamily = from_json_str(&text).unwrap();
        assert_eq!(to_canonical_string(&fam).unwrap(), text.trim_end());
    }
}
