//! Input files and solver settings.
//!
//! Every file is read in two passes: first against a structural schema, where
//! a failure is a parse error, then into the validated core type, where a
//! failure is a validation error. This keeps the exit codes honest: a
//! non-square matrix is well-formed JSON describing an invalid object.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cstar_core::commutative::DiagonalFamily;
use cstar_core::verifier::SpectralFamily;
use cstar_core::{
    CMatrix, KrausCombination, MatrixFamily, Mode, SeparationCertificate, SolverConfig,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

type Pair = (f64, f64);

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Pair>,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawMatrixFamily {
    dim: usize,
    generators: Vec<RawMatrix>,
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawDiagonalFamily {
    points: usize,
    functions: Vec<Vec<Pair>>,
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawSpectralFamily {
    eigs: Vec<Vec<Pair>>,
    frames: Vec<Vec<Vec<Pair>>>,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawTerm {
    gen: usize,
    coeff: RawMatrix,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawCombination {
    mode: Mode,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct RawCertificate {
    lambda: RawMatrix,
    gamma: RawMatrix,
    mode: Mode,
}

fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn two_pass<R: DeserializeOwned, T: DeserializeOwned>(
    path: &Path,
    value: Value,
) -> Result<T, CliError> {
    R::deserialize(&value).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    T::deserialize(value).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Reads a single matrix file.
pub fn load_matrix(path: &Path) -> Result<CMatrix, CliError> {
    two_pass::<RawMatrix, _>(path, read_value(path)?)
}

/// Reads a combination file.
pub fn load_combination(path: &Path) -> Result<KrausCombination, CliError> {
    two_pass::<RawCombination, _>(path, read_value(path)?)
}

/// Reads a separation certificate file.
pub fn load_certificate(path: &Path) -> Result<SeparationCertificate, CliError> {
    two_pass::<RawCertificate, _>(path, read_value(path)?)
}

/// Reads solver overrides; absent fields keep their defaults.
pub fn load_config(path: &Path) -> Result<SolverConfig, CliError> {
    let value = read_value(path)?;
    let cfg: SolverConfig = serde_json::from_value(value)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Any of the three family encodings, told apart by their keys.
#[derive(Clone, Debug)]
pub enum FamilyRecord {
    Matrix(MatrixFamily),
    Diagonal(DiagonalFamily),
    Spectral(SpectralFamily),
}

impl FamilyRecord {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let value = read_value(path)?;
        let has = |k: &str| value.get(k).is_some();
        if has("generators") {
            two_pass::<RawMatrixFamily, _>(path, value).map(FamilyRecord::Matrix)
        } else if has("functions") {
            two_pass::<RawDiagonalFamily, _>(path, value).map(FamilyRecord::Diagonal)
        } else if has("eigs") {
            two_pass::<RawSpectralFamily, _>(path, value).map(FamilyRecord::Spectral)
        } else {
            Err(CliError::usage(format!(
                "{}: expected a family with \"generators\", \"functions\" or \"eigs\"",
                path.display()
            )))
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FamilyRecord::Matrix(_) => "matrix",
            FamilyRecord::Diagonal(_) => "diagonal",
            FamilyRecord::Spectral(_) => "spectral",
        }
    }

    /// The family as matrices: diagonal embedding or finite-rank elements.
    pub fn to_matrix_family(&self) -> Result<MatrixFamily, CliError> {
        Ok(match self {
            FamilyRecord::Matrix(f) => f.clone(),
            FamilyRecord::Diagonal(f) => f.to_matrix_family()?,
            FamilyRecord::Spectral(f) => f.to_matrix_family()?,
        })
    }
}

/// Families loaded for one invocation, plus the solver settings they run under.
#[derive(Debug, Default)]
pub struct Workspace {
    families: BTreeMap<String, FamilyRecord>,
    pub config: SolverConfig,
}

impl Workspace {
    pub fn new(config: SolverConfig) -> Self {
        Self {
            families: BTreeMap::new(),
            config,
        }
    }

    /// Loads a family file under its path as name.
    pub fn add_family_file(&mut self, path: &Path) -> Result<String, CliError> {
        let name = path.display().to_string();
        if self.families.contains_key(&name) {
            return Err(CliError::usage(format!("family {name} loaded twice")));
        }
        let record = FamilyRecord::load(path)?;
        self.families.insert(name.clone(), record);
        Ok(name)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyRecord> {
        self.families.get(name)
    }

    pub fn matrix_family(&self, name: &str) -> Result<MatrixFamily, CliError> {
        self.family(name)
            .ok_or_else(|| CliError::usage(format!("unknown family {name}")))?
            .to_matrix_family()
    }
}

/// Solver overrides shared by the solving subcommands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Defaults, then the config file, then individual flags.
    pub fn resolve(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => SolverConfig::default(),
        };
        if let Some(tol) = self.tol {
            cfg.feas_tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            cfg.max_iter = max_iter;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }
}
