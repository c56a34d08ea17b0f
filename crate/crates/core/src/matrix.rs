//! Dense complex matrices and the Hermitian primitives the rest of the crate
//! is built on.
//!
//! Storage is a thin newtype over `nalgebra::DMatrix<Complex64>` that enforces
//! finiteness. Hermitian eigendecompositions use nalgebra's Householder
//! tridiagonalization followed by implicit symmetric QR, so results are
//! deterministic on a given platform.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Acceptance threshold for the Hermitian defect of symmetrized matrices.
pub const HERM_TOL: f64 = 1e-10;
/// Inputs whose relative Hermitian defect exceeds this are rejected.
pub const HERM_REJECT_TOL: f64 = 1e-6;
/// Largest negative eigenvalue `sqrt_psd` clamps to zero.
pub const SQRT_PSD_TOL: f64 = 1e-9;

/// A dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Self::from_inner(DMatrix::from_row_slice(rows, cols, &data))
    }

    /// Builds a matrix from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::BadLength {
                    rows: nrows,
                    cols: ncols,
                    len: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::from_row_major(nrows, ncols, data)
    }

    pub fn from_complex_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::BadLength {
                    rows: nrows,
                    cols: ncols,
                    len: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(nrows, ncols, data)
    }

    /// Wraps an nalgebra matrix, rejecting NaN and infinite entries.
    pub fn from_inner(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub(crate) fn from_inner_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn scalar(n: usize, value: C64) -> Self {
        Self(DMatrix::identity(n, n) * value)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        Self(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Column matrix from a vector.
    pub fn column(v: &[C64]) -> Self {
        Self(DMatrix::from_column_slice(v.len(), 1, v))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn require_shape(&self, other: &CMatrix) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            })
        }
    }

    /// `‖self − other‖_F`, panicking on shape mismatch.
    pub fn frob_dist(&self, other: &CMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{:?}[", self.shape())?;
        for i in 0..self.rows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self.0[(i, j)];
                write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            data: self.row_major(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        CMatrix::from_row_major(repr.rows, repr.cols, repr.data).map_err(serde::de::Error::custom)
    }
}

/// A square matrix known to be Hermitian.
///
/// Construction symmetrizes via `(M + M†)/2` and keeps the pre-symmetrization
/// defect `‖M − M†‖_F` for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix {
    matrix: CMatrix,
    defect: f64,
}

impl HermMatrix {
    /// Symmetrizes `m`, rejecting inputs whose defect exceeds
    /// `HERM_REJECT_TOL · max(1, ‖M‖_F)`.
    pub fn new(m: CMatrix) -> Result<Self> {
        m.require_square()?;
        let defect = m.frob_dist(&m.adjoint());
        if defect > HERM_REJECT_TOL * m.frob_norm().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without the rejection check.
    pub fn symmetrized(m: CMatrix) -> Self {
        let defect = m.frob_dist(&m.adjoint());
        let sym = CMatrix::from_inner_unchecked((&m.0 + m.0.adjoint()) * C64::new(0.5, 0.0));
        Self {
            matrix: sym,
            defect,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::symmetrized(CMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::symmetrized(CMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::symmetrized(CMatrix::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Frobenius norm of `M − M†` before symmetrization.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

impl Serialize for HermMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(deserializer)?;
        HermMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = self.vectors.inner();
        let mut scaled = v.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(j).scale_mut(s);
        }
        CMatrix::from_inner_unchecked(scaled * v.adjoint())
    }
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// `(A + A†)/2`.
pub fn real_part(a: &CMatrix) -> Result<HermMatrix> {
    a.require_square()?;
    Ok(HermMatrix::symmetrized(a.clone()))
}

/// Hermitian eigendecomposition on a raw nalgebra matrix, assumed Hermitian.
///
/// Eigenvalues descend; each eigenvector is rotated so that its first
/// component with modulus above `1e-12` is positive real.
pub(crate) fn eigh_raw(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((vec![m[(0, 0)].re], DMatrix::identity(1, 1)));
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

pub fn eig_herm(h: &HermMatrix) -> Result<Eigen> {
    let (values, vectors) = eigh_raw(h.matrix().inner())?;
    Ok(Eigen {
        values,
        vectors: CMatrix::from_inner_unchecked(vectors),
    })
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(Vec::new());
    }
    let svd = a
        .inner()
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Trace norm (sum of singular values), the dual of the operator norm.
pub fn nuclear_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

pub fn psd_check(h: &HermMatrix, tol: f64) -> Result<PsdCheck> {
    let min_eigenvalue = eig_herm(h)?.min();
    Ok(PsdCheck {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// Principal square root of a PSD matrix; eigenvalues down to `-SQRT_PSD_TOL`
/// are clamped to zero.
pub fn sqrt_psd(h: &HermMatrix) -> Result<HermMatrix> {
    let eig = eig_herm(h)?;
    if eig.min() < -SQRT_PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(HermMatrix::symmetrized(
        eig.reconstruct_with(|l| l.max(0.0).sqrt()),
    ))
}

/// `Tr(A†B)`.
pub fn frob_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    a.require_shape(b)?;
    Ok(a.inner()
        .iter()
        .zip(b.inner().iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Real part of the Frobenius pairing, `Re Tr(A†B)`.
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    Ok(frob_inner(a, b)?.re)
}
