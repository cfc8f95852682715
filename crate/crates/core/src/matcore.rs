//! Dense complex matrices plus the predicates, norms, and elementwise
//! transforms that every other module builds on.
//!
//! Matrices are stored row-major. All operations are pure functions over
//! immutable values, so everything here is safe to share across threads.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg;
use crate::{Error, Result};

/// Absolute/relative tolerance pair used by every numerical predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_eps: 1e-10,
            rel_eps: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        if abs_eps < 0.0 || rel_eps < 0.0 || !abs_eps.is_finite() || !rel_eps.is_finite() {
            return Err(Error::InvalidParameter(
                "tolerances must be finite and non-negative".into(),
            ));
        }
        Ok(Tolerance { abs_eps, rel_eps })
    }

    /// Threshold for a quantity whose natural scale is `scale`.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.abs_eps + self.rel_eps * scale.abs()
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidValue("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of size d.
    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// All-ones matrix of the given shape.
    pub fn ones(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(1.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Real matrix lift.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Diagonal matrix with the given diagonal entries.
    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d, d);
        for (i, &z) in diag.iter().enumerate() {
            m.set(i, i, z);
        }
        m
    }

    /// Rank-one outer product |u><v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conjugate(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conjugate()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Hadamard (entrywise) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "hadamard product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Diagonal entries as a vector.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let d = self.rows.min(self.cols);
        (0..d).map(|i| self.get(i, i)).collect()
    }

    /// Diagonal part as a (square) matrix, off-diagonal zeroed.
    pub fn diagonal_matrix(&self) -> Result<Self> {
        self.require_square()?;
        Ok(Self::from_diagonal(&self.diagonal()))
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal()
            .into_iter()
            .fold(Complex64::new(0.0, 0.0), |a, z| a + z)
    }

    pub fn row_sums(&self) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Complex64::new(0.0, 0.0), |a, j| a + self.get(i, j))
            })
            .collect()
    }

    pub fn col_sums(&self) -> Vec<Complex64> {
        (0..self.cols)
            .map(|j| {
                (0..self.rows).fold(Complex64::new(0.0, 0.0), |a, i| a + self.get(i, j))
            })
            .collect()
    }

    /// Sum of all entries.
    pub fn entry_sum(&self) -> Complex64 {
        self.data
            .iter()
            .fold(Complex64::new(0.0, 0.0), |a, z| a + z)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry deviation from being self-adjoint.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Hermitian symmetrization (M + M*)/2.
    pub fn hermitize(&self) -> Result<Self> {
        self.require_square()?;
        let adj = self.adjoint();
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + adj.get(i, j)) * 0.5
        }))
    }

    /// Index pairs of a rows x cols grid in row-major order.
    pub fn index_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let cols = self.cols;
        (0..self.rows * self.cols).map(move |k| (k / cols, k % cols))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

// JSON encoding: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        ComplexMatrix::new(
            raw.rows,
            raw.cols,
            raw.data
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Matrix norms used by the separability criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Sum of entry moduli.
    EntrywiseOne,
    /// Sum of singular values (nuclear norm).
    Trace,
    Frobenius,
}

/// Tests positive semi-definiteness of a square matrix.
///
/// The matrix must be self-adjoint up to `tol` in max-entry norm; the
/// minimum eigenvalue of its Hermitian part is then compared against
/// `-(abs_eps + rel_eps * spectral_radius)`.
pub fn is_psd(m: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    m.require_square()?;
    if m.rows() == 0 {
        return Ok(true);
    }
    if m.hermiticity_defect() > tol.scaled(m.max_abs()) {
        return Ok(false);
    }
    let eigs = linalg::hermitian_eigenvalues(m)?;
    let radius = eigs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min >= -tol.scaled(radius))
}

/// Minimum eigenvalue of the Hermitian part; handy for reporting margins.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    m.require_square()?;
    if m.rows() == 0 {
        return Ok(0.0);
    }
    let eigs = linalg::hermitian_eigenvalues(m)?;
    Ok(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Entrywise non-negativity: every entry real (up to `abs_eps`) with real
/// part >= -abs_eps.
pub fn is_ewp(m: &ComplexMatrix, tol: &Tolerance) -> bool {
    m.entries()
        .iter()
        .all(|z| z.im.abs() <= tol.abs_eps && z.re >= -tol.abs_eps)
}

/// Comparison matrix: |M_ii| on the diagonal, -|M_ij| off it.
pub fn comparison_matrix(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = m.require_square()?;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let a = m.get(i, j).norm();
        Complex64::new(if i == j { a } else { -a }, 0.0)
    }))
}

/// Row and column diagonal dominance:
/// `Re(M_ii) >= sum_{j != i} |M_ij|` and the column analogue, both up to
/// `abs_eps`.
pub fn is_diagonally_dominant(m: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    let d = m.require_square()?;
    for i in 0..d {
        let diag = m.get(i, i).re;
        let row: f64 = (0..d).filter(|&j| j != i).map(|j| m.get(i, j).norm()).sum();
        let col: f64 = (0..d).filter(|&j| j != i).map(|j| m.get(j, i).norm()).sum();
        if diag < row - tol.abs_eps || diag < col - tol.abs_eps {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn matrix_norm(m: &ComplexMatrix, kind: NormKind) -> f64 {
    match kind {
        NormKind::EntrywiseOne => m.entries().iter().map(|z| z.norm()).sum(),
        NormKind::Frobenius => m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        NormKind::Trace => linalg::singular_values(m).iter().sum(),
    }
}

/// Splits `M` entrywise into modulus and phase, with `phase(0) = 1`.
///
/// The zero convention keeps the phase matrix unimodular everywhere, which
/// the phase-fix witness constructions rely on.
pub fn phase_split(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let mut abs = ComplexMatrix::zeros(m.rows(), m.cols());
    let mut phase = ComplexMatrix::zeros(m.rows(), m.cols());
    for (i, j) in m.index_pairs() {
        let z = m.get(i, j);
        let r = z.norm();
        abs.set(i, j, Complex64::new(r, 0.0));
        phase.set(i, j, phase_of(z));
    }
    (abs, phase)
}

/// Complex phase of a scalar, with `phase(0) = 1`.
pub fn phase_of(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Zeroes the diagonal, keeping off-diagonal entries.
pub fn tilde(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = m.require_square()?;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            m.get(i, j)
        }
    }))
}
