//! Invariant bipartite matrices and their (A, B, C) triple parameterization.
//!
//! A d^2 x d^2 matrix invariant under conjugation by diagonal sign matrices
//! O (x) O is determined by three d x d matrices with equal diagonals: A on
//! matched index pairs |ij><ij|, B on the |ii><jj| block, C on the swap
//! block |ij><ji|. The unitary-invariant subclasses pin B (LDUI) or C
//! (CLDUI) to diag(A). Everything in this module is a pure function of the
//! triple; an explicit seed makes the Monte-Carlo oracle deterministic.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::matcore::{ComplexMatrix, Tolerance};
use crate::{Error, Result};

/// The three invariance classes.
///
/// LDUI: invariant under U (x) U, CLDUI: under U (x) conj(U) for diagonal
/// unitaries U; LDOI: under O (x) O for diagonal sign matrices O.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvariantClass {
    #[serde(rename = "LDUI")]
    Ldui,
    #[serde(rename = "CLDUI")]
    Cldui,
    #[serde(rename = "LDOI")]
    Ldoi,
}

/// Matrix triple (A, B, C) with equal diagonals; parameterizes every
/// invariant matrix and covariant map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TripleJson", into = "TripleJson")]
pub struct MatrixTriple {
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
}

/// Matrix pair (A, B) with equal diagonals, for the LDUI/CLDUI subclasses.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPair {
    a: ComplexMatrix,
    b: ComplexMatrix,
}

// JSON triple encoding: {"A": .., "B": .. | null, "C": .. | null}.
// A null B (resp. C) slot promotes per the LDUI (resp. CLDUI) embedding.
#[derive(Serialize, Deserialize)]
struct TripleJson {
    #[serde(rename = "A")]
    a: ComplexMatrix,
    #[serde(rename = "B")]
    b: Option<ComplexMatrix>,
    #[serde(rename = "C")]
    c: Option<ComplexMatrix>,
}

impl TryFrom<TripleJson> for MatrixTriple {
    type Error = Error;
    fn try_from(raw: TripleJson) -> Result<Self> {
        let diag = ComplexMatrix::from_diagonal(&raw.a.diagonal());
        let b = raw.b.unwrap_or_else(|| diag.clone());
        let c = raw.c.unwrap_or(diag);
        MatrixTriple::new(raw.a, b, c)
    }
}

impl From<MatrixTriple> for TripleJson {
    fn from(t: MatrixTriple) -> TripleJson {
        TripleJson {
            a: t.a,
            b: Some(t.b),
            c: Some(t.c),
        }
    }
}

impl MatrixTriple {
    /// Validates the square shapes and the equal-diagonal convention.
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix) -> Result<Self> {
        let d = a.require_square()?;
        if b.require_square()? != d || c.require_square()? != d {
            return Err(Error::Dimension(
                "triple matrices must share one square dimension".into(),
            ));
        }
        let tol = Tolerance::default();
        let scale = a.max_abs().max(b.max_abs()).max(c.max_abs());
        for i in 0..d {
            let ai = a.get(i, i);
            if (ai - b.get(i, i)).norm() > tol.scaled(scale)
                || (ai - c.get(i, i)).norm() > tol.scaled(scale)
            {
                return Err(Error::InvalidValue(format!(
                    "diag(A), diag(B), diag(C) must agree (mismatch at index {i})"
                )));
            }
        }
        Ok(MatrixTriple { a, b, c })
    }

    /// LDUI pair (A, C): the B slot is the diagonal of A.
    pub fn from_ldui_pair(a: ComplexMatrix, c: ComplexMatrix) -> Result<Self> {
        let b = a.diagonal_matrix()?;
        MatrixTriple::new(a, b, c)
    }

    /// CLDUI pair (A, B): the C slot is the diagonal of A.
    pub fn from_cldui_pair(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        let c = a.diagonal_matrix()?;
        MatrixTriple::new(a, b, c)
    }

    /// Diagonal triple (A, diag A, diag A).
    pub fn diagonal(a: ComplexMatrix) -> Result<Self> {
        let d = a.diagonal_matrix()?;
        MatrixTriple::new(a, d.clone(), d)
    }

    pub fn zero(d: usize) -> Self {
        MatrixTriple {
            a: ComplexMatrix::zeros(d, d),
            b: ComplexMatrix::zeros(d, d),
            c: ComplexMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn into_parts(self) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        (self.a, self.b, self.c)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        MatrixTriple {
            a: self.a.scale(s),
            b: self.b.scale(s),
            c: self.c.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("triple dimensions differ".into()));
        }
        Ok(MatrixTriple {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            c: &self.c + &other.c,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.b.max_abs()).max(self.c.max_abs())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.a
            .max_abs_diff(&other.a)
            .max(self.b.max_abs_diff(&other.b))
            .max(self.c.max_abs_diff(&other.c))
    }

    /// Whether the B slot equals diag(A), i.e. the triple is of LDUI type.
    pub fn is_ldui_type(&self, tol: &Tolerance) -> bool {
        slot_is_diagonal(&self.a, &self.b, tol)
    }

    /// Whether the C slot equals diag(A), i.e. the triple is of CLDUI type.
    pub fn is_cldui_type(&self, tol: &Tolerance) -> bool {
        slot_is_diagonal(&self.a, &self.c, tol)
    }
}

fn slot_is_diagonal(a: &ComplexMatrix, slot: &ComplexMatrix, tol: &Tolerance) -> bool {
    let diag = ComplexMatrix::from_diagonal(&a.diagonal());
    slot.max_abs_diff(&diag) <= tol.scaled(a.max_abs().max(slot.max_abs()))
}

impl MatrixPair {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        let d = a.require_square()?;
        if b.require_square()? != d {
            return Err(Error::Dimension("pair matrices must share dimension".into()));
        }
        let tol = Tolerance::default();
        let scale = a.max_abs().max(b.max_abs());
        for i in 0..d {
            if (a.get(i, i) - b.get(i, i)).norm() > tol.scaled(scale) {
                return Err(Error::InvalidValue(format!(
                    "diag(A) and diag(B) must agree (mismatch at index {i})"
                )));
            }
        }
        Ok(MatrixPair { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
}

/// Dense d^2 x d^2 complex matrix indexed by fused pairs, with the
/// row-major fusion i = i1 * d + i2 (first tensor factor is the slow index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct BipartiteMatrix {
    d: usize,
    m: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for BipartiteMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        BipartiteMatrix::from_matrix(m)
    }
}

impl From<BipartiteMatrix> for ComplexMatrix {
    fn from(x: BipartiteMatrix) -> ComplexMatrix {
        x.m
    }
}

impl BipartiteMatrix {
    /// Wraps a d^2 x d^2 matrix; the side must be a perfect square.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        let n = m.require_square()?;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Dimension(format!(
                "bipartite matrix side {n} is not a perfect square"
            )));
        }
        Ok(BipartiteMatrix { d, m })
    }

    pub fn zeros(d: usize) -> Self {
        BipartiteMatrix {
            d,
            m: ComplexMatrix::zeros(d * d, d * d),
        }
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn get(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> Complex64 {
        self.m.get(i1 * self.d + i2, j1 * self.d + j2)
    }

    pub fn set(&mut self, i1: usize, i2: usize, j1: usize, j2: usize, z: Complex64) {
        self.m.set(i1 * self.d + i2, j1 * self.d + j2, z);
    }

    pub fn max_abs(&self) -> f64 {
        self.m.max_abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m.max_abs_diff(&other.m)
    }
}

/// Applies the class embedding: LDUI forces B = diag(A), CLDUI forces
/// C = diag(A), LDOI keeps the triple as given.
pub fn embed(class: InvariantClass, t: &MatrixTriple) -> MatrixTriple {
    let diag = ComplexMatrix::from_diagonal(&t.a().diagonal());
    match class {
        InvariantClass::Ldui => MatrixTriple {
            a: t.a.clone(),
            b: diag,
            c: t.c.clone(),
        },
        InvariantClass::Cldui => MatrixTriple {
            a: t.a.clone(),
            b: t.b.clone(),
            c: diag,
        },
        InvariantClass::Ldoi => t.clone(),
    }
}

/// Places the triple into its invariant d^2 x d^2 matrix: A_{i1 i2} on
/// matched pairs, B_{ij} on |ii><jj|, C_{ij} on |ij><ji|, zeros elsewhere.
pub fn build(class: InvariantClass, t: &MatrixTriple) -> BipartiteMatrix {
    let t = embed(class, t);
    let d = t.dim();
    let mut x = BipartiteMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            x.set(i, j, i, j, t.a().get(i, j));
            if i != j {
                x.set(i, i, j, j, t.b().get(i, j));
                x.set(i, j, j, i, t.c().get(i, j));
            }
        }
    }
    x
}

/// Reads the triple off an arbitrary bipartite matrix:
/// A_ij = <ij|X|ij>, B_ij = <ii|X|jj>, C_ij = <ij|X|ji>.
pub fn extract_triple(x: &BipartiteMatrix) -> MatrixTriple {
    let d = x.local_dim();
    let a = ComplexMatrix::from_fn(d, d, |i, j| x.get(i, j, i, j));
    let b = ComplexMatrix::from_fn(d, d, |i, j| x.get(i, i, j, j));
    let c = ComplexMatrix::from_fn(d, d, |i, j| x.get(i, j, j, i));
    MatrixTriple { a, b, c }
}

/// Orthogonal projection onto the class subspace.
pub fn project(x: &BipartiteMatrix, class: InvariantClass) -> BipartiteMatrix {
    build(class, &extract_triple(x))
}

/// Averaging mode for [`average_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// Exact group average: all 2^d diagonal sign matrices for LDOI, and a
    /// full cycle of (2d+1)-th roots of unity per leg for LDUI/CLDUI.
    ExactSign,
    /// Monte-Carlo estimate with i.i.d. uniform phases (signs for LDOI).
    McPhase,
}

/// Group-averaging implementation of the projections, kept as an
/// independent oracle for [`project`].
pub fn average_oracle(
    x: &BipartiteMatrix,
    class: InvariantClass,
    mode: AverageMode,
    samples: usize,
    seed: u64,
) -> Result<BipartiteMatrix> {
    let d = x.local_dim();
    match mode {
        AverageMode::ExactSign => match class {
            InvariantClass::Ldoi => {
                if d > 12 {
                    return Err(Error::InvalidParameter(format!(
                        "exact sign average needs 2^d terms; d = {d} is too large"
                    )));
                }
                let mut acc = BipartiteMatrix::zeros(d);
                let count = 1usize << d;
                for mask in 0..count {
                    let u: Vec<Complex64> = (0..d)
                        .map(|k| {
                            if mask >> k & 1 == 1 {
                                Complex64::new(-1.0, 0.0)
                            } else {
                                Complex64::new(1.0, 0.0)
                            }
                        })
                        .collect();
                    accumulate_conjugated(&mut acc, x, &u, class, 1.0 / count as f64);
                }
                Ok(acc)
            }
            InvariantClass::Ldui | InvariantClass::Cldui => {
                // One full (2d+1)-th root-of-unity cycle per leg kills every
                // non-invariant monomial; the per-leg averages commute, so
                // they compose into the exact average over the product group.
                let q = 2 * d + 1;
                let mut current = x.clone();
                for leg in 0..d {
                    let mut acc = BipartiteMatrix::zeros(d);
                    for m in 0..q {
                        let theta = 2.0 * std::f64::consts::PI * m as f64 / q as f64;
                        let u: Vec<Complex64> = (0..d)
                            .map(|k| {
                                if k == leg {
                                    Complex64::from_polar(1.0, theta)
                                } else {
                                    Complex64::new(1.0, 0.0)
                                }
                            })
                            .collect();
                        accumulate_conjugated(&mut acc, &current, &u, class, 1.0 / q as f64);
                    }
                    current = acc;
                }
                Ok(current)
            }
        },
        AverageMode::McPhase => {
            if samples == 0 {
                return Err(Error::InvalidParameter(
                    "monte-carlo average needs at least one sample".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = BipartiteMatrix::zeros(d);
            for _ in 0..samples {
                let u: Vec<Complex64> = (0..d)
                    .map(|_| match class {
                        InvariantClass::Ldoi => {
                            if rng.gen::<bool>() {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::new(-1.0, 0.0)
                            }
                        }
                        _ => Complex64::from_polar(
                            1.0,
                            rng.gen::<f64>() * 2.0 * std::f64::consts::PI,
                        ),
                    })
                    .collect();
                accumulate_conjugated(&mut acc, x, &u, class, 1.0 / samples as f64);
            }
            Ok(acc)
        }
    }
}

/// acc += weight * (U (x) U) X (U (x) U)^* in the class-appropriate pattern.
fn accumulate_conjugated(
    acc: &mut BipartiteMatrix,
    x: &BipartiteMatrix,
    u: &[Complex64],
    class: InvariantClass,
    weight: f64,
) {
    let d = x.local_dim();
    for i1 in 0..d {
        for i2 in 0..d {
            for j1 in 0..d {
                for j2 in 0..d {
                    let phase = match class {
                        // (U x U) X (U* x U*)
                        InvariantClass::Ldui | InvariantClass::Ldoi => {
                            u[i1] * u[i2] * (u[j1] * u[j2]).conj()
                        }
                        // (U x conj U) X (U* x U^T)
                        InvariantClass::Cldui => {
                            u[i1] * u[i2].conj() * u[j1].conj() * u[j2]
                        }
                    };
                    let v = acc.get(i1, i2, j1, j2) + phase * x.get(i1, i2, j1, j2) * weight;
                    acc.set(i1, i2, j1, j2, v);
                }
            }
        }
    }
}

/// Max-entry comparison of X against its projection.
pub fn is_invariant(x: &BipartiteMatrix, class: InvariantClass, tol: &Tolerance) -> bool {
    let p = project(x, class);
    x.max_abs_diff(&p) <= tol.scaled(x.max_abs())
}

/// Label of one block in the permutation-similarity block decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLabel {
    /// The d x d block carried by B (on the span of |ii>).
    BSlot,
    /// 1x1 block [A_ii] (LDUI).
    ADiag(usize),
    /// 1x1 block [A_ij], i != j (CLDUI).
    AOff(usize, usize),
    /// 2x2 block [[A_ij, C_ij], [C_ji, A_ji]] on |ij>, |ji>, i < j.
    Pair(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Block {
    pub label: BlockLabel,
    pub matrix: ComplexMatrix,
}

/// Block decomposition of the invariant matrix, up to a basis permutation:
/// LDOI = B (+) 2x2 pair blocks; LDUI = [A_ii] (+) pair blocks;
/// CLDUI = B (+) [A_ij] singletons.
pub fn block_decomposition(t: &MatrixTriple, class: InvariantClass) -> Vec<Block> {
    let t = embed(class, t);
    let d = t.dim();
    let mut blocks = Vec::new();
    match class {
        InvariantClass::Ldoi | InvariantClass::Cldui => blocks.push(Block {
            label: BlockLabel::BSlot,
            matrix: t.b().clone(),
        }),
        InvariantClass::Ldui => {
            for i in 0..d {
                blocks.push(Block {
                    label: BlockLabel::ADiag(i),
                    matrix: ComplexMatrix::from_diagonal(&[t.a().get(i, i)]),
                });
            }
        }
    }
    match class {
        InvariantClass::Ldoi | InvariantClass::Ldui => {
            for i in 0..d {
                for j in (i + 1)..d {
                    blocks.push(Block {
                        label: BlockLabel::Pair(i, j),
                        matrix: pair_block(&t, i, j),
                    });
                }
            }
        }
        InvariantClass::Cldui => {
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        blocks.push(Block {
                            label: BlockLabel::AOff(i, j),
                            matrix: ComplexMatrix::from_diagonal(&[t.a().get(i, j)]),
                        });
                    }
                }
            }
        }
    }
    blocks
}

fn pair_block(t: &MatrixTriple, i: usize, j: usize) -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![
            t.a().get(i, j),
            t.c().get(i, j),
            t.c().get(j, i),
            t.a().get(j, i),
        ],
    )
    .expect("2x2 block")
}

/// Rank of the invariant matrix, as the sum of block ranks. Singular values
/// are pooled across blocks and thresholded at `rel_eps * sigma_max`, which
/// matches a dense SVD rank of the full matrix.
pub fn rank_of(t: &MatrixTriple, class: InvariantClass, tol: &Tolerance) -> usize {
    let mut pooled: Vec<f64> = Vec::new();
    for block in block_decomposition(t, class) {
        pooled.extend(linalg::singular_values(&block.matrix));
    }
    let smax = pooled.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    pooled
        .iter()
        .filter(|&&s| s > tol.abs_eps + tol.rel_eps * smax)
        .count()
}

/// Spectrum of the invariant matrix as the union of block spectra
/// (multiset of d^2 eigenvalues).
pub fn spectrum(t: &MatrixTriple, class: InvariantClass) -> Result<Vec<Complex64>> {
    let t = embed(class, t);
    let d = t.dim();
    let mut eigs = Vec::with_capacity(d * d);
    match class {
        InvariantClass::Ldui => {
            eigs.extend(t.a().diagonal());
        }
        InvariantClass::Cldui | InvariantClass::Ldoi => {
            eigs.extend(linalg::general_eigenvalues(t.b())?);
        }
    }
    match class {
        InvariantClass::Cldui => {
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        eigs.push(t.a().get(i, j));
                    }
                }
            }
        }
        InvariantClass::Ldui | InvariantClass::Ldoi => {
            for i in 0..d {
                for j in (i + 1)..d {
                    let (l1, l2) = eig2(
                        t.a().get(i, j),
                        t.c().get(i, j),
                        t.c().get(j, i),
                        t.a().get(j, i),
                    );
                    eigs.push(l1);
                    eigs.push(l2);
                }
            }
        }
    }
    Ok(eigs)
}

/// Closed-form eigenvalues of [[a, b], [c, d]].
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

/// The eight tensor-leg permutations realized on triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegPermutation {
    /// F X F -> (A^T, B, C^T)
    Fxf,
    /// X^T -> (A, B^T, C^T)
    Transpose,
    /// Diagonal 4-tensor leg swap -> (A^T, B^T, C)
    DiagSwap,
    /// Realignment X^R -> (B, A, C)
    Realign,
    /// Partial transpose on the second factor -> (A, C, B)
    Gamma,
    /// Partial transpose on the first factor -> (A, C^T, B^T)
    GammaLeft,
    /// F X -> (C^T, B, A^T)
    FLeft,
    /// X F -> (C, B, A)
    FRight,
}

/// Applies a leg permutation to the triple.
pub fn leg_permutation(t: &MatrixTriple, which: LegPermutation) -> MatrixTriple {
    let (a, b, c) = (t.a(), t.b(), t.c());
    let (a2, b2, c2) = match which {
        LegPermutation::Fxf => (a.transpose(), b.clone(), c.transpose()),
        LegPermutation::Transpose => (a.clone(), b.transpose(), c.transpose()),
        LegPermutation::DiagSwap => (a.transpose(), b.transpose(), c.clone()),
        LegPermutation::Realign => (b.clone(), a.clone(), c.clone()),
        LegPermutation::Gamma => (a.clone(), c.clone(), b.clone()),
        LegPermutation::GammaLeft => (a.clone(), c.transpose(), b.transpose()),
        LegPermutation::FLeft => (c.transpose(), b.clone(), a.transpose()),
        LegPermutation::FRight => (c.clone(), b.clone(), a.clone()),
    };
    MatrixTriple {
        a: a2,
        b: b2,
        c: c2,
    }
}

/// Componentwise direct sum; builds to the bipartite direct sum of the
/// two invariant matrices.
pub fn direct_sum(t1: &MatrixTriple, t2: &MatrixTriple) -> MatrixTriple {
    let block = |m1: &ComplexMatrix, m2: &ComplexMatrix| {
        let (d1, d2) = (m1.rows(), m2.rows());
        ComplexMatrix::from_fn(d1 + d2, d1 + d2, |i, j| {
            if i < d1 && j < d1 {
                m1.get(i, j)
            } else if i >= d1 && j >= d1 {
                m2.get(i - d1, j - d1)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    MatrixTriple {
        a: block(t1.a(), t2.a()),
        b: block(t1.b(), t2.b()),
        c: block(t1.c(), t2.c()),
    }
}

/// Principal subtriple (A[I], B[I], C[I]); equals the local projection
/// (P (x) P) X (P (x) P) compressed to |I|.
pub fn principal_subtriple(t: &MatrixTriple, indices: &[usize]) -> Result<MatrixTriple> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter("index set must be non-empty".into()));
    }
    let d = t.dim();
    if indices.iter().any(|&i| i >= d) {
        return Err(Error::InvalidParameter(format!(
            "index out of range for dimension {d}"
        )));
    }
    let sub = |m: &ComplexMatrix| {
        ComplexMatrix::from_fn(indices.len(), indices.len(), |i, j| {
            m.get(indices[i], indices[j])
        })
    };
    Ok(MatrixTriple {
        a: sub(t.a()),
        b: sub(t.b()),
        c: sub(t.c()),
    })
}

/// Partial traces and partial conditional expectations of the invariant
/// matrix, all expressible through row/column sums of A.
#[derive(Debug, Clone)]
pub struct ConditionalExpectations {
    /// [id (x) Tr] X = diag of row sums of A.
    pub a_row: ComplexMatrix,
    /// [Tr (x) id] X = diag of column sums of A.
    pub a_col: ComplexMatrix,
    /// Tr X = sum of all entries of A.
    pub trace: Complex64,
    /// [id (x) diag] X = [diag (x) id] X, the triple (A, diag A, diag A).
    pub id_diag: MatrixTriple,
    /// [id (x) trace] X, the triple (A^row, A^row, A^row) / d.
    pub id_trace_row: MatrixTriple,
    /// [trace (x) id] X, the triple (A^col, A^col, A^col) / d.
    pub id_trace_col: MatrixTriple,
}

pub fn conditional_expectations(t: &MatrixTriple) -> ConditionalExpectations {
    let d = t.dim();
    let a_row = ComplexMatrix::from_diagonal(&t.a().row_sums());
    let a_col = ComplexMatrix::from_diagonal(&t.a().col_sums());
    let scale = Complex64::new(1.0 / d as f64, 0.0);
    let diag_triple = |m: &ComplexMatrix| MatrixTriple {
        a: m.scale(scale),
        b: m.scale(scale),
        c: m.scale(scale),
    };
    let diag_a = ComplexMatrix::from_diagonal(&t.a().diagonal());
    ConditionalExpectations {
        trace: t.a().entry_sum(),
        id_diag: MatrixTriple {
            a: t.a().clone(),
            b: diag_a.clone(),
            c: diag_a,
        },
        id_trace_row: diag_triple(&a_row),
        id_trace_col: diag_triple(&a_col),
        a_row,
        a_col,
    }
}

/// Symmetries of the invariant matrix in triple form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymmetryFlags {
    /// X = X*  <=>  A real and B, C self-adjoint.
    pub self_adjoint: bool,
    /// X = F X F  <=>  A = A^T and C = C^T.
    pub symmetric: bool,
    /// X = P_s X P_s  <=>  A = C = A^T = C^T.
    pub bose_symmetric: bool,
}

pub fn symmetry_flags(t: &MatrixTriple, tol: &Tolerance) -> SymmetryFlags {
    let scale = t.max_abs();
    let thr = tol.scaled(scale);
    let a_real = t
        .a()
        .entries()
        .iter()
        .all(|z| z.im.abs() <= thr);
    let self_adjoint =
        a_real && t.b().hermiticity_defect() <= thr && t.c().hermiticity_defect() <= thr;
    let a_sym = t.a().max_abs_diff(&t.a().transpose()) <= thr;
    let c_sym = t.c().max_abs_diff(&t.c().transpose()) <= thr;
    let symmetric = a_sym && c_sym;
    let bose_symmetric = symmetric && t.a().max_abs_diff(t.c()) <= thr;
    SymmetryFlags {
        self_adjoint,
        symmetric,
        bose_symmetric,
    }
}


#[cfg(test)]
pub(crate) use tests::random_triple;
