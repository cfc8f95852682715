//! Diagonal unitary/orthogonal covariant linear maps on d x d matrices.
//!
//! A covariant map is parameterized by the same (A, B, C) triple as the
//! invariant bipartite matrices, with the Choi matrix of the map equal to
//! the invariant matrix built from its triple. The action is
//!
//! ```text
//! Phi(Z) = diag(A |diag Z>) + tilde(B) . Z + tilde(C) . Z^T
//! ```
//!
//! (Hadamard products), with the B term absent for DUC maps and the C term
//! absent for CDUC maps. Composition, adjoints, partial actions, positivity
//! screens, and Kraus extraction all stay in triple form.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cones::{psd_test, tcp_certify, CertificateReport, Sufficiency, TcpAssessment};
use crate::ldoi::{
    build, embed, extract_triple, is_invariant, rank_of, BipartiteMatrix, InvariantClass,
    MatrixPair, MatrixTriple,
};
use crate::linalg;
use crate::matcore::{tilde, ComplexMatrix, Tolerance};
use crate::{Error, Result};

/// Covariance classes, mirroring the invariance classes of the Choi
/// matrices: DUC <-> LDUI, CDUC <-> CLDUI, DOC <-> LDOI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapClass {
    #[serde(rename = "DUC")]
    Duc,
    #[serde(rename = "CDUC")]
    Cduc,
    #[serde(rename = "DOC")]
    Doc,
}

impl MapClass {
    pub fn invariant_class(self) -> InvariantClass {
        match self {
            MapClass::Duc => InvariantClass::Ldui,
            MapClass::Cduc => InvariantClass::Cldui,
            MapClass::Doc => InvariantClass::Ldoi,
        }
    }

    fn from_invariant(class: InvariantClass) -> Self {
        match class {
            InvariantClass::Ldui => MapClass::Duc,
            InvariantClass::Cldui => MapClass::Cduc,
            InvariantClass::Ldoi => MapClass::Doc,
        }
    }
}

/// A covariant linear map, stored as its class plus the (class-embedded)
/// triple. JSON: {"class": "DUC"|"CDUC"|"DOC", "triple": {...}}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariantMap {
    class: MapClass,
    triple: MatrixTriple,
}

impl CovariantMap {
    /// Tags a triple with a covariance class. The slot the class does not
    /// use (B for DUC, C for CDUC) is replaced by diag(A).
    pub fn new(class: MapClass, triple: MatrixTriple) -> Self {
        CovariantMap {
            class,
            triple: embed(class.invariant_class(), &triple),
        }
    }

    pub fn class(&self) -> MapClass {
        self.class
    }

    pub fn triple(&self) -> &MatrixTriple {
        &self.triple
    }

    pub fn dim(&self) -> usize {
        self.triple.dim()
    }
}

/// Set of Kraus factor pairs: Phi(Z) = sum_i P_i Z Q_i^*.
/// JSON: {"left": [..], "right": [..]}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausSet {
    pub left: Vec<ComplexMatrix>,
    pub right: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Applies sum_i P_i Z Q_i^*.
    pub fn apply(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = z.require_square()?;
        let mut out = ComplexMatrix::zeros(d, d);
        for (p, q) in self.left.iter().zip(self.right.iter()) {
            let term = p.matmul(z)?.matmul(&q.adjoint())?;
            out = &out + &term;
        }
        Ok(out)
    }
}

/// The unnormalized maximally entangled projector |psi><psi| with
/// psi = sum_i |ii>.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxEntangled {
    pub d: usize,
}

impl MaxEntangled {
    pub fn matrix(&self) -> BipartiteMatrix {
        let mut x = BipartiteMatrix::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                x.set(i, i, j, j, Complex64::new(1.0, 0.0));
            }
        }
        x
    }
}

/// Applies the covariant map to a d x d matrix.
pub fn apply(m: &CovariantMap, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = z.require_square()?;
    if d != m.dim() {
        return Err(Error::Dimension(format!(
            "map acts on {}x{} matrices, got {}x{}",
            m.dim(),
            m.dim(),
            d,
            d
        )));
    }
    let t = m.triple();
    // diag(A |diag Z>)
    let diag_z = z.diagonal();
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        let v = (0..d).fold(Complex64::new(0.0, 0.0), |acc, k| {
            acc + t.a().get(i, k) * diag_z[k]
        });
        out.set(i, i, v);
    }
    let bt = tilde(t.b())?;
    let ct = tilde(t.c())?;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let v = out.get(i, j) + bt.get(i, j) * z.get(i, j) + ct.get(i, j) * z.get(j, i);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Choi matrix of the map: the invariant matrix built from its triple.
pub fn choi(m: &CovariantMap) -> BipartiteMatrix {
    build(m.class().invariant_class(), m.triple())
}

/// Recovers a covariant map from an invariant Choi matrix, tagging the
/// tightest class: DUC if B = diag(A), else CDUC if C = diag(A), else DOC.
pub fn from_choi(x: &BipartiteMatrix, tol: &Tolerance) -> Result<CovariantMap> {
    if !is_invariant(x, InvariantClass::Ldoi, tol) {
        return Err(Error::Classification(
            "matrix is not invariant under diagonal orthogonal conjugation".into(),
        ));
    }
    let t = extract_triple(x);
    let class = if t.is_ldui_type(tol) {
        MapClass::Duc
    } else if t.is_cldui_type(tol) {
        MapClass::Cduc
    } else {
        MapClass::Doc
    };
    Ok(CovariantMap::new(class, t))
}

/// Entanglement-breaking status, decided by certificates only.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum EbStatus {
    Certified { certificate: String },
    Refuted { test: String },
    Inconclusive,
}

/// Standard properties of a covariant map, all read off the triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapProperties {
    pub herm_preserving: bool,
    pub cp: bool,
    pub ccp: bool,
    pub unital: bool,
    pub trace_preserving: bool,
    pub channel: bool,
    pub eb: EbStatus,
}

pub fn map_properties(m: &CovariantMap, tol: &Tolerance) -> MapProperties {
    let t = m.triple();
    let thr = tol.scaled(t.max_abs());
    let a_real = t.a().entries().iter().all(|z| z.im.abs() <= thr);
    let herm_preserving = a_real
        && t.b().hermiticity_defect() <= thr
        && t.c().hermiticity_defect() <= thr;
    let cp = psd_test(t, tol).passed();
    let gamma = crate::ldoi::leg_permutation(t, crate::ldoi::LegPermutation::Gamma);
    let ccp = psd_test(&gamma, tol).passed();
    let one = Complex64::new(1.0, 0.0);
    let unital = t.a().row_sums().iter().all(|s| (s - one).norm() <= tol.scaled(1.0));
    let trace_preserving = t.a().col_sums().iter().all(|s| (s - one).norm() <= tol.scaled(1.0));
    let eb = match tcp_certify(t, tol) {
        TcpAssessment::Certified { certificate, .. } => EbStatus::Certified { certificate },
        TcpAssessment::Refuted { test, .. } => EbStatus::Refuted { test },
        TcpAssessment::Inconclusive { .. } => EbStatus::Inconclusive,
    };
    MapProperties {
        herm_preserving,
        cp,
        ccp,
        unital,
        trace_preserving,
        channel: cp && trace_preserving,
        eb,
    }
}

/// Dual map under the trace pairing, Tr[adjoint(m)(Y) Z] = Tr[Y m(Z)]:
/// (A, B, C) -> (A^T, B^T, C); preserves the class. For hermiticity
/// preserving maps this is also the Hilbert-Schmidt adjoint.
pub fn adjoint(m: &CovariantMap) -> CovariantMap {
    let t = m.triple();
    let triple = MatrixTriple::new(t.a().transpose(), t.b().transpose(), t.c().clone())
        .expect("adjoint preserves equal diagonals");
    CovariantMap::new(m.class(), triple)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransposeSide {
    /// Phi o T: transposition applied to the input first.
    Pre,
    /// T o Phi: transposition applied to the output.
    Post,
}

/// Composition with the transposition map. Swaps the DUC and CDUC classes
/// and fixes DOC.
pub fn transpose_compose(m: &CovariantMap, side: TransposeSide) -> CovariantMap {
    let t = m.triple();
    let triple = match side {
        TransposeSide::Pre => MatrixTriple::new(t.a().clone(), t.c().clone(), t.b().clone()),
        TransposeSide::Post => {
            MatrixTriple::new(t.a().clone(), t.c().transpose(), t.b().transpose())
        }
    }
    .expect("transposition preserves equal diagonals");
    let class = match m.class() {
        MapClass::Duc => MapClass::Cduc,
        MapClass::Cduc => MapClass::Duc,
        MapClass::Doc => MapClass::Doc,
    };
    CovariantMap::new(class, triple)
}

/// Hilbert-Schmidt pairing of two triples:
/// `Tr(A1 A2^T) + Tr(tilde B1 tilde B2) + Tr(tilde C1 tilde C2)`,
/// which equals the trace of the product of the two invariant matrices.
pub fn pairing(t1: &MatrixTriple, t2: &MatrixTriple) -> Result<Complex64> {
    if t1.dim() != t2.dim() {
        return Err(Error::Dimension("triple dimensions differ".into()));
    }
    let d = t1.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += t1.a().get(i, j) * t2.a().get(i, j);
            if i != j {
                acc += t1.b().get(i, j) * t2.b().get(j, i);
                acc += t1.c().get(i, j) * t2.c().get(j, i);
            }
        }
    }
    Ok(acc)
}

/// Necessary conditions for positivity of the map: A entrywise
/// non-negative, B and C self-adjoint, and for all i != j
/// `sqrt(A_ii A_jj) + sqrt(A_ij A_ji) >= |B_ij| + |C_ij|`.
pub fn positivity_necessary(t: &MatrixTriple, tol: &Tolerance) -> CertificateReport {
    let mut report = CertificateReport { items: vec![] };
    let scale = t.max_abs();
    let max_im = t.a().entries().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    report_push(&mut report, "A_real", -max_im, tol.scaled(scale));
    let min_re = t.a().entries().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    report_push(&mut report, "A_entrywise_nonneg", min_re, tol.scaled(scale));
    report_push(
        &mut report,
        "B_self_adjoint",
        -t.b().hermiticity_defect(),
        tol.scaled(scale),
    );
    report_push(
        &mut report,
        "C_self_adjoint",
        -t.c().hermiticity_defect(),
        tol.scaled(scale),
    );
    report_push(
        &mut report,
        "pairwise",
        pairwise_margin(t, 1.0),
        tol.scaled(scale),
    );
    report
}

fn report_push(report: &mut CertificateReport, name: &str, margin: f64, threshold: f64) {
    report.items.push(crate::cones::CheckItem {
        name: name.into(),
        verdict: if margin >= -threshold {
            crate::cones::CheckVerdict::Pass
        } else {
            crate::cones::CheckVerdict::Fail
        },
        margin,
    });
}

fn pairwise_margin(t: &MatrixTriple, diag_weight: f64) -> f64 {
    let d = t.dim();
    let mut worst = f64::INFINITY;
    for i in 0..d {
        for j in (i + 1)..d {
            let aii = t.a().get(i, i).re.max(0.0);
            let ajj = t.a().get(j, j).re.max(0.0);
            let aij = t.a().get(i, j).re.max(0.0);
            let aji = t.a().get(j, i).re.max(0.0);
            let lhs = diag_weight * (aii * ajj).sqrt() + (aij * aji).sqrt();
            worst = worst.min(lhs - t.b().get(i, j).norm() - t.c().get(i, j).norm());
        }
    }
    if worst == f64::INFINITY {
        0.0
    } else {
        worst
    }
}

/// Sufficient condition for the map to be decomposable (hence positive):
/// the pairwise inequality with the diagonal term damped by 1/(d-1).
pub fn decomposable_sufficient(t: &MatrixTriple, tol: &Tolerance) -> Sufficiency {
    let necessary_structure = {
        let report = positivity_necessary(t, tol);
        report
            .items
            .iter()
            .filter(|i| i.name != "pairwise")
            .all(|i| i.verdict != crate::cones::CheckVerdict::Fail)
    };
    if !necessary_structure {
        return Sufficiency::Inconclusive {
            reason: "structure preconditions failed (A >= 0, B and C self-adjoint)".into(),
        };
    }
    let d = t.dim();
    if d <= 1 {
        return Sufficiency::Certified {
            reason: "decomposable_pairwise".into(),
        };
    }
    let margin = pairwise_margin(t, 1.0 / (d as f64 - 1.0));
    if margin >= -tol.scaled(t.max_abs()) {
        Sufficiency::Certified {
            reason: "decomposable_pairwise".into(),
        }
    } else {
        Sufficiency::Inconclusive {
            reason: format!("damped pairwise inequality violated by {margin}"),
        }
    }
}

/// Result of the randomized positivity refuter.
#[derive(Debug, Clone, PartialEq)]
pub enum FalsifierOutcome {
    /// Product vectors on which the map pairing is negative; a proof of
    /// non-positivity.
    Counterexample {
        v: Vec<Complex64>,
        w: Vec<Complex64>,
        value: f64,
    },
    /// No violation found within the sample budget. Not a proof of
    /// positivity.
    NoneFound,
}

/// Samples complex Gaussian vector pairs and evaluates the pairing of the
/// triple against their extremal ray; a negative value refutes positivity
/// of the associated map. Deterministic for a fixed seed.
pub fn positivity_falsifier(
    t: &MatrixTriple,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> FalsifierOutcome {
    let d = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    for _ in 0..samples {
        let mut sample_vec = || {
            (0..d)
                .map(|_| {
                    Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                })
                .collect::<Vec<Complex64>>()
        };
        let v = sample_vec();
        let w = sample_vec();
        // pairing(t, extremal ray of (v, w)) evaluated directly
        let mut f = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                f += t.a().get(i, j) * v[i].norm_sqr() * w[j].norm_sqr();
                if i != j {
                    f += t.b().get(i, j) * (v[i] * w[i]).conj() * v[j] * w[j];
                    f += t.c().get(i, j) * v[i].conj() * w[i] * v[j] * w[j].conj();
                }
            }
        }
        let scale = t.max_abs()
            * v.iter().map(|z| z.norm_sqr()).sum::<f64>()
            * w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if f.re < -tol.scaled(scale) {
            return FalsifierOutcome::Counterexample { v, w, value: f.re };
        }
    }
    FalsifierOutcome::NoneFound
}

/// Triple composition: the triple of the composite map (and equally of the
/// partial action on an invariant matrix).
pub fn compose_triples(t1: &MatrixTriple, t2: &MatrixTriple) -> Result<MatrixTriple> {
    if t1.dim() != t2.dim() {
        return Err(Error::Dimension("triple dimensions differ".into()));
    }
    let a = t1.a().matmul(t2.a())?;
    let diag_a = ComplexMatrix::from_diagonal(&a.diagonal());
    let b1 = tilde(t1.b())?;
    let b2 = tilde(t2.b())?;
    let c1 = tilde(t1.c())?;
    let c2 = tilde(t2.c())?;
    let b = &(&diag_a + &b1.hadamard(&b2)?) + &c1.hadamard(&c2.transpose())?;
    let c = &(&diag_a + &b1.hadamard(&c2)?) + &c1.hadamard(&b2.transpose())?;
    MatrixTriple::new(a, b, c)
}

/// Pair composition rule for two DUC maps (landing in CDUC).
pub fn compose_pairs_1(p1: &MatrixPair, p2: &MatrixPair) -> Result<MatrixPair> {
    let a = p1.a().matmul(p2.a())?;
    let prod = p1.b().hadamard(&p2.b().transpose())?;
    pair_with_diag(a, prod)
}

/// Pair composition rule mixing DUC and CDUC (or two CDUC maps).
pub fn compose_pairs_2(p1: &MatrixPair, p2: &MatrixPair) -> Result<MatrixPair> {
    let a = p1.a().matmul(p2.a())?;
    let prod = p1.b().hadamard(p2.b())?;
    pair_with_diag(a, prod)
}

fn pair_with_diag(a: ComplexMatrix, off: ComplexMatrix) -> Result<MatrixPair> {
    // B = off with its diagonal replaced by diag(A)
    let d = a.rows();
    let mut b = off;
    for i in 0..d {
        b.set(i, i, a.get(i, i));
    }
    MatrixPair::new(a, b)
}

/// Map composition m1 o m2 (m2 applied first). DOC composed with anything
/// stays DOC; DUC o DUC and CDUC o CDUC land in CDUC; mixing DUC and CDUC
/// lands in DUC.
pub fn compose(m1: &CovariantMap, m2: &CovariantMap) -> Result<CovariantMap> {
    let triple = compose_triples(m1.triple(), m2.triple())?;
    let class = match (m1.class(), m2.class()) {
        (MapClass::Doc, _) | (_, MapClass::Doc) => MapClass::Doc,
        (MapClass::Duc, MapClass::Duc) | (MapClass::Cduc, MapClass::Cduc) => MapClass::Cduc,
        _ => MapClass::Duc,
    };
    Ok(CovariantMap::new(class, triple))
}

/// Partial action [Phi (x) id] on an invariant matrix, in triple form.
pub fn partial_action(m: &CovariantMap, t: &MatrixTriple) -> Result<MatrixTriple> {
    compose_triples(m.triple(), t)
}

/// Minimal Kraus set of the map: from the Hermitian eigendecomposition of
/// the Choi matrix when it is self-adjoint (signs folded into the left
/// factors), otherwise from a full-rank factorization via SVD.
pub fn kraus_extract(m: &CovariantMap, tol: &Tolerance) -> Result<KrausSet> {
    let j = choi(m);
    let set = kraus_from_choi(&j, tol)?;
    debug_assert_eq!(set.len(), rank_of(m.triple(), m.class().invariant_class(), tol));
    Ok(set)
}

/// Full-rank Kraus factorization of an arbitrary bipartite matrix.
pub fn kraus_from_choi(x: &BipartiteMatrix, tol: &Tolerance) -> Result<KrausSet> {
    let d = x.local_dim();
    let jm = x.matrix();
    let scale = jm.max_abs();
    if scale == 0.0 {
        return Ok(KrausSet { left: vec![], right: vec![] });
    }
    if jm.hermiticity_defect() <= tol.scaled(scale) {
        let (vals, vecs) = linalg::hermitian_eigen(jm)?;
        let vmax = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut left = vec![];
        let mut right = vec![];
        for (k, &lam) in vals.iter().enumerate() {
            if lam.abs() <= tol.scaled(vmax) {
                continue;
            }
            let root = lam.abs().sqrt();
            let sign = if lam >= 0.0 { 1.0 } else { -1.0 };
            let p = unvec(&vecs, k, d, Complex64::new(sign * root, 0.0));
            let q = unvec(&vecs, k, d, Complex64::new(root, 0.0));
            left.push(p);
            right.push(q);
        }
        let set = KrausSet { left, right };
        if kraus_choi_residual(&set, x) <= tol.scaled(scale) {
            return Ok(set);
        }
        // fall through to the SVD factorization when the eigenvector basis
        // was not accurate enough to reproduce the Choi matrix
    }
    let (u, s, v) = linalg::svd_full(jm)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut left = vec![];
    let mut right = vec![];
    for (k, &sv) in s.iter().enumerate() {
        if sv <= tol.scaled(smax) {
            continue;
        }
        let root = Complex64::new(sv.sqrt(), 0.0);
        left.push(unvec(&u, k, d, root));
        right.push(unvec(&v, k, d, root));
    }
    Ok(KrausSet { left, right })
}

/// Reshapes column k of a d^2 x * matrix of stacked vectors into d x d
/// (row-major), scaled.
fn unvec(cols: &ComplexMatrix, k: usize, d: usize, scale: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| cols.get(i * d + j, k) * scale)
}

fn kraus_choi_residual(set: &KrausSet, x: &BipartiteMatrix) -> f64 {
    let d = x.local_dim();
    let mut rec = BipartiteMatrix::zeros(d);
    for (p, q) in set.left.iter().zip(set.right.iter()) {
        for i1 in 0..d {
            for i2 in 0..d {
                for j1 in 0..d {
                    for j2 in 0..d {
                        let v = rec.get(i1, i2, j1, j2)
                            + p.get(i1, i2) * q.get(j1, j2).conj();
                        rec.set(i1, i2, j1, j2, v);
                    }
                }
            }
        }
    }
    rec.max_abs_diff(x)
}

/// Checks whether a minimal Kraus set generates a covariant map of the
/// given class: conjugation by each group generator must map the left
/// (right) operators into their own span, and the two coefficient matrices
/// must be inverse-adjoint to each other so that the conjugated pair
/// represents the same map.
///
/// Generators: the d diagonal sign matrices I - 2 E_kk for DOC, and the d
/// single-leg diagonal root-of-unity matrices for DUC/CDUC.
pub fn covariance_span_test(
    k: &KrausSet,
    class: InvariantClass,
    tol: &Tolerance,
) -> Result<bool> {
    if k.left.len() != k.right.len() {
        return Err(Error::Dimension("left/right Kraus lists differ in length".into()));
    }
    if k.is_empty() {
        return Ok(true);
    }
    let d = k.left[0].rows();
    let r = k.len();
    let refs_left: Vec<&ComplexMatrix> = k.left.iter().collect();
    let refs_right: Vec<&ComplexMatrix> = k.right.iter().collect();
    // minimality: the operators must be linearly independent
    if linalg::stacked_rank(&refs_left, 1e-9) < r || linalg::stacked_rank(&refs_right, 1e-9) < r {
        return Err(Error::InvalidValue(
            "Kraus set is not minimal (linearly dependent operators)".into(),
        ));
    }
    let q = 2 * d + 1;
    for leg in 0..d {
        let u: Vec<Complex64> = (0..d)
            .map(|i| {
                if i == leg {
                    match class {
                        InvariantClass::Ldoi => Complex64::new(-1.0, 0.0),
                        _ => Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / q as f64),
                    }
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        let conjugate = |op: &ComplexMatrix| {
            ComplexMatrix::from_fn(d, d, |i, j| {
                let factor = match class {
                    // O P O (DOC) and same-leg U P U (DUC; equivalent over
                    // the group to the U P U / U* Q U* pairing)
                    InvariantClass::Ldoi | InvariantClass::Ldui => u[i] * u[j],
                    // U* P U
                    InvariantClass::Cldui => u[i].conj() * u[j],
                };
                factor * op.get(i, j)
            })
        };
        let mut coeff_left: Vec<Vec<Complex64>> = Vec::with_capacity(r);
        let mut coeff_right: Vec<Vec<Complex64>> = Vec::with_capacity(r);
        for (list, refs, coeffs) in [
            (&k.left, &refs_left, &mut coeff_left),
            (&k.right, &refs_right, &mut coeff_right),
        ] {
            for op in list.iter() {
                let moved = conjugate(op);
                let (c, residual) = linalg::span_solve(refs, &moved)?;
                let scale = moved.max_abs() * (d as f64);
                if residual > tol.scaled(scale).max(1e-8 * scale.max(1.0)) {
                    return Ok(false);
                }
                coeffs.push(c);
            }
        }
        // the conjugated pair must represent the same map: the right-side
        // coefficient matrix equals the inverse adjoint of the left one
        let defect = linalg::inverse_pair_defect(&coeff_right, &coeff_left);
        let scale = coeff_left
            .iter()
            .flatten()
            .chain(coeff_right.iter().flatten())
            .map(|z| z.norm())
            .fold(1.0, f64::max);
        if defect > tol.scaled(scale * scale * r as f64).max(1e-8 * scale * scale) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dense application of the map through its Choi matrix; used as an oracle
/// against [`apply`] in the tests and kept available for callers that have
/// only the Choi matrix.
pub fn apply_via_choi(x: &BipartiteMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = x.local_dim();
    if z.require_square()? != d {
        return Err(Error::Dimension("input dimension mismatch".into()));
    }
    // Phi(Z)_{i1 j1} = sum_{k, l} Z_{k l} J((i1, k), (j1, l))
    Ok(ComplexMatrix::from_fn(d, d, |i1, j1| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..d {
            for l in 0..d {
                acc += z.get(k, l) * x.get(i1, k, j1, l);
            }
        }
        acc
    }))
}

/// Tightest covariance class of a triple (DUC before CDUC before DOC).
pub fn classify_triple(t: &MatrixTriple, tol: &Tolerance) -> MapClass {
    if t.is_ldui_type(tol) {
        MapClass::Duc
    } else if t.is_cldui_type(tol) {
        MapClass::Cduc
    } else {
        MapClass::from_invariant(InvariantClass::Ldoi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::verify_tcp_witness;
    use crate::ldoi::random_triple;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn identity_map(d: usize) -> CovariantMap {
        CovariantMap::new(
            MapClass::Cduc,
            MatrixTriple::from_cldui_pair(ComplexMatrix::identity(d), ComplexMatrix::ones(d, d))
                .unwrap(),
        )
    }

    fn transposition_map(d: usize) -> CovariantMap {
        CovariantMap::new(
            MapClass::Duc,
            MatrixTriple::from_ldui_pair(ComplexMatrix::identity(d), ComplexMatrix::ones(d, d))
                .unwrap(),
        )
    }

    fn random_z(d: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(d, d, |_, _| {
            c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        })
    }

    #[test]
    fn apply_identity_transposition_depolarizing() {
        let d = 3;
        let z = random_z(d, 1);
        assert!(apply(&identity_map(d), &z).unwrap().max_abs_diff(&z) < 1e-14);
        assert!(
            apply(&transposition_map(d), &z)
                .unwrap()
                .max_abs_diff(&z.transpose())
                < 1e-14
        );
        let dep = CovariantMap::new(
            MapClass::Doc,
            MatrixTriple::new(
                ComplexMatrix::ones(d, d),
                ComplexMatrix::identity(d),
                ComplexMatrix::identity(d),
            )
            .unwrap(),
        );
        let out = apply(&dep, &z).unwrap();
        let expected = ComplexMatrix::identity(d).scale(z.trace());
        assert!(out.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn apply_matches_choi_contraction() {
        for seed in 0..8 {
            let d = 2 + (seed % 3) as usize;
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 300 + seed));
            let z = random_z(d, 400 + seed);
            let direct = apply(&m, &z).unwrap();
            let via_choi = apply_via_choi(&choi(&m), &z).unwrap();
            assert!(direct.max_abs_diff(&via_choi) < 1e-12);
        }
    }

    #[test]
    fn choi_round_trip_and_basis_formula() {
        let d = 3;
        // identity map Choi is the unnormalized maximally entangled projector
        let j = choi(&identity_map(d));
        assert!(j.max_abs_diff(&MaxEntangled { d }.matrix()) < 1e-14);

        for seed in 0..5 {
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 500 + seed));
            let j = choi(&m);
            // basis-application oracle: J = sum_ab Phi(E_ab) (x) E_ab
            let mut oracle = BipartiteMatrix::zeros(d);
            for a in 0..d {
                for b in 0..d {
                    let mut e = ComplexMatrix::zeros(d, d);
                    e.set(a, b, c(1.0, 0.0));
                    let img = apply(&m, &e).unwrap();
                    for i1 in 0..d {
                        for j1 in 0..d {
                            let v = oracle.get(i1, a, j1, b) + img.get(i1, j1);
                            oracle.set(i1, a, j1, b, v);
                        }
                    }
                }
            }
            assert!(j.max_abs_diff(&oracle) < 1e-13);

            let back = from_choi(&j, &tol()).unwrap();
            assert_eq!(back.class(), MapClass::Doc);
            assert!(back.triple().max_abs_diff(m.triple()) < 1e-13);
        }
    }

    #[test]
    fn from_choi_rejects_non_invariant_and_tags_tightest() {
        let mut x = BipartiteMatrix::zeros(2);
        x.set(0, 0, 0, 1, c(1.0, 0.0));
        assert!(from_choi(&x, &tol()).is_err());

        let duc = choi(&transposition_map(3));
        assert_eq!(from_choi(&duc, &tol()).unwrap().class(), MapClass::Duc);
        let cduc = choi(&identity_map(3));
        assert_eq!(from_choi(&cduc, &tol()).unwrap().class(), MapClass::Cduc);
    }

    #[test]
    fn properties_of_named_maps() {
        let d = 3;
        // Schur multiplier with a correlation matrix is a channel
        let mut s = ComplexMatrix::identity(d);
        s.set(0, 1, c(0.5, 0.25));
        s.set(1, 0, c(0.5, -0.25));
        let schur = CovariantMap::new(
            MapClass::Cduc,
            MatrixTriple::from_cldui_pair(s.diagonal_matrix().unwrap(), s).unwrap(),
        );
        let props = map_properties(&schur, &tol());
        assert!(props.cp && props.trace_preserving && props.channel);

        // transposition: positive but not completely positive
        let props = map_properties(&transposition_map(d), &tol());
        assert!(!props.cp && props.ccp);
        assert!(props.unital && props.trace_preserving);

        // classical map with a column-stochastic A
        let a = ComplexMatrix::from_real(
            2,
            2,
            &[0.25, 0.5, 0.75, 0.5],
        )
        .unwrap();
        let classical = CovariantMap::new(
            MapClass::Duc,
            MatrixTriple::diagonal(a).unwrap(),
        );
        let props = map_properties(&classical, &tol());
        assert!(props.channel);
        assert!(matches!(props.eb, EbStatus::Certified { .. }));
    }

    #[test]
    fn adjoint_matches_trace_pairing() {
        let d = 3;
        for seed in 0..5 {
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 600 + seed));
            let adj = adjoint(&m);
            assert!(adjoint(&adj).triple().max_abs_diff(m.triple()) < 1e-14);
            let y = random_z(d, 700 + seed);
            let z = random_z(d, 800 + seed);
            // Tr[adj(m)(Y) Z] = Tr[Y m(Z)]
            let lhs = apply(&adj, &y).unwrap().matmul(&z).unwrap().trace();
            let rhs = y.matmul(&apply(&m, &z).unwrap()).unwrap().trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_hilbert_schmidt_on_hermiticity_preserving_maps() {
        // self-adjoint triples come from witnesses
        for seed in 0..5 {
            let t = crate::cones::random_witness(3, 2, 650 + seed).triple();
            let m = CovariantMap::new(MapClass::Doc, t);
            let adj = adjoint(&m);
            let y = random_z(3, 750 + seed);
            let z = random_z(3, 850 + seed);
            // <adj(m)(Y), Z> = <Y, m(Z)>
            let lhs = apply(&adj, &y)
                .unwrap()
                .adjoint()
                .matmul(&z)
                .unwrap()
                .trace();
            let rhs = y.adjoint().matmul(&apply(&m, &z).unwrap()).unwrap().trace();
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }

    #[test]
    fn transpose_composition_of_identity_is_transposition() {
        let d = 3;
        let pre = transpose_compose(&identity_map(d), TransposeSide::Pre);
        assert_eq!(pre.class(), MapClass::Duc);
        assert!(pre.triple().max_abs_diff(transposition_map(d).triple()) < 1e-14);
    }

    #[test]
    fn pairing_matches_dense_trace() {
        for seed in 0..6 {
            let d = 3;
            let t1 = random_triple(d, 900 + seed);
            let t2 = random_triple(d, 950 + seed);
            let lhs = pairing(&t1, &t2).unwrap();
            let x1 = build(InvariantClass::Ldoi, &t1);
            let x2 = build(InvariantClass::Ldoi, &t2);
            let rhs = x1.matrix().matmul(x2.matrix()).unwrap().trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn pairing_self_is_frobenius_norm_squared() {
        let w = crate::cones::random_witness(3, 2, 5);
        let t = w.triple(); // self-adjoint by construction
        let p = pairing(&t, &t).unwrap();
        let x = build(InvariantClass::Ldoi, &t);
        let fro = crate::matcore::matrix_norm(x.matrix(), crate::matcore::NormKind::Frobenius);
        assert!((p.re - fro * fro).abs() < 1e-10);
        assert!(p.im.abs() < 1e-12);
    }

    #[test]
    fn positivity_screens() {
        let d = 3;
        // identity map passes
        assert!(positivity_necessary(identity_map(d).triple(), &tol()).passed());
        // large off-diagonal B fails
        let mut b = ComplexMatrix::identity(d);
        b.set(0, 1, c(10.0, 0.0));
        b.set(1, 0, c(10.0, 0.0));
        let t = MatrixTriple::from_cldui_pair(ComplexMatrix::identity(d), b).unwrap();
        let report = positivity_necessary(&t, &tol());
        assert!(!report.passed());
        // and the falsifier finds a counterexample for it
        match positivity_falsifier(&t, 2000, 11, &tol()) {
            FalsifierOutcome::Counterexample { value, .. } => assert!(value < 0.0),
            FalsifierOutcome::NoneFound => panic!("expected a counterexample"),
        }
        // transposition is positive: nothing found
        assert_eq!(
            positivity_falsifier(transposition_map(d).triple(), 2000, 13, &tol()),
            FalsifierOutcome::NoneFound
        );
    }

    #[test]
    fn decomposable_sufficient_cases() {
        // completely depolarizing map is certified
        let d = 3;
        let dep = MatrixTriple::new(
            ComplexMatrix::ones(d, d),
            ComplexMatrix::identity(d),
            ComplexMatrix::identity(d),
        )
        .unwrap();
        assert!(decomposable_sufficient(&dep, &tol()).is_certified());

        // d = 2: sufficient condition coincides with the necessary one
        let t = random_symmetric_positive_candidate(2, 77);
        let nec = positivity_necessary(&t, &tol()).passed();
        let suf = decomposable_sufficient(&t, &tol()).is_certified();
        assert_eq!(nec, suf);
    }

    fn random_symmetric_positive_candidate(d: usize, seed: u64) -> MatrixTriple {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ComplexMatrix::from_fn(d, d, |_, _| c(rng.gen::<f64>(), 0.0));
        let mut b = ComplexMatrix::from_fn(d, d, |_, _| c(rng.gen::<f64>() - 0.5, 0.0));
        let mut cm = ComplexMatrix::from_fn(d, d, |_, _| c(rng.gen::<f64>() - 0.5, 0.0));
        let b_sym = b.hermitize().unwrap();
        let c_sym = cm.hermitize().unwrap();
        b = b_sym;
        cm = c_sym;
        for i in 0..d {
            b.set(i, i, a.get(i, i));
            cm.set(i, i, a.get(i, i));
        }
        MatrixTriple::new(a, b, cm).unwrap()
    }

    #[test]
    fn composition_identities() {
        let d = 3;
        for seed in 0..5 {
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 1100 + seed));
            let composed = compose(&identity_map(d), &m).unwrap();
            assert!(composed.triple().max_abs_diff(m.triple()) < 1e-13);
        }
        let tt = compose(&transposition_map(d), &transposition_map(d)).unwrap();
        assert_eq!(tt.class(), MapClass::Cduc);
        assert!(tt.triple().max_abs_diff(identity_map(d).triple()) < 1e-14);
    }

    #[test]
    fn composition_matches_dense_map_composition() {
        for seed in 0..6 {
            let d = 2 + (seed % 3) as usize;
            let m1 = CovariantMap::new(MapClass::Doc, random_triple(d, 1200 + seed));
            let m2 = CovariantMap::new(MapClass::Doc, random_triple(d, 1300 + seed));
            let composed = compose(&m1, &m2).unwrap();
            let z = random_z(d, 1400 + seed);
            let lhs = apply(&composed, &z).unwrap();
            let rhs = apply(&m1, &apply(&m2, &z).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-11);
        }
    }

    #[test]
    fn composition_class_table() {
        let d = 3;
        let duc = |seed| {
            CovariantMap::new(
                MapClass::Duc,
                random_triple(d, seed),
            )
        };
        let cduc = |seed| {
            CovariantMap::new(
                MapClass::Cduc,
                random_triple(d, seed),
            )
        };
        let t = tol();
        let cases = [
            (compose(&duc(1), &duc(2)).unwrap(), MapClass::Cduc),
            (compose(&cduc(3), &cduc(4)).unwrap(), MapClass::Cduc),
            (compose(&duc(5), &cduc(6)).unwrap(), MapClass::Duc),
            (compose(&cduc(7), &duc(8)).unwrap(), MapClass::Duc),
        ];
        for (m, expected) in cases {
            assert_eq!(m.class(), expected);
            // the composed triple really has the claimed structure
            assert_eq!(classify_triple(m.triple(), &t), expected);
        }
    }

    #[test]
    fn pair_composition_transpose_relation() {
        for seed in 0..5 {
            let w1 = crate::cones::random_witness(3, 2, 40 + seed);
            let w2 = crate::cones::random_witness(3, 2, 60 + seed);
            let p1 = w1.pair();
            let p2 = w2.pair();
            let lhs = compose_pairs_1(&p1, &p2).unwrap();
            let p2t = MatrixPair::new(p2.a().clone(), p2.b().transpose()).unwrap();
            let rhs = compose_pairs_2(&p1, &p2t).unwrap();
            assert!(lhs.a().max_abs_diff(rhs.a()) < 1e-14);
            assert!(lhs.b().max_abs_diff(rhs.b()) < 1e-14);
        }
    }

    #[test]
    fn partial_action_is_choi_consistent() {
        let d = 3;
        for seed in 0..5 {
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 1500 + seed));
            let m2 = CovariantMap::new(MapClass::Doc, random_triple(d, 1600 + seed));
            let t2 = m2.triple().clone();
            let via_action = partial_action(&m, &t2).unwrap();
            let via_compose = compose(&m, &m2).unwrap();
            assert!(via_action.max_abs_diff(via_compose.triple()) < 1e-12);
        }
    }

    #[test]
    fn partial_action_matches_dense_kronecker_application() {
        for seed in 0..4 {
            let d = 3;
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 1700 + seed));
            let t = random_triple(d, 1800 + seed);
            let out = partial_action(&m, &t).unwrap();
            let x = build(InvariantClass::Ldoi, &t);
            // dense (Phi (x) id)(X)
            let mut dense = BipartiteMatrix::zeros(d);
            for a in 0..d {
                for b in 0..d {
                    let mut e = ComplexMatrix::zeros(d, d);
                    e.set(a, b, c(1.0, 0.0));
                    let img = apply(&m, &e).unwrap();
                    for i1 in 0..d {
                        for j1 in 0..d {
                            for i2 in 0..d {
                                for j2 in 0..d {
                                    let v = dense.get(i1, i2, j1, j2)
                                        + img.get(i1, j1) * x.get(a, i2, b, j2);
                                    dense.set(i1, i2, j1, j2, v);
                                }
                            }
                        }
                    }
                }
            }
            let expected = build(InvariantClass::Ldoi, &out);
            assert!(dense.max_abs_diff(&expected) < 1e-11);
        }
    }

    #[test]
    fn kraus_identity_and_dephasing() {
        let d = 3;
        let set = kraus_extract(&identity_map(d), &tol()).unwrap();
        assert_eq!(set.len(), 1);
        let z = random_z(d, 7);
        assert!(set.apply(&z).unwrap().max_abs_diff(&z) < 1e-12);

        // completely dephasing map: r = d
        let dephasing = CovariantMap::new(
            MapClass::Cduc,
            MatrixTriple::diagonal(ComplexMatrix::identity(d)).unwrap(),
        );
        let set = kraus_extract(&dephasing, &tol()).unwrap();
        assert_eq!(set.len(), d);
        let out = set.apply(&z).unwrap();
        assert!(out.max_abs_diff(&z.diagonal_matrix().unwrap()) < 1e-12);
    }

    #[test]
    fn kraus_reconstruction_and_rank() {
        for seed in 0..6 {
            let d = 2 + (seed % 3) as usize;
            let m = CovariantMap::new(MapClass::Doc, random_triple(d, 1900 + seed));
            let set = kraus_extract(&m, &tol()).unwrap();
            assert_eq!(set.len(), rank_of(m.triple(), InvariantClass::Ldoi, &tol()));
            for zseed in 0..3 {
                let z = random_z(d, 2000 + zseed);
                let direct = apply(&m, &z).unwrap();
                let via_kraus = set.apply(&z).unwrap();
                assert!(direct.max_abs_diff(&via_kraus) < 1e-9);
            }
        }
    }

    #[test]
    fn covariance_span_accepts_covariant_and_rejects_generic() {
        let d = 3;
        for (class, invariant) in [
            (MapClass::Doc, InvariantClass::Ldoi),
            (MapClass::Duc, InvariantClass::Ldui),
            (MapClass::Cduc, InvariantClass::Cldui),
        ] {
            let m = CovariantMap::new(class, random_triple(d, 2100 + class as u64));
            let set = kraus_extract(&m, &tol()).unwrap();
            assert!(covariance_span_test(&set, invariant, &tol()).unwrap());
        }

        // a generic non-covariant Choi matrix fails
        let mut rng = ChaCha8Rng::seed_from_u64(2200);
        let x = BipartiteMatrix::from_matrix(ComplexMatrix::from_fn(d * d, d * d, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        }))
        .unwrap();
        let set = kraus_from_choi(&x, &tol()).unwrap();
        assert!(!covariance_span_test(&set, InvariantClass::Ldoi, &tol()).unwrap());

        // a single diagonal Kraus pair commutes with sign matrices and with
        // the conjugate-unitary pattern; its Choi matrix is supported on
        // |ii><jj|, so it is CDUC and DOC but not DUC
        let diag_set = KrausSet {
            left: vec![ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(-0.5, 0.5)])],
            right: vec![ComplexMatrix::from_diagonal(&[c(0.5, 0.0), c(1.0, -1.0), c(2.0, 0.0)])],
        };
        assert!(covariance_span_test(&diag_set, InvariantClass::Ldoi, &tol()).unwrap());
        assert!(covariance_span_test(&diag_set, InvariantClass::Cldui, &tol()).unwrap());
        assert!(!covariance_span_test(&diag_set, InvariantClass::Ldui, &tol()).unwrap());
    }

    #[test]
    fn covariance_span_rejects_non_minimal_sets() {
        let d = 2;
        let p = ComplexMatrix::identity(d);
        let set = KrausSet {
            left: vec![p.clone(), p.clone()],
            right: vec![p.clone(), p],
        };
        assert!(covariance_span_test(&set, InvariantClass::Ldoi, &tol()).is_err());
    }

    #[test]
    fn eb_certificate_witness_round_trip() {
        // an entanglement-breaking map built from a random witness
        let w = crate::cones::random_witness(3, 4, 33);
        let t = w.triple();
        match tcp_certify(&t, &tol()) {
            TcpAssessment::Refuted { test, .. } => {
                panic!("witness triple wrongly refuted by {test}")
            }
            TcpAssessment::Certified { witness: Some(found), .. } => {
                assert!(verify_tcp_witness(&t, &found, &tol()));
            }
            _ => {} // inconclusive or certificate-only is acceptable here
        }
    }
}
