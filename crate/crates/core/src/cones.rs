//! Positivity, PPT, realignment, and separability certificates for
//! invariant matrices in triple form.
//!
//! Membership in the triplewise-completely-positive cone (equivalently,
//! separability of the invariant matrix) is not decidable in general, so
//! this module only ever certifies: a verified factorization witness or a
//! sufficient criterion proves membership, a violated necessary condition
//! refutes it, and everything else stays inconclusive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ldoi::{InvariantClass, MatrixPair, MatrixTriple};
use crate::matcore::{
    comparison_matrix, is_diagonally_dominant, is_ewp, is_psd, matrix_norm, min_eigenvalue,
    phase_of, ComplexMatrix, NormKind, Tolerance,
};
use crate::{Error, Result};

/// Factor pair (V, W) of width d' certifying that a triple is TCP:
/// A = (V . conj V)(W . conj W)*, B = (V . W)(V . W)*, C = (V . conj W)(V . conj W)*,
/// where . is the Hadamard product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcpWitness {
    #[serde(rename = "V")]
    pub v: ComplexMatrix,
    #[serde(rename = "W")]
    pub w: ComplexMatrix,
}

impl TcpWitness {
    pub fn new(v: ComplexMatrix, w: ComplexMatrix) -> Result<Self> {
        if v.rows() != w.rows() || v.cols() != w.cols() {
            return Err(Error::Dimension("witness factors must share shape".into()));
        }
        if v.cols() == 0 {
            return Err(Error::InvalidParameter("witness width must be >= 1".into()));
        }
        Ok(TcpWitness { v, w })
    }

    /// Width-1 witness from a column pair.
    pub fn from_vectors(v: &[Complex64], w: &[Complex64]) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::Dimension("vectors must share length".into()));
        }
        let col = |s: &[Complex64]| {
            ComplexMatrix::from_fn(s.len(), 1, |i, _| s[i])
        };
        TcpWitness::new(col(v), col(w))
    }

    pub fn dim(&self) -> usize {
        self.v.rows()
    }

    pub fn width(&self) -> usize {
        self.v.cols()
    }

    /// The triple generated by this witness.
    pub fn triple(&self) -> MatrixTriple {
        let vvbar = self.v.hadamard(&self.v.conjugate()).unwrap();
        let wwbar = self.w.hadamard(&self.w.conjugate()).unwrap();
        let vw = self.v.hadamard(&self.w).unwrap();
        let vwbar = self.v.hadamard(&self.w.conjugate()).unwrap();
        let a = vvbar.matmul(&wwbar.adjoint()).unwrap();
        let b = vw.matmul(&vw.adjoint()).unwrap();
        let c = vwbar.matmul(&vwbar.adjoint()).unwrap();
        MatrixTriple::new(a, b, c).expect("witness triples have equal diagonals")
    }

    /// The pair (A, B) generated by this witness.
    pub fn pair(&self) -> MatrixPair {
        let t = self.triple();
        let (a, b, _) = t.into_parts();
        MatrixPair::new(a, b).expect("witness pairs have equal diagonals")
    }

    /// Conic scaling: returns a witness whose triple is `factor` times this
    /// witness's triple (factor >= 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if factor < 0.0 || !factor.is_finite() {
            return Err(Error::InvalidParameter(
                "witness scaling factor must be a non-negative real".into(),
            ));
        }
        let s = Complex64::new(factor.powf(0.25), 0.0);
        TcpWitness::new(self.v.scale(s), self.w.scale(s))
    }

    /// Column concatenation: the triple of the result is the sum of the
    /// triples of the two witnesses.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("witness dimensions differ".into()));
        }
        let join = |m1: &ComplexMatrix, m2: &ComplexMatrix| {
            ComplexMatrix::from_fn(m1.rows(), m1.cols() + m2.cols(), |i, j| {
                if j < m1.cols() {
                    m1.get(i, j)
                } else {
                    m2.get(i, j - m1.cols())
                }
            })
        };
        TcpWitness::new(join(&self.v, &other.v), join(&self.w, &other.w))
    }

    /// Restriction of the witness to a row subset; certifies the
    /// corresponding principal subtriple.
    pub fn restrict_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("index set must be non-empty".into()));
        }
        let take = |m: &ComplexMatrix| {
            ComplexMatrix::from_fn(indices.len(), m.cols(), |i, j| m.get(indices[i], j))
        };
        TcpWitness::new(take(&self.v), take(&self.w))
    }

    /// Replaces the B slot of the generated triple by its diagonal while
    /// keeping A and C exact, by averaging (U v, U w) over a cyclic group
    /// of diagonal root-of-unity matrices. Width grows by a factor 2d+1.
    pub fn dephased_b(&self) -> Self {
        self.dephase(false)
    }

    /// Replaces the C slot of the generated triple by its diagonal while
    /// keeping A and B exact, by averaging (U v, conj(U) w). Width grows by
    /// a factor 2d+1.
    pub fn dephased_c(&self) -> Self {
        self.dephase(true)
    }

    fn dephase(&self, conjugate_w_leg: bool) -> Self {
        let d = self.dim();
        let q = 2 * d + 1;
        let weight = (1.0 / q as f64).powf(0.25);
        let mut vs = Vec::with_capacity(q);
        let mut ws = Vec::with_capacity(q);
        for m in 0..q {
            let mut v = ComplexMatrix::zeros(d, self.width());
            let mut w = ComplexMatrix::zeros(d, self.width());
            for i in 0..d {
                let theta = 2.0 * std::f64::consts::PI * (m * (i + 1)) as f64 / q as f64;
                let u = Complex64::from_polar(weight, theta);
                let uw = if conjugate_w_leg { u.conj() } else { u };
                for k in 0..self.width() {
                    v.set(i, k, u * self.v.get(i, k));
                    w.set(i, k, uw * self.w.get(i, k));
                }
            }
            vs.push(v);
            ws.push(w);
        }
        let mut out = TcpWitness::new(vs[0].clone(), ws[0].clone()).unwrap();
        for m in 1..q {
            out = out
                .concat(&TcpWitness::new(vs[m].clone(), ws[m].clone()).unwrap())
                .unwrap();
        }
        out
    }
}

/// Outcome of a single necessary-condition check with its signed margin
/// (non-negative means satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub verdict: CheckVerdict,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    NotApplicable,
}

/// A battery of named checks with signed margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub items: Vec<CheckItem>,
}

impl CertificateReport {
    fn push(&mut self, name: &str, margin: f64, threshold: f64) {
        debug_assert!(margin.is_finite(), "margin for {name} must be finite");
        self.items.push(CheckItem {
            name: name.to_string(),
            verdict: if margin >= -threshold {
                CheckVerdict::Pass
            } else {
                CheckVerdict::Fail
            },
            margin,
        });
    }

    fn push_na(&mut self, name: &str) {
        self.items.push(CheckItem {
            name: name.to_string(),
            verdict: CheckVerdict::NotApplicable,
            margin: 0.0,
        });
    }

    pub fn passed(&self) -> bool {
        self.items
            .iter()
            .all(|i| i.verdict != CheckVerdict::Fail)
    }

    pub fn first_failure(&self) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.verdict == CheckVerdict::Fail)
    }

    pub fn margin(&self, name: &str) -> Option<f64> {
        self.items.iter().find(|i| i.name == name).map(|i| i.margin)
    }

    fn merge(mut self, other: CertificateReport) -> CertificateReport {
        for item in other.items {
            if !self.items.iter().any(|i| i.name == item.name) {
                self.items.push(item);
            }
        }
        self
    }
}

fn a_entrywise_items(report: &mut CertificateReport, a: &ComplexMatrix, tol: &Tolerance) {
    let scale = a.max_abs();
    let max_im = a.entries().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    report.push("A_real", -max_im, tol.scaled(scale));
    let min_re = a.entries().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    report.push("A_entrywise_nonneg", min_re, tol.scaled(scale));
}

/// Margin for "M is PSD": the minimum of the smallest eigenvalue of the
/// Hermitian part and the negated hermiticity defect.
fn psd_margin(m: &ComplexMatrix) -> f64 {
    let defect = m.hermiticity_defect();
    let min_eig = min_eigenvalue(m).unwrap_or(f64::NEG_INFINITY).max(-1e300);
    min_eig.min(-defect)
}

fn product_margin(a: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    let d = a.rows();
    let mut worst = f64::INFINITY;
    for i in 0..d {
        for j in 0..d {
            let lhs = a.get(i, j).re * a.get(j, i).re;
            worst = worst.min(lhs - x.get(i, j).norm_sqr());
        }
    }
    worst
}

/// PSD test in triple form: the invariant matrix is PSD iff A is entrywise
/// non-negative, B is PSD, C is self-adjoint, and A_ij A_ji >= |C_ij|^2.
pub fn psd_test(t: &MatrixTriple, tol: &Tolerance) -> CertificateReport {
    let mut report = CertificateReport { items: vec![] };
    a_entrywise_items(&mut report, t.a(), tol);
    report.push("B_psd", psd_margin(t.b()), tol.scaled(t.b().max_abs()));
    report.push(
        "C_self_adjoint",
        -t.c().hermiticity_defect(),
        tol.scaled(t.c().max_abs()),
    );
    let scale2 = t.a().max_abs().powi(2).max(t.c().max_abs().powi(2));
    report.push("A_product_C", product_margin(t.a(), t.c()), tol.scaled(scale2));
    report
}

/// PPT test: PSD plus the partial-transpose conditions (C PSD, B
/// self-adjoint, A_ij A_ji >= |B_ij|^2).
pub fn ppt_test(t: &MatrixTriple, tol: &Tolerance) -> CertificateReport {
    let mut report = psd_test(t, tol);
    report.push("C_psd", psd_margin(t.c()), tol.scaled(t.c().max_abs()));
    report.push(
        "B_self_adjoint",
        -t.b().hermiticity_defect(),
        tol.scaled(t.b().max_abs()),
    );
    let scale2 = t.a().max_abs().powi(2).max(t.b().max_abs().powi(2));
    report.push("A_product_B", product_margin(t.a(), t.b()), tol.scaled(scale2));
    report
}

/// Realignment criterion in triple form:
/// `|A|_1 - |A|_Tr >= 2 sum_{i<j} max(|B_ij|, |C_ij|)`.
pub fn realignment_test(t: &MatrixTriple, tol: &Tolerance) -> CertificateReport {
    let mut report = CertificateReport { items: vec![] };
    let gap = matrix_norm(t.a(), NormKind::EntrywiseOne) - matrix_norm(t.a(), NormKind::Trace);
    let d = t.dim();
    let mut rhs = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            rhs += t.b().get(i, j).norm().max(t.c().get(i, j).norm());
        }
    }
    let scale = matrix_norm(t.a(), NormKind::EntrywiseOne).max(rhs);
    report.push("realignment", gap - 2.0 * rhs, tol.scaled(scale));
    report
}

/// Quantum-state test: PSD and unit entry sum of A.
pub fn quantum_state_test(t: &MatrixTriple, tol: &Tolerance) -> bool {
    psd_test(t, tol).passed() && (t.a().entry_sum() - Complex64::new(1.0, 0.0)).norm() <= tol.scaled(1.0)
}

/// Runs the finitely-checkable necessary conditions for TCP membership:
/// entrywise/PSD structure, the two product inequalities, the two
/// norm-gap inequalities, and the realignment inequality. Any failure
/// certifies the triple is not TCP.
pub fn tcp_necessary_battery(t: &MatrixTriple, tol: &Tolerance) -> CertificateReport {
    let mut report = CertificateReport { items: vec![] };
    report.push_na("pcp_pairs");
    a_entrywise_items(&mut report, t.a(), tol);
    report.push("B_psd", psd_margin(t.b()), tol.scaled(t.b().max_abs()));
    report.push("C_psd", psd_margin(t.c()), tol.scaled(t.c().max_abs()));
    let scale2 = t.a().max_abs().powi(2).max(t.b().max_abs().powi(2)).max(t.c().max_abs().powi(2));
    report.push("A_product_B", product_margin(t.a(), t.b()), tol.scaled(scale2));
    report.push("A_product_C", product_margin(t.a(), t.c()), tol.scaled(scale2));
    let gap_a = matrix_norm(t.a(), NormKind::EntrywiseOne) - matrix_norm(t.a(), NormKind::Trace);
    let gap_b = matrix_norm(t.b(), NormKind::EntrywiseOne) - matrix_norm(t.b(), NormKind::Trace);
    let gap_c = matrix_norm(t.c(), NormKind::EntrywiseOne) - matrix_norm(t.c(), NormKind::Trace);
    let norm_scale = matrix_norm(t.a(), NormKind::EntrywiseOne)
        .max(matrix_norm(t.b(), NormKind::EntrywiseOne))
        .max(matrix_norm(t.c(), NormKind::EntrywiseOne));
    report.push("norm_gap_B", gap_a - gap_b, tol.scaled(norm_scale));
    report.push("norm_gap_C", gap_a - gap_c, tol.scaled(norm_scale));
    report.merge(realignment_test(t, tol))
}

/// Verifies the three TCP factorization equations entrywise.
pub fn verify_tcp_witness(t: &MatrixTriple, w: &TcpWitness, tol: &Tolerance) -> bool {
    if w.dim() != t.dim() {
        return false;
    }
    let generated = w.triple();
    let scale = t.max_abs().max(generated.max_abs());
    t.max_abs_diff(&generated) <= tol.scaled(scale)
}

/// Verifies the two PCP factorization equations entrywise.
pub fn verify_pcp_witness(p: &MatrixPair, w: &TcpWitness, tol: &Tolerance) -> bool {
    if w.dim() != p.dim() {
        return false;
    }
    let generated = w.pair();
    let scale = p
        .a()
        .max_abs()
        .max(p.b().max_abs())
        .max(generated.a().max_abs())
        .max(generated.b().max_abs());
    p.a().max_abs_diff(generated.a()) <= tol.scaled(scale)
        && p.b().max_abs_diff(generated.b()) <= tol.scaled(scale)
}

/// Outcome of a sufficient membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Sufficiency {
    Certified { reason: String },
    Inconclusive { reason: String },
}

impl Sufficiency {
    pub fn is_certified(&self) -> bool {
        matches!(self, Sufficiency::Certified { .. })
    }
}

/// Sufficient PCP test: under the PPT-type preconditions, diagonal
/// dominance of B, or positive semi-definiteness of its comparison matrix,
/// certifies the pair.
pub fn pcp_sufficient(p: &MatrixPair, tol: &Tolerance) -> Sufficiency {
    if !is_ewp(p.a(), tol) {
        return Sufficiency::Inconclusive {
            reason: "precondition failed: A is not entrywise non-negative".into(),
        };
    }
    match is_psd(p.b(), tol) {
        Ok(true) => {}
        _ => {
            return Sufficiency::Inconclusive {
                reason: "precondition failed: B is not PSD".into(),
            }
        }
    }
    let scale2 = p.a().max_abs().powi(2).max(p.b().max_abs().powi(2));
    if product_margin(p.a(), p.b()) < -tol.scaled(scale2) {
        return Sufficiency::Inconclusive {
            reason: "precondition failed: A_ij A_ji >= |B_ij|^2 is violated".into(),
        };
    }
    if is_diagonally_dominant(p.b(), tol).unwrap_or(false) {
        return Sufficiency::Certified {
            reason: "diagonal_dominance".into(),
        };
    }
    let cmp = comparison_matrix(p.b()).expect("B is square");
    if is_psd(&cmp, tol).unwrap_or(false) {
        return Sufficiency::Certified {
            reason: "comparison_matrix_psd".into(),
        };
    }
    Sufficiency::Inconclusive {
        reason: "neither diagonal dominance nor the comparison matrix certifies B".into(),
    }
}

/// Which partial-transpose-invariant triple the phase fix should target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasefixVariant {
    /// Produces ((A, B, B), (V', W')) with V' = V . phase(W), W' = |W|.
    B,
    /// Produces ((A, B, B^T), (V'', W'')) with V'' = |V|, W'' = W . phase(V).
    BTranspose,
}

/// Upgrades a PCP witness of (A, B) to a TCP witness of (A, B, B) or
/// (A, B, B^T) by absorbing phases into one factor.
pub fn tcp_from_pcp_phasefix(
    p: &MatrixPair,
    w: &TcpWitness,
    variant: PhasefixVariant,
    tol: &Tolerance,
) -> Result<(MatrixTriple, TcpWitness)> {
    if !verify_pcp_witness(p, w, tol) {
        return Err(Error::InvalidValue(
            "input witness does not certify the pair".into(),
        ));
    }
    let shape = (w.v.rows(), w.v.cols());
    let fixed = match variant {
        PhasefixVariant::B => {
            let v = ComplexMatrix::from_fn(shape.0, shape.1, |i, j| {
                w.v.get(i, j) * phase_of(w.w.get(i, j))
            });
            let wm = ComplexMatrix::from_fn(shape.0, shape.1, |i, j| {
                Complex64::new(w.w.get(i, j).norm(), 0.0)
            });
            TcpWitness::new(v, wm)?
        }
        PhasefixVariant::BTranspose => {
            let v = ComplexMatrix::from_fn(shape.0, shape.1, |i, j| {
                Complex64::new(w.v.get(i, j).norm(), 0.0)
            });
            let wm = ComplexMatrix::from_fn(shape.0, shape.1, |i, j| {
                w.w.get(i, j) * phase_of(w.v.get(i, j))
            });
            TcpWitness::new(v, wm)?
        }
    };
    let c = match variant {
        PhasefixVariant::B => p.b().clone(),
        PhasefixVariant::BTranspose => p.b().transpose(),
    };
    let triple = MatrixTriple::new(p.a().clone(), p.b().clone(), c)?;
    debug_assert!(verify_tcp_witness(&triple, &fixed, tol));
    Ok((triple, fixed))
}

/// Extremal TCP ray generated by a vector pair: the triple of the width-1
/// witness (v, w), which equals the invariant projection of
/// |v><v| (x) |w><w|.
pub fn extremal_tcp_ray(v: &[Complex64], w: &[Complex64]) -> Result<(MatrixTriple, TcpWitness)> {
    if v.iter().all(|z| z.norm() == 0.0) || w.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::InvalidParameter("ray vectors must be non-zero".into()));
    }
    let witness = TcpWitness::from_vectors(v, w)?;
    Ok((witness.triple(), witness))
}

/// PCP witness for a pair (J, B) with B a correlation matrix: factor
/// B = W W* by eigendecomposition (eigenvalues clamped at zero) and take V
/// all-ones of matching width.
pub fn a_equals_j_pcp(b: &ComplexMatrix, tol: &Tolerance) -> Result<(MatrixPair, TcpWitness)> {
    let d = b.require_square()?;
    let unit_diag = b
        .diagonal()
        .iter()
        .all(|z| (z - Complex64::new(1.0, 0.0)).norm() <= tol.scaled(1.0));
    if !unit_diag || !is_psd(b, tol)? {
        return Err(Error::InvalidValue(
            "B must be a correlation matrix (PSD with unit diagonal)".into(),
        ));
    }
    let (vals, vecs) = crate::linalg::hermitian_eigen(b)?;
    let vmax = vals.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..vals.len())
        .filter(|&k| vals[k] > tol.scaled(vmax))
        .collect();
    let r = kept.len().max(1);
    let mut w = ComplexMatrix::zeros(d, r);
    for (col, &k) in kept.iter().enumerate() {
        let s = vals[k].max(0.0).sqrt();
        for i in 0..d {
            w.set(i, col, vecs.get(i, k) * s);
        }
    }
    let v = ComplexMatrix::ones(d, r);
    let witness = TcpWitness::new(v, w)?;
    let pair = MatrixPair::new(ComplexMatrix::ones(d, d), b.clone())?;
    Ok((pair, witness))
}

/// TCP witness for (J, |b><b|, |c><c|) with unimodular b, c, via
/// v_i = sqrt(b_i c_i) (principal branch) and w_i = b_i / v_i.
pub fn a_equals_j_rank_one_tcp(
    b: &[Complex64],
    c: &[Complex64],
    tol: &Tolerance,
) -> Result<(MatrixTriple, TcpWitness)> {
    if b.len() != c.len() {
        return Err(Error::Dimension("vectors must share length".into()));
    }
    for z in b.iter().chain(c.iter()) {
        if (z.norm() - 1.0).abs() > tol.scaled(1.0) {
            return Err(Error::InvalidValue(
                "rank-one factors must have unimodular entries".into(),
            ));
        }
    }
    let d = b.len();
    let mut v = Vec::with_capacity(d);
    let mut w = Vec::with_capacity(d);
    for i in 0..d {
        let vi = (b[i] * c[i]).sqrt();
        v.push(vi);
        w.push(b[i] / vi);
    }
    let witness = TcpWitness::from_vectors(&v, &w)?;
    let triple = MatrixTriple::new(
        ComplexMatrix::ones(d, d),
        ComplexMatrix::outer(b, b),
        ComplexMatrix::outer(c, c),
    )?;
    Ok((triple, witness))
}

/// Euclidean-ball sufficiency: a PSD triple with
/// `sum A_ij^2 + sum_{i!=j} |B_ij|^2 + sum_{i!=j} |C_ij|^2 <= (sum A_ij)^2 / (d^2 - 1)`
/// is TCP.
pub fn gurvits_ball_test(t: &MatrixTriple, tol: &Tolerance) -> Sufficiency {
    if !psd_test(t, tol).passed() {
        return Sufficiency::Inconclusive {
            reason: "precondition failed: triple is not PSD".into(),
        };
    }
    let d = t.dim();
    if d * d <= 1 {
        return Sufficiency::Certified {
            reason: "gurvits_ball".into(),
        };
    }
    let mut lhs = 0.0;
    for i in 0..d {
        for j in 0..d {
            lhs += t.a().get(i, j).re.powi(2);
            if i != j {
                lhs += t.b().get(i, j).norm_sqr();
                lhs += t.c().get(i, j).norm_sqr();
            }
        }
    }
    let total = t.a().entry_sum().re;
    let rhs = total * total / (d * d - 1) as f64;
    if lhs <= rhs + tol.scaled(rhs.max(lhs)) {
        Sufficiency::Certified {
            reason: "gurvits_ball".into(),
        }
    } else {
        Sufficiency::Inconclusive {
            reason: format!("ball inequality violated by {}", lhs - rhs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalSide {
    Row,
    Col,
}

/// Partial-trace comparison sufficiency: if the shifted triple
/// `(d+1)(A,B,C) - (A#, A#, A#)` is PSD, where A# is the diagonal matrix of
/// row (or column) sums of A, the triple is TCP.
pub fn dplusone_test(t: &MatrixTriple, side: MarginalSide, tol: &Tolerance) -> Sufficiency {
    if !psd_test(t, tol).passed() {
        return Sufficiency::Inconclusive {
            reason: "precondition failed: triple is not PSD".into(),
        };
    }
    let d = t.dim();
    let sums = match side {
        MarginalSide::Row => t.a().row_sums(),
        MarginalSide::Col => t.a().col_sums(),
    };
    let marginal = ComplexMatrix::from_diagonal(&sums);
    let k = Complex64::new((d + 1) as f64, 0.0);
    let shift = |m: &ComplexMatrix| &m.scale(k) - &marginal;
    let shifted = MatrixTriple::new(shift(t.a()), shift(t.b()), shift(t.c()))
        .expect("shift preserves equal diagonals");
    if psd_test(&shifted, tol).passed() {
        Sufficiency::Certified {
            reason: match side {
                MarginalSide::Row => "dplusone_row".into(),
                MarginalSide::Col => "dplusone_col".into(),
            },
        }
    } else {
        Sufficiency::Inconclusive {
            reason: "shifted triple is not PSD".into(),
        }
    }
}

/// TCP witness for (A, A, A) from a completely positive factorization
/// A = N N^T with N entrywise non-negative: the factor pair is the
/// entrywise square root of N on both sides.
pub fn cp_to_tcp(
    a: &ComplexMatrix,
    n: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(MatrixTriple, TcpWitness)> {
    let d = a.require_square()?;
    if n.rows() != d {
        return Err(Error::Dimension("factor row count must match A".into()));
    }
    if !is_ewp(n, tol) {
        return Err(Error::InvalidValue("factor must be entrywise non-negative".into()));
    }
    let product = n.matmul(&n.transpose())?;
    let scale = a.max_abs().max(product.max_abs());
    if a.max_abs_diff(&product) > tol.scaled(scale) {
        return Err(Error::InvalidValue("A != N N^T within tolerance".into()));
    }
    let root = ComplexMatrix::from_fn(n.rows(), n.cols(), |i, j| {
        Complex64::new(n.get(i, j).re.max(0.0).sqrt(), 0.0)
    });
    let witness = TcpWitness::new(root.clone(), root)?;
    let triple = MatrixTriple::new(a.clone(), a.clone(), a.clone())?;
    debug_assert!(verify_tcp_witness(&triple, &witness, tol));
    Ok((triple, witness))
}

/// TCP witness for a diagonal triple (A, diag A, diag A) with A entrywise
/// non-negative: one product column per entry of A.
pub fn diagonal_tcp_witness(a: &ComplexMatrix, tol: &Tolerance) -> Result<(MatrixTriple, TcpWitness)> {
    let d = a.require_square()?;
    if !is_ewp(a, tol) {
        return Err(Error::InvalidValue("A must be entrywise non-negative".into()));
    }
    let width = d * d;
    let mut v = ComplexMatrix::zeros(d, width);
    let mut w = ComplexMatrix::zeros(d, width);
    for i in 0..d {
        for j in 0..d {
            let s = Complex64::new(a.get(i, j).re.max(0.0).powf(0.25), 0.0);
            v.set(i, i * d + j, s);
            w.set(j, i * d + j, s);
        }
    }
    let witness = TcpWitness::new(v, w)?;
    let triple = MatrixTriple::diagonal(a.clone())?;
    Ok((triple, witness))
}

/// Extremal rays of the PSD cones of invariant matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum PsdRayKind {
    /// |ii><ii| (LDUI).
    DiagonalUnit { i: usize },
    /// |x><x| supported on span{|ij>, |ji|>} with x = (alpha, beta)
    /// (LDUI / LDOI).
    PairSupported { i: usize, j: usize, x: [Complex64; 2] },
    /// |diag(x)><diag(x)| with diag(x) = sum_i x_i |ii> (CLDUI / LDOI).
    DiagonalVector { x: Vec<Complex64> },
    /// |ij><ij| for i != j (CLDUI).
    MatrixUnit { i: usize, j: usize },
}

/// Generates the triple of a unit-rank extremal PSD ray of the given class.
pub fn extremal_psd_ray(class: InvariantClass, d: usize, kind: &PsdRayKind) -> Result<MatrixTriple> {
    let check = |i: usize| {
        if i >= d {
            Err(Error::InvalidParameter(format!("index {i} out of range for d = {d}")))
        } else {
            Ok(())
        }
    };
    match kind {
        PsdRayKind::DiagonalUnit { i } => {
            check(*i)?;
            if class != InvariantClass::Ldui {
                return Err(Error::InvalidParameter(
                    "diagonal-unit rays are extremal only in the LDUI cone".into(),
                ));
            }
            let mut e = ComplexMatrix::zeros(d, d);
            e.set(*i, *i, Complex64::new(1.0, 0.0));
            MatrixTriple::new(e.clone(), e.clone(), e)
        }
        PsdRayKind::PairSupported { i, j, x } => {
            check(*i)?;
            check(*j)?;
            if i == j {
                return Err(Error::InvalidParameter("pair ray needs i != j".into()));
            }
            if class == InvariantClass::Cldui {
                return Err(Error::InvalidParameter(
                    "pair-supported rays are not CLDUI".into(),
                ));
            }
            if x[0].norm() == 0.0 && x[1].norm() == 0.0 {
                return Err(Error::InvalidParameter("ray vector must be non-zero".into()));
            }
            let mut a = ComplexMatrix::zeros(d, d);
            let mut c = ComplexMatrix::zeros(d, d);
            a.set(*i, *j, Complex64::new(x[0].norm_sqr(), 0.0));
            a.set(*j, *i, Complex64::new(x[1].norm_sqr(), 0.0));
            c.set(*i, *j, x[0] * x[1].conj());
            c.set(*j, *i, x[1] * x[0].conj());
            MatrixTriple::new(a, ComplexMatrix::zeros(d, d), c)
        }
        PsdRayKind::DiagonalVector { x } => {
            if x.len() != d {
                return Err(Error::Dimension("vector length must equal d".into()));
            }
            if class == InvariantClass::Ldui {
                return Err(Error::InvalidParameter(
                    "diagonal-vector rays are not LDUI".into(),
                ));
            }
            if x.iter().all(|z| z.norm() == 0.0) {
                return Err(Error::InvalidParameter("ray vector must be non-zero".into()));
            }
            let diag = ComplexMatrix::from_diagonal(
                &x.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect::<Vec<_>>(),
            );
            let b = ComplexMatrix::outer(x, x);
            MatrixTriple::new(diag.clone(), b, diag)
        }
        PsdRayKind::MatrixUnit { i, j } => {
            check(*i)?;
            check(*j)?;
            if i == j {
                return Err(Error::InvalidParameter("matrix-unit ray needs i != j".into()));
            }
            if class != InvariantClass::Cldui {
                return Err(Error::InvalidParameter(
                    "matrix-unit rays are extremal only in the CLDUI cone".into(),
                ));
            }
            let mut a = ComplexMatrix::zeros(d, d);
            a.set(*i, *j, Complex64::new(1.0, 0.0));
            MatrixTriple::new(a, ComplexMatrix::zeros(d, d), ComplexMatrix::zeros(d, d))
        }
    }
}

/// Overall TCP assessment: a refutation, a certificate (with a witness when
/// one is constructible), or an honest "don't know".
#[derive(Debug, Clone)]
pub enum TcpAssessment {
    Refuted {
        test: String,
        margin: f64,
    },
    Certified {
        certificate: String,
        witness: Option<TcpWitness>,
    },
    Inconclusive {
        tried: Vec<String>,
    },
}

/// Attempts a completely positive factorization A = N N^T with N entrywise
/// non-negative, for the structured forms that occur in the example
/// families: diagonal, alpha I + beta J, rank one, and matrices whose
/// Cholesky factor happens to be non-negative.
pub fn cp_factor_heuristic(a: &ComplexMatrix, tol: &Tolerance) -> Option<ComplexMatrix> {
    let d = a.require_square().ok()?;
    if !is_ewp(a, tol) || a.max_abs_diff(&a.transpose()) > tol.scaled(a.max_abs()) {
        return None;
    }
    let thr = tol.scaled(a.max_abs());
    // diagonal
    if (0..d).all(|i| (0..d).all(|j| i == j || a.get(i, j).norm() <= thr)) {
        let n = ComplexMatrix::from_diagonal(
            &a.diagonal().iter().map(|z| Complex64::new(z.re.max(0.0).sqrt(), 0.0)).collect::<Vec<_>>(),
        );
        return Some(n);
    }
    // alpha I + beta J
    if d >= 2 {
        let beta = a.get(0, 1).re;
        let alpha = a.get(0, 0).re - beta;
        let uniform = (0..d).all(|i| {
            (0..d).all(|j| {
                let want = if i == j { alpha + beta } else { beta };
                (a.get(i, j).re - want).abs() <= thr && a.get(i, j).im.abs() <= thr
            })
        });
        if uniform && alpha >= -thr && beta >= -thr {
            let sa = alpha.max(0.0).sqrt();
            let sb = beta.max(0.0).sqrt();
            let n = ComplexMatrix::from_fn(d, d + 1, |i, j| {
                if j < d {
                    if i == j { Complex64::new(sa, 0.0) } else { Complex64::new(0.0, 0.0) }
                } else {
                    Complex64::new(sb, 0.0)
                }
            });
            return Some(n);
        }
    }
    // rank one |x><x| with x = sqrt(diag)
    let x: Vec<Complex64> = a.diagonal().iter().map(|z| Complex64::new(z.re.max(0.0).sqrt(), 0.0)).collect();
    let outer = ComplexMatrix::outer(&x, &x);
    if a.max_abs_diff(&outer) <= thr {
        return Some(ComplexMatrix::from_fn(d, 1, |i, _| x[i]));
    }
    // non-negative Cholesky
    let l = nonneg_cholesky(a, tol)?;
    let rec = l.matmul(&l.transpose()).ok()?;
    if a.max_abs_diff(&rec) <= tol.scaled(a.max_abs()).max(1e-8 * a.max_abs()) {
        Some(l)
    } else {
        None
    }
}

fn nonneg_cholesky(a: &ComplexMatrix, tol: &Tolerance) -> Option<ComplexMatrix> {
    let d = a.rows();
    let mut l = vec![vec![0.0f64; d]; d];
    for j in 0..d {
        let mut diag = a.get(j, j).re;
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if diag < -tol.scaled(a.max_abs()) {
            return None;
        }
        let pivot = diag.max(0.0).sqrt();
        l[j][j] = pivot;
        for i in (j + 1)..d {
            let mut v = a.get(i, j).re;
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            let entry = if pivot > 0.0 { v / pivot } else { 0.0 };
            if entry < -tol.scaled(a.max_abs()) {
                return None;
            }
            l[i][j] = entry.max(0.0);
        }
    }
    Some(ComplexMatrix::from_fn(d, d, |i, j| Complex64::new(l[i][j], 0.0)))
}

/// Runs the necessary battery and then the sufficient constructions in
/// order, returning the first decisive outcome.
pub fn tcp_certify(t: &MatrixTriple, tol: &Tolerance) -> TcpAssessment {
    let battery = tcp_necessary_battery(t, tol);
    if let Some(item) = battery.first_failure() {
        return TcpAssessment::Refuted {
            test: item.name.clone(),
            margin: item.margin,
        };
    }
    let mut tried: Vec<String> = vec![];
    let d = t.dim();
    let thr = tol.scaled(t.max_abs());
    let diag_a = ComplexMatrix::from_diagonal(&t.a().diagonal());
    let b_is_diag = t.b().max_abs_diff(&diag_a) <= thr;
    let c_is_diag = t.c().max_abs_diff(&diag_a) <= thr;

    // diagonal triples are exactly the non-negative diagonal matrices
    if b_is_diag && c_is_diag && is_ewp(t.a(), tol) {
        if let Ok((_, witness)) = diagonal_tcp_witness(t.a(), tol) {
            return TcpAssessment::Certified {
                certificate: "diagonal".into(),
                witness: Some(witness),
            };
        }
    }
    tried.push("diagonal".into());

    // the pair whose membership is equivalent to the triple's, when the
    // triple has one of the partial-transpose-invariant or LDUI/CLDUI forms
    let pair_slot: Option<(&ComplexMatrix, &'static str)> = if t.c().max_abs_diff(t.b()) <= thr
        || t.c().max_abs_diff(&t.b().transpose()) <= thr
        || c_is_diag
    {
        Some((t.b(), "(A,B)"))
    } else if b_is_diag {
        Some((t.c(), "(A,C)"))
    } else {
        None
    };

    if let Some((slot, label)) = pair_slot {
        if let Ok(pair) = MatrixPair::new(t.a().clone(), slot.clone()) {
            match pcp_sufficient(&pair, tol) {
                Sufficiency::Certified { reason } => {
                    return TcpAssessment::Certified {
                        certificate: format!("pcp_{reason} on {label}"),
                        witness: None,
                    };
                }
                Sufficiency::Inconclusive { .. } => tried.push(format!("pcp_sufficient {label}")),
            }
            // completely positive route: pair of the form (A, A)
            if slot.max_abs_diff(t.a()) <= thr {
                if let Some(n) = cp_factor_heuristic(t.a(), tol) {
                    if let Ok((_, witness)) = cp_to_tcp(t.a(), &n, tol) {
                        let adapted = if b_is_diag && c_is_diag {
                            witness.dephased_b().dephased_c()
                        } else if b_is_diag {
                            witness.dephased_b()
                        } else if c_is_diag {
                            witness.dephased_c()
                        } else {
                            witness
                        };
                        if verify_tcp_witness(t, &adapted, tol) {
                            return TcpAssessment::Certified {
                                certificate: "cp_factorization".into(),
                                witness: Some(adapted),
                            };
                        }
                    }
                }
                tried.push("cp_factorization".into());
            }
        }
    }

    // A proportional to the all-ones matrix
    let mean = t.a().entry_sum().re / (d * d) as f64;
    if mean > 0.0 && t.a().max_abs_diff(&ComplexMatrix::ones(d, d).scale(Complex64::new(mean, 0.0))) <= thr {
        let s = mean;
        let quarter = Complex64::new(s.powf(0.25), 0.0);
        if c_is_diag {
            if let Ok((_, w)) = a_equals_j_pcp(&t.b().scale(Complex64::new(1.0 / s, 0.0)), tol) {
                let scaled = TcpWitness::new(w.v.scale(quarter), w.w.scale(quarter)).unwrap();
                let adapted = scaled.dephased_c();
                if verify_tcp_witness(t, &adapted, tol) {
                    return TcpAssessment::Certified {
                        certificate: "a_equals_j_correlation".into(),
                        witness: Some(adapted),
                    };
                }
            }
        } else if b_is_diag {
            if let Ok((_, w)) = a_equals_j_pcp(&t.c().scale(Complex64::new(1.0 / s, 0.0)), tol) {
                let scaled =
                    TcpWitness::new(w.v.scale(quarter), w.w.conjugate().scale(quarter)).unwrap();
                let adapted = scaled.dephased_b();
                if verify_tcp_witness(t, &adapted, tol) {
                    return TcpAssessment::Certified {
                        certificate: "a_equals_j_correlation".into(),
                        witness: Some(adapted),
                    };
                }
            }
        } else {
            // both slots rank one with unimodular entries: X = s |z><z|,
            // z read off the first column with the (0,0) phase normalized out
            let unim = |m: &ComplexMatrix| {
                let z: Vec<Complex64> = (0..d)
                    .map(|i| m.get(i, 0) * phase_of(m.get(0, 0)).conj() / s)
                    .collect();
                let ok = z.iter().all(|e| (e.norm() - 1.0).abs() <= 1e-8)
                    && m.max_abs_diff(&ComplexMatrix::outer(&z, &z).scale(Complex64::new(s, 0.0)))
                        <= tol.scaled(m.max_abs());
                if ok {
                    Some(z)
                } else {
                    None
                }
            };
            if let (Some(bv), Some(cv)) = (unim(t.b()), unim(t.c())) {
                if let Ok((_, w)) = a_equals_j_rank_one_tcp(&bv, &cv, tol) {
                    let scaled = w.scaled(s).unwrap();
                    if verify_tcp_witness(t, &scaled, tol) {
                        return TcpAssessment::Certified {
                            certificate: "a_equals_j_rank_one".into(),
                            witness: Some(scaled),
                        };
                    }
                }
            }
        }
        tried.push("a_equals_j".into());
    }

    if gurvits_ball_test(t, tol).is_certified() {
        return TcpAssessment::Certified {
            certificate: "gurvits_ball".into(),
            witness: None,
        };
    }
    tried.push("gurvits_ball".into());

    for side in [MarginalSide::Row, MarginalSide::Col] {
        if let Sufficiency::Certified { reason } = dplusone_test(t, side, tol) {
            return TcpAssessment::Certified {
                certificate: reason,
                witness: None,
            };
        }
    }
    tried.push("dplusone_row".into());
    tried.push("dplusone_col".into());

    TcpAssessment::Inconclusive { tried }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldoi::{build, leg_permutation, project, random_triple, LegPermutation};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    pub(crate) fn random_witness(d: usize, width: usize, seed: u64) -> TcpWitness {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = || {
            ComplexMatrix::from_fn(d, width, |_, _| {
                c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
            })
        };
        TcpWitness::new(m(), m()).unwrap()
    }

    fn identity_triple(d: usize) -> MatrixTriple {
        MatrixTriple::new(
            ComplexMatrix::ones(d, d),
            ComplexMatrix::identity(d),
            ComplexMatrix::identity(d),
        )
        .unwrap()
    }

    fn werner_triple(a: f64, b: f64, d: usize) -> MatrixTriple {
        let id = ComplexMatrix::identity(d);
        let j = ComplexMatrix::ones(d, d);
        let am = &id.scale(c(b, 0.0)) + &j.scale(c(a, 0.0));
        let cm = &id.scale(c(a, 0.0)) + &j.scale(c(b, 0.0));
        MatrixTriple::from_ldui_pair(am, cm).unwrap()
    }

    fn stormer_triple(mu: f64) -> MatrixTriple {
        let a = ComplexMatrix::from_real(
            3,
            3,
            &[
                2.0 * mu, 4.0 * mu * mu, 1.0,
                1.0, 2.0 * mu, 4.0 * mu * mu,
                4.0 * mu * mu, 1.0, 2.0 * mu,
            ],
        )
        .unwrap();
        let b = ComplexMatrix::ones(3, 3).scale(c(2.0 * mu, 0.0));
        MatrixTriple::from_cldui_pair(a, b).unwrap()
    }

    fn section8_triple() -> MatrixTriple {
        let a = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0])
            .unwrap();
        let b = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0])
            .unwrap();
        let cm = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, -1.0, 1.0])
            .unwrap();
        MatrixTriple::new(a, b, cm).unwrap()
    }

    #[test]
    fn psd_test_examples() {
        assert!(psd_test(&identity_triple(3), &tol()).passed());
        // Werner d=3, a=1, b=2: product condition against C fails
        let t = werner_triple(1.0, 2.0, 3);
        let report = psd_test(&t, &tol());
        assert!(!report.passed());
        assert!(report.margin("A_product_C").unwrap() < 0.0);
    }

    #[test]
    fn psd_test_matches_dense_min_eigenvalue() {
        for seed in 0..20 {
            let t = random_triple(3, 400 + seed);
            // symmetrize so the dense matrix is hermitian roughly half the time
            let t = if seed % 2 == 0 {
                let x = build(InvariantClass::Ldoi, &t);
                let h = x.matrix().hermitize().unwrap();
                let hx = crate::ldoi::BipartiteMatrix::from_matrix(h).unwrap();
                crate::ldoi::extract_triple(&hx)
            } else {
                t
            };
            let dense = build(InvariantClass::Ldoi, &t);
            let dense_psd = is_psd(dense.matrix(), &tol()).unwrap();
            assert_eq!(psd_test(&t, &tol()).passed(), dense_psd, "seed {seed}");
        }
    }

    #[test]
    fn ppt_test_examples() {
        assert!(ppt_test(&stormer_triple(1.0), &tol()).passed());
        assert!(ppt_test(&stormer_triple(2.0), &tol()).passed());
        // Werner b < -a/d
        assert!(!ppt_test(&werner_triple(1.0, -1.0, 3), &tol()).passed());
    }

    #[test]
    fn ppt_matches_dense_gamma_psd() {
        for seed in 0..20 {
            let t = random_triple(3, 900 + seed);
            let dense = build(InvariantClass::Ldoi, &t);
            let gamma = build(InvariantClass::Ldoi, &leg_permutation(&t, LegPermutation::Gamma));
            let dense_ppt = is_psd(dense.matrix(), &tol()).unwrap()
                && is_psd(gamma.matrix(), &tol()).unwrap();
            assert_eq!(ppt_test(&t, &tol()).passed(), dense_ppt, "seed {seed}");
        }
    }

    #[test]
    fn realignment_examples() {
        // diagonal EWP triple passes (rhs = 0)
        let a = ComplexMatrix::from_real(3, 3, &[0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25])
            .unwrap();
        let t = MatrixTriple::diagonal(a).unwrap();
        assert!(realignment_test(&t, &tol()).passed());

        // maximally entangled triple fails at d = 2
        let t = MatrixTriple::new(
            ComplexMatrix::identity(2),
            ComplexMatrix::ones(2, 2),
            ComplexMatrix::identity(2),
        )
        .unwrap();
        assert!(!realignment_test(&t, &tol()).passed());
    }

    #[test]
    fn quantum_state_examples() {
        let d = 3;
        let norm = 1.0 / (d * d) as f64;
        let t = MatrixTriple::new(
            ComplexMatrix::ones(d, d).scale(c(norm, 0.0)),
            ComplexMatrix::identity(d).scale(c(norm, 0.0)),
            ComplexMatrix::identity(d).scale(c(norm, 0.0)),
        )
        .unwrap();
        assert!(quantum_state_test(&t, &tol()));
        assert!(!quantum_state_test(&identity_triple(d), &tol()));
        // sum of Stormer A(1) entries is 21
        let s = stormer_triple(1.0);
        assert!((s.a().entry_sum().re - 21.0).abs() < 1e-12);
        let normalized = s.scale(c(1.0 / 21.0, 0.0));
        assert!(quantum_state_test(&normalized, &tol()));
    }

    #[test]
    fn battery_on_the_section8_fixture() {
        let t = section8_triple();
        let report = tcp_necessary_battery(&t, &tol());
        for item in &report.items {
            match item.name.as_str() {
                "realignment" => assert_eq!(item.verdict, CheckVerdict::Fail),
                "pcp_pairs" => assert_eq!(item.verdict, CheckVerdict::NotApplicable),
                _ => assert_eq!(item.verdict, CheckVerdict::Pass, "{}", item.name),
            }
        }
        // both pairs certified by diagonal dominance
        let pb = MatrixPair::new(t.a().clone(), t.b().clone()).unwrap();
        let pc = MatrixPair::new(t.a().clone(), t.c().clone()).unwrap();
        assert!(pcp_sufficient(&pb, &tol()).is_certified());
        assert!(pcp_sufficient(&pc, &tol()).is_certified());
    }

    #[test]
    fn battery_flags_non_psd_b() {
        let mut b = ComplexMatrix::identity(3);
        b.set(0, 1, c(5.0, 0.0));
        b.set(1, 0, c(5.0, 0.0));
        let t = MatrixTriple::from_cldui_pair(ComplexMatrix::identity(3), b).unwrap();
        let report = tcp_necessary_battery(&t, &tol());
        assert_eq!(
            report
                .items
                .iter()
                .find(|i| i.name == "B_psd")
                .unwrap()
                .verdict,
            CheckVerdict::Fail
        );
    }

    #[test]
    fn witnesses_verify_and_reject_perturbations() {
        for seed in 0..10 {
            let w = random_witness(4, 3, seed);
            let t = w.triple();
            assert!(verify_tcp_witness(&t, &w, &tol()));
            let p = w.pair();
            assert!(verify_pcp_witness(&p, &w, &tol()));

            let mut v2 = w.v.clone();
            v2.set(0, 0, v2.get(0, 0) + c(0.1, 0.0));
            let perturbed = TcpWitness::new(v2, w.w.clone()).unwrap();
            assert!(!verify_tcp_witness(&t, &perturbed, &tol()));
        }
    }

    #[test]
    fn witness_triples_pass_every_necessary_test() {
        for seed in 0..25 {
            let w = random_witness(3 + (seed % 3) as usize, 1 + (seed % 5) as usize, 1000 + seed);
            let t = w.triple();
            assert!(ppt_test(&t, &tol()).passed(), "seed {seed}");
            assert!(realignment_test(&t, &tol()).passed(), "seed {seed}");
            assert!(tcp_necessary_battery(&t, &tol()).passed(), "seed {seed}");
        }
    }

    #[test]
    fn witness_direct_sum_and_restriction() {
        let w1 = random_witness(2, 2, 5);
        let w2 = random_witness(3, 4, 6);
        let t1 = w1.triple();
        let t2 = w2.triple();
        // block-diagonal witness for the direct sum
        let pad = |w: &TcpWitness, top: usize, bottom: usize| {
            let grow = |m: &ComplexMatrix| {
                ComplexMatrix::from_fn(top + m.rows() + bottom, m.cols(), |i, j| {
                    if i >= top && i < top + m.rows() {
                        m.get(i - top, j)
                    } else {
                        c(0.0, 0.0)
                    }
                })
            };
            TcpWitness::new(grow(&w.v), grow(&w.w)).unwrap()
        };
        let sum = crate::ldoi::direct_sum(&t1, &t2);
        let joint = pad(&w1, 0, 3).concat(&pad(&w2, 2, 0)).unwrap();
        assert!(verify_tcp_witness(&sum, &joint, &tol()));

        // row restriction certifies the principal subtriple
        let sub = crate::ldoi::principal_subtriple(&t2, &[0, 2]).unwrap();
        let restricted = w2.restrict_rows(&[0, 2]).unwrap();
        assert!(verify_tcp_witness(&sub, &restricted, &tol()));
    }

    #[test]
    fn pcp_sufficient_cases() {
        // Werner endpoint b = -a/d is diagonally dominant
        let d = 3;
        let t = werner_triple(1.0, -1.0 / d as f64, d);
        let pair = MatrixPair::new(t.a().clone(), t.c().clone()).unwrap();
        match pcp_sufficient(&pair, &tol()) {
            Sufficiency::Certified { reason } => assert_eq!(reason, "diagonal_dominance"),
            other => panic!("expected certification, got {other:?}"),
        }

        // circulant with third roots of unity: comparison matrix has
        // eigenvalue -1, so the test is inconclusive
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let b = ComplexMatrix::new(
            3,
            3,
            vec![
                c(1.0, 0.0), w, w.conj(),
                w.conj(), c(1.0, 0.0), w,
                w, w.conj(), c(1.0, 0.0),
            ],
        )
        .unwrap();
        let cmp = comparison_matrix(&b).unwrap();
        assert!(!is_psd(&cmp, &tol()).unwrap());
        let a = ComplexMatrix::ones(3, 3);
        let pair = MatrixPair::new(a, b).unwrap();
        assert!(!pcp_sufficient(&pair, &tol()).is_certified());
    }

    #[test]
    fn phasefix_produces_verified_witnesses() {
        for seed in 0..10 {
            let w = random_witness(3, 2, 2000 + seed);
            let p = w.pair();
            for variant in [PhasefixVariant::B, PhasefixVariant::BTranspose] {
                let (triple, fixed) = tcp_from_pcp_phasefix(&p, &w, variant, &tol()).unwrap();
                assert!(verify_tcp_witness(&triple, &fixed, &tol()));
                match variant {
                    PhasefixVariant::B => assert!(triple.c().max_abs_diff(p.b()) < 1e-12),
                    PhasefixVariant::BTranspose => {
                        assert!(triple.c().max_abs_diff(&p.b().transpose()) < 1e-12)
                    }
                }
            }
        }
    }

    #[test]
    fn phasefix_is_identity_on_nonnegative_witnesses() {
        let v = ComplexMatrix::from_real(2, 2, &[1.0, 0.5, 2.0, 0.0]).unwrap();
        let w = ComplexMatrix::from_real(2, 2, &[0.25, 1.0, 1.5, 3.0]).unwrap();
        let witness = TcpWitness::new(v.clone(), w.clone()).unwrap();
        let p = witness.pair();
        let (_, fixed) = tcp_from_pcp_phasefix(&p, &witness, PhasefixVariant::B, &tol()).unwrap();
        assert!(fixed.v.max_abs_diff(&v) < 1e-14);
        assert!(fixed.w.max_abs_diff(&w) < 1e-14);
    }

    #[test]
    fn extremal_ray_matches_local_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let d = 3;
            let v: Vec<Complex64> =
                (0..d).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let w: Vec<Complex64> =
                (0..d).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let (triple, witness) = extremal_tcp_ray(&v, &w).unwrap();
            assert!(verify_tcp_witness(&triple, &witness, &tol()));

            // dense oracle: project |v><v| (x) |w><w| onto the invariant space
            let mut x = crate::ldoi::BipartiteMatrix::zeros(d);
            for i1 in 0..d {
                for i2 in 0..d {
                    for j1 in 0..d {
                        for j2 in 0..d {
                            x.set(i1, i2, j1, j2, v[i1] * w[i2] * (v[j1] * w[j2]).conj());
                        }
                    }
                }
            }
            let projected = crate::ldoi::extract_triple(&project(&x, InvariantClass::Ldoi));
            assert!(triple.max_abs_diff(&projected) < 1e-12);
        }
    }

    #[test]
    fn extremal_ray_special_vectors() {
        let ones = vec![c(1.0, 0.0); 3];
        let (t, _) = extremal_tcp_ray(&ones, &ones).unwrap();
        let j = ComplexMatrix::ones(3, 3);
        assert!(t.a().max_abs_diff(&j) < 1e-14);
        assert!(t.b().max_abs_diff(&j) < 1e-14);
        assert!(t.c().max_abs_diff(&j) < 1e-14);

        let e0 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let e1 = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let (t, _) = extremal_tcp_ray(&e0, &e1).unwrap();
        assert!((t.a().get(0, 1) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(crate::ldoi::rank_of(&t, InvariantClass::Ldoi, &tol()), 1);

        assert!(extremal_tcp_ray(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn a_equals_j_constructions() {
        // identity correlation
        let (pair, w) = a_equals_j_pcp(&ComplexMatrix::identity(3), &tol()).unwrap();
        assert!(verify_pcp_witness(&pair, &w, &tol()));

        // random correlation matrix: gram of random unit vectors
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 4;
        let k = 3;
        let cols: Vec<Vec<Complex64>> = (0..d)
            .map(|_| {
                let raw: Vec<Complex64> =
                    (0..k).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
                let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                raw.into_iter().map(|z| z / norm).collect()
            })
            .collect();
        let b = ComplexMatrix::from_fn(d, d, |i, j| {
            (0..k).fold(c(0.0, 0.0), |acc, t| acc + cols[i][t] * cols[j][t].conj())
        });
        let (pair, w) = a_equals_j_pcp(&b, &tol()).unwrap();
        assert!(verify_pcp_witness(&pair, &w, &tol()));

        // rank-one unimodular: b = ones, c with a flipped sign
        let ones = vec![c(1.0, 0.0); 3];
        let mut cvec = ones.clone();
        cvec[0] = c(-1.0, 0.0);
        let (triple, w) = a_equals_j_rank_one_tcp(&ones, &cvec, &tol()).unwrap();
        assert!(verify_tcp_witness(&triple, &w, &tol()));
        assert!((w.v.get(0, 0) - c(0.0, 1.0)).norm() < 1e-14);
        assert!((w.w.get(0, 0) - c(0.0, -1.0)).norm() < 1e-14);

        assert!(a_equals_j_pcp(&ComplexMatrix::ones(2, 2).scale(c(2.0, 0.0)), &tol()).is_err());
        assert!(a_equals_j_rank_one_tcp(&[c(0.5, 0.0)], &[c(1.0, 0.0)], &tol()).is_err());
    }

    #[test]
    fn gurvits_ball_cases() {
        let d = 3;
        let norm = 1.0 / (d * d) as f64;
        let maximally_mixed = MatrixTriple::new(
            ComplexMatrix::ones(d, d).scale(c(norm, 0.0)),
            ComplexMatrix::identity(d).scale(c(norm, 0.0)),
            ComplexMatrix::identity(d).scale(c(norm, 0.0)),
        )
        .unwrap();
        assert!(gurvits_ball_test(&maximally_mixed, &tol()).is_certified());

        let maxent = MatrixTriple::new(
            ComplexMatrix::identity(2),
            ComplexMatrix::ones(2, 2),
            ComplexMatrix::identity(2),
        )
        .unwrap();
        assert!(!gurvits_ball_test(&maxent, &tol()).is_certified());
    }

    #[test]
    fn gurvits_margin_flips_at_the_boundary() {
        // the Werner line passes through the ball's center at b = 0 and
        // exits it exactly at b = -a/d
        let d = 3;
        let t = werner_triple(1.0, -1.0 / 3.0, d);
        assert!(gurvits_ball_test(&t, &tol()).is_certified());
        let inside = werner_triple(1.0, -1.0 / 3.0 + 0.05, d);
        assert!(gurvits_ball_test(&inside, &tol()).is_certified());
        // beyond the sphere (still PSD, since |b| <= a holds) the
        // certificate disappears
        let outside = werner_triple(1.0, -1.0 / 3.0 - 0.05, d);
        assert!(!gurvits_ball_test(&outside, &tol()).is_certified());
    }

    #[test]
    fn dplusone_cases() {
        let d = 3;
        let norm = 1.0 / (d * d) as f64;
        let maximally_mixed = MatrixTriple::new(
            ComplexMatrix::ones(d, d).scale(c(norm, 0.0)),
            ComplexMatrix::identity(d).scale(c(norm, 0.0)),
            ComplexMatrix::identity(d).scale(c(norm, 0.0)),
        )
        .unwrap();
        assert!(dplusone_test(&maximally_mixed, MarginalSide::Row, &tol()).is_certified());

        let maxent = MatrixTriple::new(
            ComplexMatrix::identity(2),
            ComplexMatrix::ones(2, 2),
            ComplexMatrix::identity(2),
        )
        .unwrap();
        assert!(!dplusone_test(&maxent, MarginalSide::Row, &tol()).is_certified());

        // a row-unbalanced A (one diagonal entry far below its row sum)
        // violates the shifted entrywise condition
        let a = ComplexMatrix::from_real(
            3,
            3,
            &[1.0, 10.0, 10.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let t = MatrixTriple::diagonal(a).unwrap();
        assert!(!dplusone_test(&t, MarginalSide::Row, &tol()).is_certified());
    }

    #[test]
    fn cp_to_tcp_cases() {
        let (t, w) = cp_to_tcp(&ComplexMatrix::identity(3), &ComplexMatrix::identity(3), &tol())
            .unwrap();
        assert!(verify_tcp_witness(&t, &w, &tol()));

        // A = I + J with N = [I | ones]
        let d = 3;
        let a = &ComplexMatrix::identity(d) + &ComplexMatrix::ones(d, d);
        let n = ComplexMatrix::from_fn(d, d + 1, |i, j| {
            if j < d {
                if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }
            } else {
                c(1.0, 0.0)
            }
        });
        let (t, w) = cp_to_tcp(&a, &n, &tol()).unwrap();
        assert!(verify_tcp_witness(&t, &w, &tol()));

        // random non-negative factor
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = ComplexMatrix::from_fn(4, 6, |_, _| c(rng.gen::<f64>(), 0.0));
        let a = n.matmul(&n.transpose()).unwrap();
        let (t, w) = cp_to_tcp(&a, &n, &tol()).unwrap();
        assert!(verify_tcp_witness(&t, &w, &tol()));

        // mismatched factorization is rejected
        assert!(cp_to_tcp(&ComplexMatrix::identity(2), &ComplexMatrix::ones(2, 2), &tol()).is_err());
    }

    #[test]
    fn diagonal_witness_and_dephasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = ComplexMatrix::from_fn(3, 3, |_, _| c(rng.gen::<f64>(), 0.0));
        let (t, w) = diagonal_tcp_witness(&a, &tol()).unwrap();
        assert!(verify_tcp_witness(&t, &w, &tol()));

        // dephasing the C slot of a PCP witness certifies the CLDUI triple
        let w = random_witness(3, 2, 77);
        let p = w.pair();
        let dephased = w.dephased_c();
        let target = MatrixTriple::from_cldui_pair(p.a().clone(), p.b().clone()).unwrap();
        assert!(verify_tcp_witness(&target, &dephased, &tol()));

        // and dephasing B certifies the LDUI triple with the same C slot
        let t_full = w.triple();
        let dephased_b = w.dephased_b();
        let target = MatrixTriple::from_ldui_pair(t_full.a().clone(), t_full.c().clone()).unwrap();
        assert!(verify_tcp_witness(&target, &dephased_b, &tol()));
    }

    #[test]
    fn witness_scaling_and_concat_are_conic() {
        let w1 = random_witness(3, 2, 88);
        let w2 = random_witness(3, 3, 89);
        let combined = w1.scaled(0.3).unwrap().concat(&w2.scaled(0.7).unwrap()).unwrap();
        let expected = w1
            .triple()
            .scale(c(0.3, 0.0))
            .add(&w2.triple().scale(c(0.7, 0.0)))
            .unwrap();
        assert!(verify_tcp_witness(&expected, &combined, &tol()));
    }

    #[test]
    fn extremal_psd_rays_are_unit_rank_and_psd() {
        let d = 3;
        let cases: Vec<(InvariantClass, PsdRayKind)> = vec![
            (InvariantClass::Ldui, PsdRayKind::DiagonalUnit { i: 0 }),
            (
                InvariantClass::Ldui,
                PsdRayKind::PairSupported { i: 0, j: 2, x: [c(1.0, 0.5), c(-0.25, 1.0)] },
            ),
            (
                InvariantClass::Ldoi,
                PsdRayKind::PairSupported { i: 1, j: 2, x: [c(0.5, 0.0), c(0.0, 1.0)] },
            ),
            (
                InvariantClass::Cldui,
                PsdRayKind::DiagonalVector { x: vec![c(1.0, 0.0), c(0.5, -0.5), c(0.0, 2.0)] },
            ),
            (
                InvariantClass::Ldoi,
                PsdRayKind::DiagonalVector { x: vec![c(1.0, 0.0); 3] },
            ),
            (InvariantClass::Cldui, PsdRayKind::MatrixUnit { i: 2, j: 0 }),
        ];
        for (class, kind) in cases {
            let t = extremal_psd_ray(class, d, &kind).unwrap();
            assert_eq!(crate::ldoi::rank_of(&t, class, &tol()), 1, "{kind:?}");
            assert!(psd_test(&t, &tol()).passed(), "{kind:?}");
        }

        // the all-ones diagonal vector is the maximally entangled projector
        let t = extremal_psd_ray(
            InvariantClass::Ldoi,
            3,
            &PsdRayKind::DiagonalVector { x: vec![c(1.0, 0.0); 3] },
        )
        .unwrap();
        assert!(t.a().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);
        assert!(t.b().max_abs_diff(&ComplexMatrix::ones(3, 3)) < 1e-14);

        // kind (i) is the diagonal unit projector
        let t = extremal_psd_ray(InvariantClass::Ldui, 3, &PsdRayKind::DiagonalUnit { i: 0 })
            .unwrap();
        let mut e = ComplexMatrix::zeros(3, 3);
        e.set(0, 0, c(1.0, 0.0));
        assert!(t.a().max_abs_diff(&e) < 1e-14);

        assert!(extremal_psd_ray(InvariantClass::Ldui, 3, &PsdRayKind::DiagonalUnit { i: 5 }).is_err());
        assert!(extremal_psd_ray(
            InvariantClass::Cldui,
            3,
            &PsdRayKind::PairSupported { i: 0, j: 1, x: [c(1.0, 0.0), c(0.0, 0.0)] }
        )
        .is_err());
    }

    #[test]
    fn certify_refutes_and_certifies() {
        // Stormer is PPT but fails the norm-gap/realignment necessary
        // conditions
        match tcp_certify(&stormer_triple(1.0), &tol()) {
            TcpAssessment::Refuted { test, margin } => {
                assert!(test.starts_with("norm_gap") || test == "realignment");
                assert!(margin < 0.0);
            }
            other => panic!("expected refutation, got {other:?}"),
        }

        // identity matrix triple is certified with an explicit witness
        match tcp_certify(&identity_triple(3), &tol()) {
            TcpAssessment::Certified { witness, .. } => {
                let w = witness.expect("diagonal route produces a witness");
                assert!(verify_tcp_witness(&identity_triple(3), &w, &tol()));
            }
            other => panic!("expected certification, got {other:?}"),
        }
    }

    #[test]
    fn cp_heuristic_factors_structured_matrices() {
        let id_plus_j = &ComplexMatrix::identity(4) + &ComplexMatrix::ones(4, 4);
        let n = cp_factor_heuristic(&id_plus_j, &tol()).unwrap();
        assert!(id_plus_j.max_abs_diff(&n.matmul(&n.transpose()).unwrap()) < 1e-10);

        let diag = ComplexMatrix::from_diagonal(&[c(4.0, 0.0), c(0.25, 0.0)]);
        let n = cp_factor_heuristic(&diag, &tol()).unwrap();
        assert!(diag.max_abs_diff(&n.matmul(&n.transpose()).unwrap()) < 1e-12);

        // indefinite matrices cannot be factored
        let bad = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(cp_factor_heuristic(&bad, &tol()).is_none());
    }
}

#[cfg(test)]
pub(crate) use tests::random_witness;
