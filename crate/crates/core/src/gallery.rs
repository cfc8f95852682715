//! Named generators for the example families of invariant matrices and
//! covariant maps: Werner/isotropic, Dicke mixtures, canonical NPT states,
//! 3x3 edge states, Choi-type maps and their generalizations, Schur
//! multipliers, depolarizing/dephasing maps, and the fixed test triples.
//! These double as the test corpus for the rest of the crate.

use num_complex::Complex64;
use serde::Serialize;

use crate::cones::{cp_to_tcp, TcpWitness};
use crate::docmaps::{classify_triple, CovariantMap, MapClass};
use crate::ldoi::{BipartiteMatrix, InvariantClass, MatrixTriple};
use crate::matcore::{tilde, ComplexMatrix, Tolerance};
use crate::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Output of the string-dispatch generator: a classified state triple, a
/// covariant map, or a state bundled with the map that detects it.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GalleryItem {
    State {
        class: InvariantClass,
        triple: MatrixTriple,
    },
    Map {
        map: CovariantMap,
    },
    Bundle {
        state: MatrixTriple,
        witness_map: CovariantMap,
    },
}

/// Diagonal bipartite matrices: (A, diag A, diag A).
pub fn diagonal(a: ComplexMatrix) -> Result<MatrixTriple> {
    MatrixTriple::diagonal(a)
}

/// Werner family: LDUI with A = b I + a J and C = a I + b J.
pub fn werner(a: f64, b: f64, d: usize) -> Result<MatrixTriple> {
    let am = &ComplexMatrix::identity(d).scale(re(b)) + &ComplexMatrix::ones(d, d).scale(re(a));
    let cm = &ComplexMatrix::identity(d).scale(re(a)) + &ComplexMatrix::ones(d, d).scale(re(b));
    MatrixTriple::from_ldui_pair(am, cm)
}

/// Isotropic family: CLDUI with A = b I + a J and B = a I + b J.
pub fn isotropic(a: f64, b: f64, d: usize) -> Result<MatrixTriple> {
    let am = &ComplexMatrix::identity(d).scale(re(b)) + &ComplexMatrix::ones(d, d).scale(re(a));
    let bm = &ComplexMatrix::identity(d).scale(re(a)) + &ComplexMatrix::ones(d, d).scale(re(b));
    MatrixTriple::from_cldui_pair(am, bm)
}

/// Mixtures of Dicke projectors: LDUI (A, A) with A = diag(Y) + tilde(Y)/2
/// for a real symmetric Y.
pub fn dicke(y: &ComplexMatrix) -> Result<MatrixTriple> {
    let d = y.require_square()?;
    let tol = Tolerance::default();
    let real_sym = y.entries().iter().all(|z| z.im.abs() <= tol.scaled(y.max_abs()))
        && y.max_abs_diff(&y.transpose()) <= tol.scaled(y.max_abs());
    if !real_sym {
        return Err(Error::InvalidParameter("Y must be real symmetric".into()));
    }
    let a = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            y.get(i, i)
        } else {
            y.get(i, j) * 0.5
        }
    });
    MatrixTriple::from_ldui_pair(a.clone(), a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtSide {
    /// C = B: invariant under partial transposition of the second factor.
    B,
    /// C = B^T: invariant under partial transposition of the first factor.
    BTranspose,
}

/// Partial-transpose invariant triples (A, B, B) or (A, B, B^T).
pub fn pt_invariant(a: ComplexMatrix, b: ComplexMatrix, side: PtSide) -> Result<MatrixTriple> {
    let cm = match side {
        PtSide::B => b.clone(),
        PtSide::BTranspose => b.transpose(),
    };
    MatrixTriple::new(a, b, cm)
}

/// The A = J family: (J, B, C) with unit-diagonal B and C.
pub fn a_equals_j(b: ComplexMatrix, cm: ComplexMatrix) -> Result<MatrixTriple> {
    let d = b.require_square()?;
    MatrixTriple::new(ComplexMatrix::ones(d, d), b, cm)
}

/// Canonical NPT family: LDUI with A_ii = a, A_ij = (c+b)/2 and swap-slot
/// entries (c-b)/2 off the diagonal.
pub fn canonical_npt(a: f64, b: f64, cc: f64, d: usize) -> Result<MatrixTriple> {
    let am = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            re(a)
        } else {
            re((cc + b) / 2.0)
        }
    });
    let cm = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            re(a)
        } else {
            re((cc - b) / 2.0)
        }
    });
    MatrixTriple::from_ldui_pair(am, cm)
}

/// The 3x3 edge-state family, parameterized by b > 0, an angle
/// theta in (-pi/3, pi/3) \ {0}, and three C^3 vectors eta, zeta, xi with
/// <x|x> = 2 cos(theta) and pairwise overlap moduli at most one.
pub fn edge_3x3(
    b: f64,
    theta: f64,
    eta: &[Complex64],
    zeta: &[Complex64],
    xi: &[Complex64],
) -> Result<MatrixTriple> {
    if b <= 0.0 {
        return Err(Error::InvalidParameter("b must be positive".into()));
    }
    let third = std::f64::consts::PI / 3.0;
    if theta == 0.0 || theta <= -third || theta >= third {
        return Err(Error::InvalidParameter(
            "theta must lie in (-pi/3, pi/3) and be non-zero".into(),
        ));
    }
    if eta.len() != 3 || zeta.len() != 3 || xi.len() != 3 {
        return Err(Error::Dimension("vectors must lie in C^3".into()));
    }
    let tol = Tolerance::default();
    let ip = |x: &[Complex64], y: &[Complex64]| {
        (0..3).fold(c(0.0, 0.0), |acc, i| acc + x[i].conj() * y[i])
    };
    let norm_target = 2.0 * theta.cos();
    for (name, v) in [("eta", eta), ("zeta", zeta), ("xi", xi)] {
        let n = ip(v, v);
        if (n - re(norm_target)).norm() > tol.scaled(norm_target).max(1e-9) {
            return Err(Error::InvalidParameter(format!(
                "<{name}|{name}> must equal 2 cos(theta)"
            )));
        }
    }
    for (name, v) in [
        ("eta_xi", ip(eta, xi)),
        ("xi_zeta", ip(xi, zeta)),
        ("zeta_eta", ip(zeta, eta)),
    ] {
        if v.norm() > 1.0 + tol.scaled(1.0).max(1e-9) {
            return Err(Error::InvalidParameter(format!(
                "overlap {name} exceeds modulus one"
            )));
        }
    }
    let diag = re(norm_target);
    let eip = Complex64::from_polar(1.0, theta);
    let eim = eip.conj();
    let inv_b = 1.0 / b;
    let am = ComplexMatrix::new(
        3,
        3,
        vec![
            diag, re(inv_b), re(b),
            re(b), diag, re(inv_b),
            re(inv_b), re(b), diag,
        ],
    )?;
    let bm = ComplexMatrix::new(
        3,
        3,
        vec![
            diag, -eip, -eim,
            -eim, diag, -eip,
            -eip, -eim, diag,
        ],
    )?;
    let cm = ComplexMatrix::new(
        3,
        3,
        vec![
            diag, ip(eta, xi), ip(zeta, xi),
            ip(xi, eta), diag, ip(zeta, eta),
            ip(xi, zeta), ip(eta, zeta), diag,
        ],
    )?;
    MatrixTriple::new(am, bm, cm)
}

/// The generalized Choi map for an entrywise non-negative A:
/// `Z -> diag(A |diag Z>) - tilde(Z)`, i.e. the CDUC map with
/// B = diag(A) - tilde(J).
pub fn choi_general(a: ComplexMatrix) -> Result<CovariantMap> {
    let d = a.require_square()?;
    let b = &a.diagonal_matrix()? - &tilde(&ComplexMatrix::ones(d, d))?;
    let triple = MatrixTriple::from_cldui_pair(a, b)?;
    Ok(CovariantMap::new(MapClass::Cduc, triple))
}

/// Three-parameter Choi-type map in dimension 3 with cyclic diagonal
/// weights (a, b, c).
pub fn choi_cho(a: f64, b: f64, cc: f64) -> Result<CovariantMap> {
    let am = ComplexMatrix::from_real(3, 3, &[a, b, cc, cc, a, b, b, cc, a])?;
    choi_general(am)
}

/// Four-parameter Choi-type variant in dimension 3.
pub fn choi_kye(a: f64, c1: f64, c2: f64, c3: f64) -> Result<CovariantMap> {
    let am = ComplexMatrix::from_real(3, 3, &[a, 0.0, c1, c2, a, 0.0, 0.0, c3, a])?;
    choi_general(am)
}

/// Cyclic-shift Choi maps: A = (d-k-1) I + sum_{j=1..k} S^j with S the
/// cyclic permutation matrix.
pub fn tau(d: usize, k: usize) -> Result<CovariantMap> {
    if d < 2 || k == 0 || k >= d {
        return Err(Error::InvalidParameter(
            "tau requires d >= 2 and 1 <= k <= d-1".into(),
        ));
    }
    let mut a = ComplexMatrix::identity(d).scale(re((d - k - 1) as f64));
    for j in 1..=k {
        // (S^j)_{(i + j) mod d, i} = 1
        for i in 0..d {
            let r = (i + j) % d;
            a.set(r, i, a.get(r, i) + re(1.0));
        }
    }
    choi_general(a)
}

/// Positive non-decomposable map with one distinguished direction; DOC for
/// every dimension d >= 2.
pub fn lambda(d: usize) -> Result<CovariantMap> {
    if d < 2 {
        return Err(Error::InvalidParameter("lambda requires d >= 2".into()));
    }
    let f = 1.0 / (d as f64 - 1.0);
    let s = f.sqrt();
    let a = ComplexMatrix::from_fn(d, d, |i, j| {
        if i < d - 1 && j < d - 1 {
            re(f)
        } else if i == d - 1 && j == d - 1 {
            re(1.0)
        } else {
            re(0.0)
        }
    });
    let mut b = a.diagonal_matrix()?;
    for j in 0..d.saturating_sub(2) {
        b.set(d - 1, j, re(s));
        b.set(j, d - 1, re(s));
    }
    let mut cm = a.diagonal_matrix()?;
    cm.set(d - 1, d - 2, re(s));
    cm.set(d - 2, d - 1, re(s));
    let triple = MatrixTriple::new(a, b, cm)?;
    Ok(CovariantMap::new(MapClass::Doc, triple))
}

/// Schur multiplier map Z -> S . Z (Hadamard product).
pub fn schur(s: ComplexMatrix) -> Result<CovariantMap> {
    let a = s.diagonal_matrix()?;
    let triple = MatrixTriple::from_cldui_pair(a, s)?;
    Ok(CovariantMap::new(MapClass::Cduc, triple))
}

/// Completely depolarizing map Z -> Tr(Z) I (unnormalized).
pub fn depolarizing(d: usize) -> CovariantMap {
    let triple = MatrixTriple::diagonal(ComplexMatrix::ones(d, d)).expect("square");
    CovariantMap::new(classify_triple(&triple, &Tolerance::default()), triple)
}

/// Completely dephasing map Z -> diag(Z).
pub fn dephasing(d: usize) -> CovariantMap {
    classical(ComplexMatrix::identity(d)).expect("identity is square")
}

/// Classical maps Z -> diag(A |diag Z>): both DUC and CDUC.
pub fn classical(a: ComplexMatrix) -> Result<CovariantMap> {
    let triple = MatrixTriple::diagonal(a)?;
    Ok(CovariantMap::new(
        classify_triple(&triple, &Tolerance::default()),
        triple,
    ))
}

/// Unitary covariant map Z -> a Tr(Z) I + b Z^T.
pub fn uc(a: f64, b: f64, d: usize) -> Result<CovariantMap> {
    Ok(CovariantMap::new(MapClass::Duc, werner(a, b, d)?))
}

/// Conjugate unitary covariant map Z -> a Tr(Z) I + b Z.
pub fn cuc(a: f64, b: f64, d: usize) -> Result<CovariantMap> {
    Ok(CovariantMap::new(MapClass::Cduc, isotropic(a, b, d)?))
}

/// Diagonal-preserving maps: DOC with A = I, B = X + I, C = Y + I for
/// self-adjoint X, Y with zero diagonal.
pub fn diag_preserving(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<CovariantMap> {
    let d = x.require_square()?;
    if y.require_square()? != d {
        return Err(Error::Dimension("X and Y must share dimension".into()));
    }
    let tol = Tolerance::default();
    for (name, m) in [("X", x), ("Y", y)] {
        let zero_diag = m.diagonal().iter().all(|z| z.norm() <= tol.scaled(m.max_abs()));
        if !zero_diag || m.hermiticity_defect() > tol.scaled(m.max_abs()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be self-adjoint with zero diagonal"
            )));
        }
    }
    let id = ComplexMatrix::identity(d);
    let triple = MatrixTriple::new(id.clone(), &id + x, &id + y)?;
    Ok(CovariantMap::new(MapClass::Doc, triple))
}

/// One-parameter PPT-entangled family in dimension 3 together with the
/// Choi-type map that detects it.
#[derive(Debug, Clone, Serialize)]
pub struct StormerBundle {
    pub state: MatrixTriple,
    pub witness_map: CovariantMap,
}

pub fn stormer(mu: f64) -> Result<StormerBundle> {
    if mu < 0.0 {
        return Err(Error::InvalidParameter("mu must be non-negative".into()));
    }
    let m2 = 4.0 * mu * mu;
    let a = ComplexMatrix::from_real(
        3,
        3,
        &[2.0 * mu, m2, 1.0, 1.0, 2.0 * mu, m2, m2, 1.0, 2.0 * mu],
    )?;
    let b = ComplexMatrix::ones(3, 3).scale(re(2.0 * mu));
    let state = MatrixTriple::from_cldui_pair(a, b)?;
    let witness_map = choi_cho(1.0, mu, 0.0)?;
    Ok(StormerBundle { state, witness_map })
}

/// The fixed triple whose pairs are both certified separable while the
/// triple itself is PPT entangled.
pub fn section8_nontcp() -> MatrixTriple {
    let a = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        .expect("static");
    let b = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0])
        .expect("static");
    let cm = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, -1.0, 1.0])
        .expect("static");
    MatrixTriple::new(a, b, cm).expect("static")
}

/// Unit-rank LDUI matrix (alpha |ij> + beta |ji>)(gamma <ij| + delta <ji|).
pub fn unit_rank_ldui(
    d: usize,
    i: usize,
    j: usize,
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
) -> Result<MatrixTriple> {
    if i >= d || j >= d || i == j {
        return Err(Error::InvalidParameter(
            "indices must be distinct and within range".into(),
        ));
    }
    let mut a = ComplexMatrix::zeros(d, d);
    let mut cm = ComplexMatrix::zeros(d, d);
    a.set(i, j, alpha * gamma);
    a.set(j, i, beta * delta);
    cm.set(i, j, alpha * delta);
    cm.set(j, i, beta * gamma);
    MatrixTriple::from_ldui_pair(a, cm)
}

/// Canonical projectors on C^d (x) C^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorKind {
    /// Projection onto the symmetric subspace, (I + F)/2.
    SymmetricPs,
    /// Projection onto the antisymmetric subspace, (I - F)/2.
    AntisymmetricPa,
    /// The flip operator F |ab> = |ba> (an involution, not a projector).
    FlipF,
    /// Projection onto the maximally entangled vector, |psi><psi| / d.
    MaxentPomega,
    /// Projection onto span{|ii>}.
    EqualPeq,
}

pub fn projector(kind: ProjectorKind, d: usize) -> Result<BipartiteMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter("projectors need d >= 2".into()));
    }
    let mut x = BipartiteMatrix::zeros(d);
    match kind {
        ProjectorKind::FlipF => {
            for i in 0..d {
                for j in 0..d {
                    x.set(i, j, j, i, re(1.0));
                }
            }
        }
        ProjectorKind::SymmetricPs | ProjectorKind::AntisymmetricPa => {
            let sign = if kind == ProjectorKind::SymmetricPs { 0.5 } else { -0.5 };
            for i in 0..d {
                for j in 0..d {
                    x.set(i, j, j, i, x.get(i, j, j, i) + re(sign));
                    x.set(i, j, i, j, x.get(i, j, i, j) + re(0.5));
                }
            }
        }
        ProjectorKind::EqualPeq => {
            for i in 0..d {
                x.set(i, i, i, i, re(1.0));
            }
        }
        ProjectorKind::MaxentPomega => {
            for i in 0..d {
                for j in 0..d {
                    x.set(i, i, j, j, re(1.0 / d as f64));
                }
            }
        }
    }
    Ok(x)
}

/// Explicit TCP witness for the Werner family on its whole separable range
/// b in [-a/d, a] (a > 0): a convex combination of the two endpoint
/// constructions (a Fourier-column witness at b = -a/d, a completely
/// positive factorization at b = a).
pub fn werner_ppt_witness(a: f64, b: f64, d: usize) -> Result<TcpWitness> {
    if d < 2 || a <= 0.0 {
        return Err(Error::InvalidParameter("need d >= 2 and a > 0".into()));
    }
    let lo = -a / d as f64;
    let tol = Tolerance::default();
    if b < lo - tol.scaled(a) || b > a + tol.scaled(a) {
        return Err(Error::InvalidParameter(format!(
            "b = {b} is outside the separable range [{lo}, {a}]"
        )));
    }
    let mix = ((b - lo) / (a - lo)).clamp(0.0, 1.0);
    let low = werner_negative_endpoint_witness(a, d)?;
    let high = werner_positive_endpoint_witness(a, d)?;
    if mix == 0.0 {
        return Ok(low);
    }
    if mix == 1.0 {
        return Ok(high);
    }
    low.scaled(1.0 - mix)?.concat(&high.scaled(mix)?)
}

/// Witness for the b = -a/d endpoint: Fourier columns produce the swap
/// slot a I - (a/d) J exactly, a cyclic dephasing keeps the B slot
/// diagonal, and disjoint-support pair columns top up the off-diagonal of
/// A.
fn werner_negative_endpoint_witness(a: f64, d: usize) -> Result<TcpWitness> {
    let s = (a / d as f64).powf(0.25);
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut fourier: Option<TcpWitness> = None;
    for k in 1..d {
        let v: Vec<Complex64> = (0..d)
            .map(|j| Complex64::from_polar(s, omega * (j * k) as f64))
            .collect();
        let w: Vec<Complex64> = vec![re(s); d];
        let col = TcpWitness::from_vectors(&v, &w)?;
        fourier = Some(match fourier {
            Some(acc) => acc.concat(&col)?,
            None => col,
        });
    }
    let fourier = fourier
        .ok_or_else(|| Error::InvalidParameter("need d >= 2".into()))?
        .dephased_b();
    let mut out = fourier;
    let p = (a / d as f64).powf(0.25);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut v = vec![c(0.0, 0.0); d];
                let mut w = vec![c(0.0, 0.0); d];
                v[i] = re(p);
                w[j] = re(p);
                out = out.concat(&TcpWitness::from_vectors(&v, &w)?)?;
            }
        }
    }
    Ok(out)
}

/// Witness for the b = a endpoint: A = C = a(I + J) is completely positive
/// with factor sqrt(a) [I | ones]; dephasing the B slot lands on the
/// Werner triple.
fn werner_positive_endpoint_witness(a: f64, d: usize) -> Result<TcpWitness> {
    let sa = a.sqrt();
    let n = ComplexMatrix::from_fn(d, d + 1, |i, j| {
        if j < d {
            if i == j {
                re(sa)
            } else {
                re(0.0)
            }
        } else {
            re(sa)
        }
    });
    let am = &ComplexMatrix::identity(d).scale(re(a)) + &ComplexMatrix::ones(d, d).scale(re(a));
    let (_, witness) = cp_to_tcp(&am, &n, &Tolerance::default())?;
    Ok(witness.dephased_b())
}

/// String-dispatch generator used by the command-line front end.
pub fn generate(family: &str, params: &serde_json::Value) -> Result<GalleryItem> {
    let bad = |msg: &str| Error::InvalidParameter(format!("{family}: {msg}"));
    let num = |key: &str| -> Result<f64> {
        params
            .get(key)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| bad(&format!("missing numeric parameter '{key}'")))
    };
    let int = |key: &str| -> Result<usize> {
        params
            .get(key)
            .and_then(|v| v.as_u64())
            .map(|v| v as usize)
            .ok_or_else(|| bad(&format!("missing integer parameter '{key}'")))
    };
    let matrix = |key: &str| -> Result<ComplexMatrix> {
        let v = params
            .get(key)
            .ok_or_else(|| bad(&format!("missing matrix parameter '{key}'")))?;
        serde_json::from_value(v.clone()).map_err(|e| bad(&format!("bad matrix '{key}': {e}")))
    };
    let cvec = |key: &str| -> Result<Vec<Complex64>> {
        let v = params
            .get(key)
            .ok_or_else(|| bad(&format!("missing vector parameter '{key}'")))?;
        let raw: Vec<[f64; 2]> = serde_json::from_value(v.clone())
            .map_err(|e| bad(&format!("bad vector '{key}': {e}")))?;
        Ok(raw.into_iter().map(|[r, i]| c(r, i)).collect())
    };
    let scalar = |key: &str| -> Result<Complex64> {
        let v = params
            .get(key)
            .ok_or_else(|| bad(&format!("missing complex parameter '{key}'")))?;
        let raw: [f64; 2] = serde_json::from_value(v.clone())
            .map_err(|e| bad(&format!("bad complex '{key}': {e}")))?;
        Ok(c(raw[0], raw[1]))
    };
    let state = |class, triple| Ok(GalleryItem::State { class, triple });
    match family {
        "diagonal" => state(InvariantClass::Ldui, diagonal(matrix("A")?)?),
        "werner" => state(InvariantClass::Ldui, werner(num("a")?, num("b")?, int("d")?)?),
        "isotropic" => state(
            InvariantClass::Cldui,
            isotropic(num("a")?, num("b")?, int("d")?)?,
        ),
        "dicke" => state(InvariantClass::Ldui, dicke(&matrix("Y")?)?),
        "pt_invariant" => {
            let side = match params.get("side").and_then(|v| v.as_str()) {
                Some("B") | None => PtSide::B,
                Some("B_transpose") => PtSide::BTranspose,
                Some(other) => return Err(bad(&format!("unknown side '{other}'"))),
            };
            state(InvariantClass::Ldoi, pt_invariant(matrix("A")?, matrix("B")?, side)?)
        }
        "a_equals_j" => state(InvariantClass::Ldoi, a_equals_j(matrix("B")?, matrix("C")?)?),
        "canonical_npt" => state(
            InvariantClass::Ldui,
            canonical_npt(num("a")?, num("b")?, num("c")?, int("d")?)?,
        ),
        "edge_3x3" => state(
            InvariantClass::Ldoi,
            edge_3x3(
                num("b")?,
                num("theta")?,
                &cvec("eta")?,
                &cvec("zeta")?,
                &cvec("xi")?,
            )?,
        ),
        "choi_general" => Ok(GalleryItem::Map { map: choi_general(matrix("A")?)? }),
        "choi_cho" => Ok(GalleryItem::Map {
            map: choi_cho(num("a")?, num("b")?, num("c")?)?,
        }),
        "choi_kye" => Ok(GalleryItem::Map {
            map: choi_kye(num("a")?, num("c1")?, num("c2")?, num("c3")?)?,
        }),
        "tau" => Ok(GalleryItem::Map { map: tau(int("d")?, int("k")?)? }),
        "lambda" => Ok(GalleryItem::Map { map: lambda(int("d")?)? }),
        "schur" => Ok(GalleryItem::Map { map: schur(matrix("S")?)? }),
        "depolarizing" => Ok(GalleryItem::Map { map: depolarizing(int("d")?) }),
        "dephasing" => Ok(GalleryItem::Map { map: dephasing(int("d")?) }),
        "classical" => Ok(GalleryItem::Map { map: classical(matrix("A")?)? }),
        "uc" => Ok(GalleryItem::Map { map: uc(num("a")?, num("b")?, int("d")?)? }),
        "cuc" => Ok(GalleryItem::Map { map: cuc(num("a")?, num("b")?, int("d")?)? }),
        "diag_preserving" => Ok(GalleryItem::Map {
            map: diag_preserving(&matrix("X")?, &matrix("Y")?)?,
        }),
        "stormer" => {
            let bundle = stormer(num("mu")?)?;
            Ok(GalleryItem::Bundle {
                state: bundle.state,
                witness_map: bundle.witness_map,
            })
        }
        "section8_nontcp" => state(InvariantClass::Ldoi, section8_nontcp()),
        "unit_rank_ldui" => state(
            InvariantClass::Ldui,
            unit_rank_ldui(
                int("d")?,
                int("i")?,
                int("j")?,
                scalar("alpha")?,
                scalar("beta")?,
                scalar("gamma")?,
                scalar("delta")?,
            )?,
        ),
        other => Err(Error::InvalidParameter(format!("unknown family '{other}'"))),
    }
}
