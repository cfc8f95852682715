//! Thin wrappers around nalgebra's dense decompositions.
//!
//! Everything in the crate works on [`ComplexMatrix`]; the conversions here
//! are the only place the nalgebra types appear. Dimensions are small
//! (d <= ~16 for triples, d^2 for bipartite matrices), so full dense
//! decompositions are always appropriate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::matcore::ComplexMatrix;
use crate::{Error, Result};

const EIG_EPS: f64 = 1e-13;
const MAX_ITER: usize = 50_000;

pub(crate) fn to_dmatrix(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

pub(crate) fn from_dmatrix(m: &DMatrix<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of the Hermitian part of `m`, unordered.
pub(crate) fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = m.hermitize()?;
    if h.rows() == 0 {
        return Ok(vec![]);
    }
    let dm = to_dmatrix(&h);
    let eig = dm
        .try_symmetric_eigen(EIG_EPS, MAX_ITER)
        .ok_or_else(|| Error::Numerical("hermitian eigendecomposition did not converge".into()))?;
    Ok(eig.eigenvalues.iter().cloned().collect())
}

/// Full Hermitian eigendecomposition of the Hermitian part of `m`.
/// Returns (eigenvalues, eigenvector columns).
pub(crate) fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = m.hermitize()?;
    let dm = to_dmatrix(&h);
    let eig = dm
        .try_symmetric_eigen(EIG_EPS, MAX_ITER)
        .ok_or_else(|| Error::Numerical("hermitian eigendecomposition did not converge".into()))?;
    Ok((
        eig.eigenvalues.iter().cloned().collect(),
        from_dmatrix(&eig.eigenvectors),
    ))
}

/// Singular values, sorted descending.
pub(crate) fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return vec![];
    }
    let mut sv: Vec<f64> = to_dmatrix(m)
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Full SVD `M = U diag(s) V*`. Returns (U, s, V) with singular vectors as
/// columns and `s` descending.
pub(crate) fn svd_full(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let svd = to_dmatrix(m).svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::Numerical("svd did not produce U".into()))?;
    let vt = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("svd did not produce V^T".into()))?;
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    // sort descending, permuting U and V consistently
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let u_cm = ComplexMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_cm = ComplexMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)].conj());
    Ok((u_cm, sorted, v_cm))
}

/// Eigenvalues of a general complex square matrix via its Schur form.
pub(crate) fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let d = m.require_square()?;
    if d == 0 {
        return Ok(vec![]);
    }
    let dm = to_dmatrix(m);
    let schur = nalgebra::linalg::Schur::try_new(dm, EIG_EPS, MAX_ITER)
        .ok_or_else(|| Error::Numerical("schur decomposition did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("schur form yielded no eigenvalues".into()))?;
    Ok(eig.iter().cloned().collect())
}

/// Least-squares solve of `target ~ sum_j c_j basis_j`: returns the
/// coefficients and the Frobenius norm of the residual. Matrices are
/// flattened row-major.
pub(crate) fn span_solve(
    basis: &[&ComplexMatrix],
    target: &ComplexMatrix,
) -> Result<(Vec<Complex64>, f64)> {
    let n = target.rows() * target.cols();
    let r = basis.len();
    if r == 0 {
        return Ok((vec![], target.max_abs() * (n as f64).sqrt()));
    }
    let mat = DMatrix::from_fn(n, r, |i, j| basis[j].entries()[i]);
    let rhs = DMatrix::from_fn(n, 1, |i, _| target.entries()[i]);
    let svd = mat.clone().svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numerical(format!("least squares solve failed: {e}")))?;
    let residual = &mat * &coeffs - &rhs;
    let res_norm = residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok((coeffs.iter().cloned().collect(), res_norm))
}

/// Max-entry distance of `Y Z^*` from the identity; finite matrices only.
pub(crate) fn inverse_pair_defect(y: &[Vec<Complex64>], z: &[Vec<Complex64>]) -> f64 {
    let r = y.len();
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            // (Y Z^*)_{ij} = sum_k Y_{ik} conj(Z_{jk})
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..r {
                acc += y[i][k] * z[j][k].conj();
            }
            let target = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

/// Numerical rank of the matrix whose columns are the flattened `mats`.
pub(crate) fn stacked_rank(mats: &[&ComplexMatrix], rel_eps: f64) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let n = mats[0].rows() * mats[0].cols();
    let mat = DMatrix::from_fn(n, mats.len(), |i, j| mats[j].entries()[i]);
    let sv = mat.svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_eps * smax).count()
}
