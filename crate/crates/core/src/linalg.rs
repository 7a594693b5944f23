//! Dense linear-algebra helpers shared by the analysis modules.
//!
//! Everything here works on `nalgebra` dynamic matrices. The sizes involved
//! (NM up to a few hundred) make dense storage and dense eigen-solves the
//! simplest option.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            let mut block = out.view_mut((i * br, j * bc), (br, bc));
            block.copy_from(&(b * s));
        }
    }
    out
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let m = b.nrows();
        out.view_mut((at, at), (m, m)).copy_from(b);
        at += m;
    }
    out
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// All (possibly complex) eigenvalues of a real square matrix via a real
/// Schur decomposition.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    if is_symmetric(m, 1e-14) {
        return Ok(SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect());
    }
    let max_iter = 200 * m.nrows().max(10);
    // The QR sweep occasionally stalls at machine-epsilon tolerance; a
    // slightly looser deflation threshold still gives ~1e-13 accuracy.
    for eps in [f64::EPSILON, 1e-14, 1e-13] {
        if let Some(schur) = Schur::try_new(m.clone(), eps, max_iter) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::Numerical(format!(
        "Schur iteration did not converge after {max_iter} sweeps \
         (n = {}, frobenius norm = {:.3e}, max |entry| = {:.3e})",
        m.nrows(),
        m.norm(),
        m.amax()
    )))
}

/// Spectral radius `max |λ|`.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Eigenvalues of a symmetric matrix, sorted in decreasing order.
pub fn symmetric_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Symmetric square root `L` with `L L = m` for a symmetric positive-definite
/// matrix. Returns the smallest eigenvalue on failure.
pub fn sym_sqrt(m: &DMatrix<f64>) -> std::result::Result<DMatrix<f64>, f64> {
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(min);
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let q = &eig.eigenvectors;
    Ok(q * d * q.transpose())
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Eigen-decomposition `m = U Λ U⁻¹` of a diagonalizable real matrix.
///
/// Columns of `right` are unit-norm right eigenvectors; rows of `left_inv`
/// (= `U⁻¹`) are the matching left eigenvectors, so that
/// `left_inv.row(l) · right.column(l) = 1` and the two families are
/// biorthogonal.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub values: Vec<Complex64>,
    pub right: CMatrix,
    pub left_inv: CMatrix,
    /// Two-norm condition number of `right`.
    pub condition: f64,
}

/// Eigenvector condition number above which a matrix is treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

pub fn diagonalize(m: &DMatrix<f64>) -> Result<Diagonalization> {
    let n = m.nrows();
    if !m.is_square() || n == 0 {
        return Err(Error::Dimension(format!(
            "diagonalize a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if is_symmetric(m, 1e-14) {
        let sym = SymmetricEigen::new(m.clone());
        let right = to_complex(&sym.eigenvectors);
        let left_inv = right.transpose();
        return Ok(Diagonalization {
            values: sym
                .eigenvalues
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
            right,
            left_inv,
            condition: 1.0,
        });
    }

    let values = eigenvalues(m)?;
    let scale = m.norm().max(1.0);
    let cm = to_complex(m);

    // Group numerically repeated eigenvalues and pull a null-space basis of
    // (m - λI) of the group's size from the SVD.
    let cluster_tol = 1e-7 * scale;
    let mut used = vec![false; n];
    let mut out_values = Vec::with_capacity(n);
    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut group = vec![i];
        used[i] = true;
        for j in (i + 1)..n {
            if !used[j] && (values[j] - values[i]).norm() < cluster_tol {
                group.push(j);
                used[j] = true;
            }
        }
        let lambda = group.iter().map(|&g| values[g]).sum::<Complex64>() / group.len() as f64;
        let shifted = &cm - CMatrix::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        for &idx in order.iter().take(group.len()) {
            if svd.singular_values[idx] > 1e-6 * scale {
                return Err(Error::NotDiagonalizable {
                    condition: f64::INFINITY,
                });
            }
            let mut v: CVector = v_t.row(idx).transpose().map(|z| z.conj());
            normalize_phase(&mut v);
            columns.push(v);
            out_values.push(lambda);
        }
    }

    let right = CMatrix::from_columns(&columns);
    let sv = right.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > DEFECTIVE_CONDITION {
        return Err(Error::NotDiagonalizable { condition });
    }
    let left_inv = right
        .clone()
        .try_inverse()
        .ok_or(Error::NotDiagonalizable { condition })?;
    Ok(Diagonalization {
        values: out_values,
        right,
        left_inv,
        condition,
    })
}

/// Unit norm, with the largest-magnitude entry rotated onto the positive
/// real axis. Real eigenvectors come out real.
fn normalize_phase(v: &mut CVector) {
    let (mut best, mut mag) = (0, 0.0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > mag {
            mag = z.norm();
            best = i;
        }
    }
    if mag == 0.0 {
        return;
    }
    let phase = v[best].conj() / mag;
    let norm = v.norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
}
