//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{NgcaError, Result};
use crate::scalar::Real;

/// Eigendecomposition of a symmetric matrix with eigenvalues in descending
/// order. Each eigenvector's largest-magnitude entry is positive.
#[derive(Debug, Clone)]
pub struct SortedEigen<T: Real> {
    pub values: DVector<T>,
    pub vectors: DMatrix<T>,
}

pub fn sym_eigen_desc<T: Real>(m: &DMatrix<T>) -> Result<SortedEigen<T>> {
    if !m.is_square() {
        return Err(NgcaError::shape(
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    if m.iter().any(|v| !v.finite()) {
        return Err(NgcaError::Numeric(
            "non-finite entry in symmetric eigenproblem".into(),
        ));
    }
    let d = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), T::default_epsilon(), 10_000 * d.max(1))
        .ok_or_else(|| NgcaError::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(d, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(SortedEigen { values, vectors })
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn fix_sign<T: Real>(v: &mut DVector<T>) {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v.len() > 0 && v[best] < T::zero() {
        v.neg_mut();
    }
}

/// Mirrors the average of `m` and its transpose into both triangles, so the
/// result is exactly symmetric.
pub fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let d = m.nrows();
    let half = T::lit(0.5);
    for i in 0..d {
        for j in (i + 1)..d {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Orthonormal basis for the column span of `m` via thin QR.
///
/// Fails when a diagonal entry of R falls below `1e-10 * max|R_kk|` (or the
/// matrix is numerically zero), i.e. the columns do not span `ncols` dims.
pub fn orthonormalize<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let k = m.ncols();
    if k == 0 || m.nrows() < k {
        return Err(NgcaError::RankDeficient(format!(
            "cannot orthonormalize {} columns in dimension {}",
            k,
            m.nrows()
        )));
    }
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(T::zero(), |a, b| a.max(b));
    let col_scale = m.column_iter().map(|c| c.norm()).fold(T::zero(), |a, b| a.max(b));
    if col_scale <= T::zero() || scale <= T::zero() {
        return Err(NgcaError::RankDeficient("all columns are zero".into()));
    }
    let tol = T::lit(1e-10) * scale;
    for i in 0..k {
        let rii = r[(i, i)];
        if rii.abs() <= tol {
            return Err(NgcaError::RankDeficient(format!(
                "column {} is linearly dependent on the previous ones (|R_kk| = {:e})",
                i,
                rii.abs().as_f64()
            )));
        }
        if rii < T::zero() {
            q.column_mut(i).neg_mut();
        }
    }
    Ok(q)
}

/// Orthogonal projector `B Bᵀ` onto the span of orthonormal columns `B`.
pub fn projector<T: Real>(basis: &DMatrix<T>) -> DMatrix<T> {
    basis * basis.transpose()
}

/// Column means of an `n x d` sample matrix.
pub fn column_means<T: Real>(x: &DMatrix<T>) -> DVector<T> {
    let n = T::from_count(x.nrows().max(1));
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n))
}

/// Subtracts `mean` from every row.
pub fn center_rows<T: Real>(x: &DMatrix<T>, mean: &DVector<T>) -> DMatrix<T> {
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    out
}

/// `(1/n) XᵀX`, exactly symmetric.
pub fn second_moment<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    let n = T::from_count(x.nrows().max(1));
    let mut s = x.tr_mul(x) / n;
    symmetrize(&mut s);
    s
}

pub fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.norm()
}
