//! Subspace comparison and the PCA baseline.

use crate::dataset::DataMatrix;
use crate::error::{NgcaError, Result};
use crate::linalg;
use crate::lsngca::{split_is_degenerate, GammaMatrix, NUMERICAL_GAP_TOL};
use crate::scalar::Real;
use crate::subspace::{Frame, Subspace};

/// An estimated subspace and the reference it is scored against.
#[derive(Debug, Clone, Copy)]
pub struct SubspacePair<'a, T: Real> {
    estimate: &'a Subspace<T>,
    reference: &'a Subspace<T>,
}

impl<'a, T: Real> SubspacePair<'a, T> {
    pub fn new(estimate: &'a Subspace<T>, reference: &'a Subspace<T>) -> Result<Self> {
        if estimate.frame() != reference.frame() {
            return Err(NgcaError::FrameMismatch(
                estimate.frame().to_string(),
                reference.frame().to_string(),
            ));
        }
        if estimate.ambient_dim() != reference.ambient_dim() {
            return Err(NgcaError::Metric(format!(
                "ambient dimensions differ: {} vs {}",
                estimate.ambient_dim(),
                reference.ambient_dim()
            )));
        }
        Ok(Self { estimate, reference })
    }

    pub fn estimate(&self) -> &Subspace<T> {
        self.estimate
    }

    pub fn reference(&self) -> &Subspace<T> {
        self.reference
    }

    /// Singular values of `Êᵀ E*`, clamped to `[0, 1]`, descending.
    fn cosines(&self) -> Vec<T> {
        let cross = self.estimate.basis().tr_mul(self.reference.basis());
        let mut sv: Vec<T> = cross
            .singular_values()
            .iter()
            .map(|s| s.max(T::zero()).min(T::one()))
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }
}

/// Mean squared residual of the estimated basis vectors after projection onto
/// the reference, `1 - tr(Êᵀ P Ê) / d_s`. Lies in `[0, 1]`.
pub fn subspace_error<T: Real>(pair: &SubspacePair<'_, T>) -> T {
    let cross = pair.reference.basis().tr_mul(pair.estimate.basis());
    let d_s = T::from_count(pair.estimate.dim());
    (T::one() - cross.norm_squared() / d_s).max(T::zero()).min(T::one())
}

/// `inf ‖Ê - E*‖_F` over orthonormal bases of both spaces, in closed form
/// `sqrt(2 d_s - 2 Σ σ_i)` with `σ_i` the singular values of `Êᵀ E*`.
pub fn subspace_distance<T: Real>(pair: &SubspacePair<'_, T>) -> Result<T> {
    if pair.estimate.dim() != pair.reference.dim() {
        return Err(NgcaError::Metric(format!(
            "distance needs equal dimensions, got {} and {}",
            pair.estimate.dim(),
            pair.reference.dim()
        )));
    }
    let sum = pair.cosines().into_iter().fold(T::zero(), |a, s| a + s);
    let two = T::lit(2.0);
    Ok((two * T::from_count(pair.estimate.dim()) - two * sum)
        .max(T::zero())
        .sqrt())
}

/// Principal angles in ascending order.
pub fn principal_angles<T: Real>(pair: &SubspacePair<'_, T>) -> Vec<T> {
    pair.cosines().into_iter().map(|c| c.acos()).collect()
}

/// Top-`d_s` eigenvectors of the centred sample covariance.
pub fn pca_baseline<T: Real>(x: &DataMatrix<T>, d_s: usize) -> Result<Subspace<T>> {
    if x.nrows() < 2 {
        return Err(NgcaError::EmptyInput("PCA needs at least two samples".into()));
    }
    if d_s == 0 || d_s > x.ncols() {
        return Err(NgcaError::Dimension(format!(
            "need 1 <= d_s <= {}, got {d_s}",
            x.ncols()
        )));
    }
    let mean = linalg::column_means(x.as_matrix());
    let cov = linalg::second_moment(&linalg::center_rows(x.as_matrix(), &mean));
    let scatter = GammaMatrix::from_symmetric(cov)?;
    let basis = scatter.eigenvectors().columns(0, d_s).into_owned();
    Ok(Subspace::new(basis, Frame::Original)?.with_degenerate_gap(split_is_degenerate(
        scatter.eigenvalues(),
        d_s,
        NUMERICAL_GAP_TOL,
    )))
}
