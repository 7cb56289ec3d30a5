//! Least-squares non-Gaussian component analysis.
//!
//! After whitening, the log-density of the data splits into a standard
//! normal part and a factor that depends on `y` only through its projection
//! onto the non-Gaussian index space. Hence `ν = ∇ log p(y) + y` lies in that
//! space, and the top eigenvectors of `Γ = E[ν νᵀ]` span it. The estimate
//! is mapped back to the original coordinates through `Σ^{-1/2}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{center_whiten, DataMatrix, Whitening};
use crate::error::{NgcaError, Result};
use crate::linalg::{self, SortedEigen};
use crate::lsldg::{self, GradientModel, LsldgConfig};
use crate::scalar::Real;
pub use crate::subspace::{Frame, Subspace};

/// Relative eigen-gap below which [`top_eigenspace`] flags the split as
/// degenerate.
pub const NUMERICAL_GAP_TOL: f64 = 1e-12;

/// Second-moment matrix of `ν_i = g(y_i) + y_i` with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct GammaMatrix<T: Real> {
    matrix: DMatrix<T>,
    eigen: SortedEigen<T>,
}

impl<T: Real> GammaMatrix<T> {
    /// Wraps a symmetric matrix (used directly by the baselines, which build
    /// their own scatter matrices).
    pub fn from_symmetric(mut matrix: DMatrix<T>) -> Result<Self> {
        linalg::symmetrize(&mut matrix);
        let eigen = linalg::sym_eigen_desc(&matrix)?;
        Ok(Self { matrix, eigen })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[T] {
        self.eigen.values.as_slice()
    }

    /// Eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigen.vectors
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `Γ = (1/n) Σ_i ν_i ν_iᵀ` with `ν_i = G[i,:] + Y[i,:]`.
pub fn compute_gamma<T: Real>(y: &DMatrix<T>, grads: &DMatrix<T>) -> Result<GammaMatrix<T>> {
    if y.shape() != grads.shape() {
        return Err(NgcaError::shape(
            format!("{}x{} gradients", y.nrows(), y.ncols()),
            format!("{}x{}", grads.nrows(), grads.ncols()),
        ));
    }
    if y.nrows() == 0 {
        return Err(NgcaError::EmptyInput("no samples".into()));
    }
    let nu = grads + y;
    GammaMatrix::from_symmetric(linalg::second_moment(&nu))
}

/// Span of the eigenvectors of the `d_s` largest eigenvalues, flagged as
/// degenerate when `λ_{d_s} - λ_{d_s+1} <= 1e-12 * max|λ|`.
pub fn top_eigenspace<T: Real>(gamma: &GammaMatrix<T>, d_s: usize) -> Result<Subspace<T>> {
    top_eigenspace_with_tol(gamma, d_s, NUMERICAL_GAP_TOL)
}

/// As [`top_eigenspace`], additionally flagging the split when the gap is at
/// most `rel_gap_tol` times `|λ_{d_s}|`.
pub fn top_eigenspace_with_tol<T: Real>(
    gamma: &GammaMatrix<T>,
    d_s: usize,
    rel_gap_tol: f64,
) -> Result<Subspace<T>> {
    let d = gamma.dim();
    if d_s == 0 || d_s > d {
        return Err(NgcaError::Dimension(format!(
            "need 1 <= d_s <= {d}, got d_s = {d_s}"
        )));
    }
    let basis = gamma.eigenvectors().columns(0, d_s).into_owned();
    let values = gamma.eigenvalues();
    let degenerate = split_is_degenerate(values, d_s, NUMERICAL_GAP_TOL)
        || gap_is_small(values, d_s, rel_gap_tol);
    Ok(Subspace::new(basis, Frame::Whitened)?.with_degenerate_gap(degenerate))
}

/// Whether the gap after the `d_s`-th eigenvalue is at most `rel_tol` times
/// that eigenvalue's magnitude.
pub fn gap_is_small<T: Real>(values: &[T], d_s: usize, rel_tol: f64) -> bool {
    if d_s >= values.len() {
        return false;
    }
    let last = values[d_s - 1].as_f64();
    let gap = last - values[d_s].as_f64();
    last.abs() == 0.0 || gap <= rel_tol * last.abs()
}

/// Whether the gap after the `d_s`-th eigenvalue is at most `rel_tol` times
/// the largest eigenvalue magnitude. A full-dimensional split is never
/// degenerate.
pub fn split_is_degenerate<T: Real>(values: &[T], d_s: usize, rel_tol: f64) -> bool {
    if d_s >= values.len() {
        return false;
    }
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let gap = (values[d_s - 1] - values[d_s]).as_f64();
    scale == 0.0 || gap <= rel_tol * scale
}

/// Maps a whitened-frame subspace to the original frame, `span(W · basis)`,
/// and re-orthonormalises it.
pub fn pull_back<T: Real>(sub: &Subspace<T>, whitener: &DMatrix<T>) -> Result<Subspace<T>> {
    if sub.frame() != Frame::Whitened {
        return Err(NgcaError::FrameMismatch(
            sub.frame().to_string(),
            Frame::Whitened.to_string(),
        ));
    }
    if whitener.nrows() != sub.ambient_dim() || !whitener.is_square() {
        return Err(NgcaError::shape(
            format!("{0}x{0} whitener", sub.ambient_dim()),
            format!("{}x{}", whitener.nrows(), whitener.ncols()),
        ));
    }
    let mapped = whitener * sub.basis();
    let q = linalg::orthonormalize(&mapped).map_err(|e| match e {
        NgcaError::RankDeficient(msg) => {
            NgcaError::RankDeficient(format!("pulled-back basis collapsed: {msg}"))
        }
        other => other,
    })?;
    Ok(Subspace::new(q, Frame::Original)?.with_degenerate_gap(sub.degenerate_gap()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LsngcaConfig {
    pub lsldg: LsldgConfig,
    /// Relative eigen-gap tolerance for the degenerate-split warning.
    pub gap_tol: f64,
}

impl Default for LsngcaConfig {
    fn default() -> Self {
        Self {
            lsldg: LsldgConfig::default(),
            gap_tol: PIPELINE_GAP_TOL,
        }
    }
}

/// Relative eigen-gap tolerance used by the end-to-end estimators.
///
/// Eigenvalues estimated from finite samples never tie exactly, so the
/// pipelines flag a split unless `λ_{d_s+1}` falls below a quarter of
/// `λ_{d_s}`. On pure Gaussian data the ratio sits above 0.5, on the
/// benchmark generators below 0.01.
pub const PIPELINE_GAP_TOL: f64 = 0.75;

/// Intermediate results of one LSNGCA run.
#[derive(Debug, Clone)]
pub struct LsngcaFit<T: Real> {
    pub subspace: Subspace<T>,
    pub whitened_subspace: Subspace<T>,
    pub whitening: Whitening<T>,
    pub model: GradientModel<T>,
    pub gamma: GammaMatrix<T>,
}

/// Whiten, estimate log-density gradients, eigendecompose `Γ`, pull back.
pub fn run_lsngca<T: Real>(x: &DataMatrix<T>, d_s: usize, seed: u64) -> Result<Subspace<T>> {
    run_lsngca_with(x, d_s, &LsngcaConfig::default(), seed).map(|f| f.subspace)
}

pub fn run_lsngca_with<T: Real>(
    x: &DataMatrix<T>,
    d_s: usize,
    cfg: &LsngcaConfig,
    seed: u64,
) -> Result<LsngcaFit<T>> {
    if d_s == 0 || d_s >= x.ncols() {
        return Err(NgcaError::Dimension(format!(
            "need 1 <= d_s < d_x = {}, got d_s = {d_s}",
            x.ncols()
        )));
    }
    let whitening = center_whiten(x)?;
    let model = lsldg::fit_with(whitening.whitened(), &cfg.lsldg, seed)?;
    let grads = model.predict(whitening.whitened())?;
    let (whitened_subspace, gamma) =
        subspace_from_gradients(whitening.whitened(), &grads, d_s, cfg.gap_tol)?;
    let subspace = pull_back(&whitened_subspace, whitening.whitener())?;
    Ok(LsngcaFit {
        subspace,
        whitened_subspace,
        whitening,
        model,
        gamma,
    })
}

/// LSNGCA steps 3-4 with externally supplied gradients (e.g. exact scores).
pub fn subspace_from_gradients<T: Real>(
    y: &DMatrix<T>,
    grads: &DMatrix<T>,
    d_s: usize,
    gap_tol: f64,
) -> Result<(Subspace<T>, GammaMatrix<T>)> {
    let gamma = compute_gamma(y, grads)?;
    let sub = top_eigenspace_with_tol(&gamma, d_s, gap_tol)?;
    Ok((sub, gamma))
}

/// Full pipeline with supplied gradients of the whitened data.
pub fn run_lsngca_with_gradients<T: Real>(
    whitening: &Whitening<T>,
    grads: &DMatrix<T>,
    d_s: usize,
    gap_tol: f64,
) -> Result<Subspace<T>> {
    let (sub, _) = subspace_from_gradients(whitening.whitened(), grads, d_s, gap_tol)?;
    pull_back(&sub, whitening.whitener())
}
