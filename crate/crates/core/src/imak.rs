//! Iterative metric adaptation for radial kernel functions.
//!
//! The index function is learned instead of fixed: `h(y) = Σ_i α_i
//! exp(-(y - y_i)ᵀ M (y - y_i) / 2σ²)`. For this model the squared
//! informative-normalisation criterion is a generalised Rayleigh quotient
//! `αᵀFα / αᵀGα`, maximised by the top generalised eigenvector. The
//! resulting `β̂` vectors reshape the metric `M ∝ Σ β̂ β̂ᵀ` and the two steps
//! alternate.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{center_whiten, DataMatrix};
use crate::error::{NgcaError, Result};
use crate::linalg;
use crate::lsngca::{pull_back, top_eigenspace_with_tol, GammaMatrix, PIPELINE_GAP_TOL};
use crate::scalar::Real;
use crate::subspace::Subspace;

/// Gram matrix and its coordinate partials for one `(M, σ²)`.
#[derive(Debug, Clone)]
pub struct KernelState<T: Real> {
    metric: DMatrix<T>,
    sigma2: T,
    gram: DMatrix<T>,
    partials: Vec<DMatrix<T>>,
}

impl<T: Real> KernelState<T> {
    pub fn metric(&self) -> &DMatrix<T> {
        &self.metric
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    /// `K[i,j] = k(y_i, y_j)`.
    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// `[∂_r K]_{ij}`: derivative of `k(y_i, y_j)` with respect to the `r`-th
    /// coordinate of `y_i`.
    pub fn partial(&self, r: usize) -> &DMatrix<T> {
        &self.partials[r]
    }

    pub fn nsamples(&self) -> usize {
        self.gram.nrows()
    }
}

fn check_metric<T: Real>(metric: &DMatrix<T>, d: usize) -> Result<()> {
    if metric.shape() != (d, d) {
        return Err(NgcaError::shape(
            format!("{d}x{d} metric"),
            format!("{}x{}", metric.nrows(), metric.ncols()),
        ));
    }
    let scale = metric.abs().max().max(T::one());
    let asym = (metric - metric.transpose()).abs().max();
    if asym > T::lit(1e-10) * scale {
        return Err(NgcaError::Metric("kernel metric is not symmetric".into()));
    }
    let eig = linalg::sym_eigen_desc(metric)?;
    let min = eig.values[d - 1];
    if min < -T::lit(1e-10) * scale {
        return Err(NgcaError::Metric(format!(
            "kernel metric is not positive semidefinite (eigenvalue {:e})",
            min.as_f64()
        )));
    }
    Ok(())
}

/// `K[i,j] = exp(-(y_i - y_j)ᵀ M (y_i - y_j) / 2σ²)` and
/// `[∂_r K]_{ij} = ([M y_j]_r - [M y_i]_r) K[i,j] / σ²`.
pub fn build_kernel<T: Real>(y: &DMatrix<T>, metric: &DMatrix<T>, sigma2: T) -> Result<KernelState<T>> {
    let (n, d) = y.shape();
    if n == 0 {
        return Err(NgcaError::EmptyInput("no samples".into()));
    }
    if !(sigma2 > T::zero()) || !sigma2.finite() {
        return Err(NgcaError::Config("kernel scale must be finite and positive".into()));
    }
    check_metric(metric, d)?;
    let mut m = metric.clone();
    linalg::symmetrize(&mut m);
    let my = y * &m; // row i is (M y_i)ᵀ
    let q: Vec<T> = (0..n).map(|i| y.row(i).dot(&my.row(i))).collect();
    let cross = &my * y.transpose();
    let two_s2 = sigma2 + sigma2;
    let mut gram = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            T::one()
        } else {
            let quad = (q[i] + q[j] - cross[(i, j)] - cross[(j, i)]).max(T::zero());
            (-quad / two_s2).exp()
        }
    });
    linalg::symmetrize(&mut gram);
    let partials = (0..d)
        .map(|r| {
            DMatrix::from_fn(n, n, |i, j| (my[(j, r)] - my[(i, r)]) * gram[(i, j)] / sigma2)
        })
        .collect();
    Ok(KernelState {
        metric: m,
        sigma2,
        gram,
        partials,
    })
}

/// Low-rank form of the criterion matrices: `F = U Uᵀ` with column `r` of
/// `U` equal to `(e_rᵀ Y K - 1ᵀ ∂_r K)ᵀ / n`, and
/// `S = G + F = (1/n) Σ_r A_rᵀ A_r` with `A_r = diag(e_rᵀ Y) K - ∂_r K`.
pub fn criterion_factors<T: Real>(
    y: &DMatrix<T>,
    state: &KernelState<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (n, d) = y.shape();
    if state.nsamples() != n || state.partials.len() != d {
        return Err(NgcaError::shape(
            format!("kernel state for {n} samples in {d} dims"),
            format!("{} samples, {} partials", state.nsamples(), state.partials.len()),
        ));
    }
    let nf = T::from_count(n);
    let inv_n = T::one() / nf;
    let mut u = DMatrix::zeros(n, d);
    let mut s = DMatrix::zeros(n, n);
    for r in 0..d {
        let mut a = state.gram.clone();
        for i in 0..n {
            let yi = y[(i, r)];
            a.row_mut(i).scale_mut(yi);
        }
        a -= &state.partials[r];
        // column sums of A_r give e_rᵀ Y K - 1ᵀ ∂_r K
        for j in 0..n {
            u[(j, r)] = a.column(j).sum() * inv_n;
        }
        s.gemm_tr(inv_n, &a, &a, T::one());
    }
    linalg::symmetrize(&mut s);
    Ok((u, s))
}

/// Dense `F` and `G`, both symmetrised.
pub fn build_fg<T: Real>(y: &DMatrix<T>, state: &KernelState<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (u, s) = criterion_factors(y, state)?;
    let mut f = &u * u.transpose();
    linalg::symmetrize(&mut f);
    let mut g = s - &f;
    linalg::symmetrize(&mut g);
    Ok((f, g))
}

/// Top generalised eigenpair of `F α = η G α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSolution<T: Real> {
    /// Scaled so that `αᵀ G α = 1`.
    pub alpha: DVector<T>,
    pub eta: T,
}

fn regularized_cholesky<T: Real>(g: &DMatrix<T>) -> Result<Cholesky<T, nalgebra::Dyn>> {
    let n = g.nrows();
    if g.iter().any(|v| !v.finite()) {
        return Err(NgcaError::Numeric("non-finite entries in G".into()));
    }
    let ridge = (T::lit(1e-10) * g.trace() / T::from_count(n.max(1))).max(T::zero());
    let mut reg = g.clone();
    for i in 0..n {
        reg[(i, i)] += ridge;
    }
    Cholesky::new(reg).ok_or_else(|| {
        NgcaError::Numeric("G is not positive definite even after regularisation".into())
    })
}

fn finish_alpha<T: Real>(f_alpha: DVector<T>, mut alpha: DVector<T>, g: &DMatrix<T>) -> Result<AlphaSolution<T>> {
    let gq = alpha.dot(&(g * &alpha));
    if !(gq > T::zero()) || !gq.finite() {
        return Err(NgcaError::Numeric("generalised eigenvector has non-positive G-norm".into()));
    }
    let scale = T::one() / gq.sqrt();
    alpha *= scale;
    let eta = f_alpha.dot(&alpha) * scale;
    if !eta.finite() {
        return Err(NgcaError::Numeric("non-finite generalised eigenvalue".into()));
    }
    Ok(AlphaSolution { alpha, eta })
}

/// Dense solve: Cholesky `G + εI = LLᵀ` with `ε = 1e-10 tr(G)/n`, standard
/// eigenproblem for `L⁻¹ F L⁻ᵀ`, back-substitution.
pub fn solve_alpha<T: Real>(f: &DMatrix<T>, g: &DMatrix<T>) -> Result<AlphaSolution<T>> {
    if f.shape() != g.shape() || !f.is_square() || f.nrows() == 0 {
        return Err(NgcaError::shape(
            "two equal square matrices",
            format!("{:?} and {:?}", f.shape(), g.shape()),
        ));
    }
    let chol = regularized_cholesky(g)?;
    let l = chol.l();
    let linv_f = l
        .solve_lower_triangular(f)
        .ok_or_else(|| NgcaError::Numeric("triangular solve failed".into()))?;
    let mut c = l
        .solve_lower_triangular(&linv_f.transpose())
        .ok_or_else(|| NgcaError::Numeric("triangular solve failed".into()))?;
    linalg::symmetrize(&mut c);
    let eig = linalg::sym_eigen_desc(&c)?;
    let top = eig.vectors.column(0).into_owned();
    let alpha = l
        .tr_solve_lower_triangular(&top)
        .ok_or_else(|| NgcaError::Numeric("triangular solve failed".into()))?;
    finish_alpha(f * &alpha, alpha, g)
}

/// Same eigenpair for `F = U Uᵀ` of rank `≤ d`: the top eigenvector `z` of
/// `VᵀV` with `V = L⁻¹U` gives `α ∝ L⁻ᵀ V z`.
pub fn solve_alpha_low_rank<T: Real>(u: &DMatrix<T>, g: &DMatrix<T>) -> Result<AlphaSolution<T>> {
    if u.nrows() != g.nrows() || !g.is_square() || u.ncols() == 0 {
        return Err(NgcaError::shape(
            format!("{0}x{0} G with {0}-row factor", g.nrows()),
            format!("{:?} and {:?}", u.shape(), g.shape()),
        ));
    }
    let chol = regularized_cholesky(g)?;
    let l = chol.l();
    let v = l
        .solve_lower_triangular(u)
        .ok_or_else(|| NgcaError::Numeric("triangular solve failed".into()))?;
    let mut small = v.tr_mul(&v);
    linalg::symmetrize(&mut small);
    let eig = linalg::sym_eigen_desc(&small)?;
    let w = &v * eig.vectors.column(0);
    let alpha = l
        .tr_solve_lower_triangular(&w)
        .ok_or_else(|| NgcaError::Numeric("triangular solve failed".into()))?;
    let f_alpha = u * (u.tr_mul(&alpha));
    finish_alpha(f_alpha, alpha, g)
}

/// Value and gradient of `h(y) = Σ_i α_i k(y, y_i)` at `point`.
pub fn kernel_function<T: Real>(
    y: &DMatrix<T>,
    alpha: &DVector<T>,
    metric: &DMatrix<T>,
    sigma2: T,
    point: &DVector<T>,
) -> (T, DVector<T>) {
    let d = y.ncols();
    let mut value = T::zero();
    let mut grad = DVector::zeros(d);
    for i in 0..y.nrows() {
        let diff = point - y.row(i).transpose();
        let mdiff = metric * &diff;
        let k = (-diff.dot(&mdiff) / (sigma2 + sigma2)).exp();
        value += alpha[i] * k;
        grad -= mdiff * (alpha[i] * k / sigma2);
    }
    (value, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImakConfig {
    pub sigma2_grid: Vec<f64>,
    pub outer_iters: usize,
    /// The `β̂` set counts as vanished when `Σ_k ‖β̂_k‖²` is at most this.
    pub vanish_tol: f64,
    pub gap_tol: f64,
}

impl Default for ImakConfig {
    fn default() -> Self {
        Self {
            sigma2_grid: vec![0.5, 1.0, 2.0, 4.0],
            outer_iters: 10,
            vanish_tol: DEFAULT_VANISH_TOL,
            gap_tol: PIPELINE_GAP_TOL,
        }
    }
}

pub const DEFAULT_VANISH_TOL: f64 = 1e-12;

/// Result of [`run_imak`].
#[derive(Debug, Clone)]
pub struct ImakOutcome<T: Real> {
    pub subspace: Subspace<T>,
    /// Metric in effect after the last update.
    pub metric: DMatrix<T>,
    /// `etas[t][k]`: generalised eigenvalue for scale `k` in iteration `t`.
    pub etas: Vec<Vec<T>>,
    /// `β̂` vectors of the final iteration, one per scale.
    pub betas: Vec<DVector<T>>,
    /// Set when some iteration's `β̂` set vanished and `M` was reset to `I`.
    pub fallback: bool,
}

/// One learned `β̂` per scale for the current metric.
fn imak_step<T: Real>(
    y: &DMatrix<T>,
    metric: &DMatrix<T>,
    sigma2_grid: &[f64],
) -> Result<Vec<(DVector<T>, T)>> {
    sigma2_grid
        .par_iter()
        .map(|&s2| {
            let state = build_kernel(y, metric, T::lit(s2))?;
            let (u, s) = criterion_factors(y, &state)?;
            let mut g = s - &u * u.transpose();
            linalg::symmetrize(&mut g);
            let sol = solve_alpha_low_rank(&u, &g)?;
            // β̂ = (1/n) Σ_i [y_i h(y_i) - ∇h(y_i)] = Uᵀ α
            let beta = u.tr_mul(&sol.alpha);
            Ok((beta, sol.eta))
        })
        .collect()
}

/// Whiten, then alternate `α` solves over the `σ²` grid with metric updates
/// `M ∝ Σ β̂ β̂ᵀ` (trace `d_x`); finally PCA over the last `β̂` set and pull
/// back.
pub fn run_imak<T: Real>(x: &DataMatrix<T>, d_s: usize, cfg: &ImakConfig) -> Result<ImakOutcome<T>> {
    let d = x.ncols();
    if d_s == 0 || d_s >= d {
        return Err(NgcaError::Dimension(format!(
            "need 1 <= d_s < d_x = {d}, got d_s = {d_s}"
        )));
    }
    if cfg.outer_iters == 0 || cfg.sigma2_grid.is_empty() {
        return Err(NgcaError::Config(
            "IMAK needs at least one outer iteration and one kernel scale".into(),
        ));
    }
    if cfg.sigma2_grid.len() < d_s {
        return Err(NgcaError::InsufficientFunctions {
            survivors: cfg.sigma2_grid.len(),
            needed: d_s,
        });
    }
    let whitening = center_whiten(x)?;
    let y = whitening.whitened();
    let mut metric = DMatrix::identity(d, d);
    let mut etas = Vec::with_capacity(cfg.outer_iters);
    let mut betas = Vec::new();
    let mut fallback = false;
    for _ in 0..cfg.outer_iters {
        let step = imak_step(y, &metric, &cfg.sigma2_grid)?;
        etas.push(step.iter().map(|(_, e)| *e).collect());
        betas = step.into_iter().map(|(b, _)| b).collect::<Vec<_>>();
        let mut scatter = DMatrix::zeros(d, d);
        for b in &betas {
            scatter.ger(T::one(), b, b, T::one());
        }
        let tr = scatter.trace();
        if !(tr.as_f64() > cfg.vanish_tol) {
            fallback = true;
            metric = DMatrix::identity(d, d);
        } else {
            metric = scatter * (T::from_count(d) / tr);
            linalg::symmetrize(&mut metric);
        }
    }
    let mut scatter = DMatrix::zeros(d, d);
    for b in &betas {
        scatter.ger(T::one(), b, b, T::one());
    }
    let scatter = GammaMatrix::from_symmetric(scatter)?;
    let whitened = top_eigenspace_with_tol(&scatter, d_s, cfg.gap_tol)?;
    let subspace = pull_back(&whitened, whitening.whitener())?;
    Ok(ImakOutcome {
        subspace,
        metric,
        etas,
        betas,
        fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_diagonal_and_known_entry() {
        let y = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let st = build_kernel(&y, &DMatrix::identity(2, 2), 1.0).unwrap();
        assert_eq!(st.gram()[(0, 0)], 1.0);
        assert_eq!(st.gram()[(1, 1)], 1.0);
        assert!((st.gram()[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        for r in 0..2 {
            assert_eq!(st.partial(r)[(0, 0)], 0.0);
            assert_eq!(st.partial(r)[(1, 1)], 0.0);
        }
    }

    #[test]
    fn non_psd_metric_rejected() {
        let y = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(build_kernel(&y, &m, 1.0), Err(NgcaError::Metric(_))));
    }

    #[test]
    fn diagonal_pencil() {
        let f = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let g = DMatrix::identity(2, 2);
        let sol = solve_alpha(&f, &g).unwrap();
        assert!((sol.eta - 2.0).abs() < 1e-8);
        assert!(sol.alpha[1].abs() < 1e-8);
        assert!((sol.alpha[0].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn equal_pencil_has_unit_eta() {
        let f = DMatrix::<f64>::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let sol = solve_alpha(&f, &f).unwrap();
        assert!((sol.eta - 1.0).abs() < 1e-8);
        let res = &f * &sol.alpha - (&f * &sol.alpha) * sol.eta;
        assert!(res.norm() <= 1e-8);
    }

    #[test]
    fn config_errors() {
        let x = DataMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]).unwrap();
        let cfg = ImakConfig {
            outer_iters: 0,
            ..ImakConfig::default()
        };
        assert!(matches!(run_imak(&x, 1, &cfg), Err(NgcaError::Config(_))));
    }
}
