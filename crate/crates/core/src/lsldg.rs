//! Least-squares log-density gradients.
//!
//! Each coordinate `j` of `∇ log p` is fitted directly with the model
//! `g_j(x) = Σ_i θ_ij ψ_ij(x)`, where `ψ_ij` is the `j`-th partial of a
//! Gaussian bump centred at `c_i` with width `σ_j`. Integration by parts turns
//! the squared error against the unknown score into the empirical criterion
//! `(1/n) Σ [g_j(x)^2 + 2 ∂_j g_j(x)]`, whose ridge-regularised minimiser is
//! `θ_j = -(G_j + λ_j I)^{-1} h_j`. Widths and ridges are chosen per
//! coordinate by k-fold cross-validation on the same criterion.

use std::collections::HashSet;

use nalgebra::{Cholesky, DMatrix, DVector, DVectorView};
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NgcaError, Result};
use crate::linalg;
use crate::scalar::Real;

/// Shared centres and per-coordinate widths of the Gaussian-derivative basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet<T: Real> {
    centers: DMatrix<T>,
    widths: Vec<T>,
}

impl<T: Real> BasisSet<T> {
    /// `centers` is `b x d`, one centre per row; `widths[j]` is `σ_j`.
    pub fn new(centers: DMatrix<T>, widths: Vec<T>) -> Result<Self> {
        if centers.nrows() == 0 {
            return Err(NgcaError::EmptyInput("basis needs at least one centre".into()));
        }
        if widths.len() != centers.ncols() {
            return Err(NgcaError::shape(
                format!("{} widths", centers.ncols()),
                widths.len().to_string(),
            ));
        }
        if widths.iter().any(|s| !(*s > T::zero()) || !s.finite()) {
            return Err(NgcaError::Config("basis widths must be finite and positive".into()));
        }
        Ok(Self { centers, widths })
    }

    pub fn centers(&self) -> &DMatrix<T> {
        &self.centers
    }

    pub fn width(&self, j: usize) -> T {
        self.widths[j]
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    /// Number of basis functions `b`.
    pub fn len(&self) -> usize {
        self.centers.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.nrows() == 0
    }

    pub fn dims(&self) -> usize {
        self.centers.ncols()
    }
}

/// Values `ψ_ij(x)` and partials `∂_j ψ_ij(x)` of all `b` basis functions for
/// output coordinate `j` (zero-based).
pub fn eval_basis<T: Real>(
    basis: &BasisSet<T>,
    x: DVectorView<'_, T>,
    j: usize,
) -> Result<(DVector<T>, DVector<T>)> {
    if j >= basis.dims() {
        return Err(NgcaError::Dimension(format!(
            "coordinate {j} out of range for {} dims",
            basis.dims()
        )));
    }
    if x.len() != basis.dims() {
        return Err(NgcaError::shape(format!("{}-vector", basis.dims()), format!("{}-vector", x.len())));
    }
    let s2 = basis.width(j) * basis.width(j);
    let b = basis.len();
    let mut values = DVector::zeros(b);
    let mut partials = DVector::zeros(b);
    for i in 0..b {
        let c = basis.centers.row(i);
        let mut dist2 = T::zero();
        for k in 0..x.len() {
            let diff = x[k] - c[k];
            dist2 += diff * diff;
        }
        let e = (-dist2 / (s2 + s2)).exp();
        let delta = c[j] - x[j];
        values[i] = delta / s2 * e;
        partials[i] = e * (delta * delta / (s2 * s2) - T::one() / s2);
    }
    Ok((values, partials))
}

/// Squared distances between rows of `y` (`n x d`) and rows of `centers`
/// (`b x d`) via `‖y‖² - 2 yᵀc + ‖c‖²`, clamped at zero.
pub(crate) fn sq_distances<T: Real>(y: &DMatrix<T>, centers: &DMatrix<T>) -> DMatrix<T> {
    let cross = y * centers.transpose();
    let yn: Vec<T> = y.row_iter().map(|r| r.norm_squared()).collect();
    let cn: Vec<T> = centers.row_iter().map(|r| r.norm_squared()).collect();
    DMatrix::from_fn(y.nrows(), centers.nrows(), |i, k| {
        (yn[i] - (cross[(i, k)] + cross[(i, k)]) + cn[k]).max(T::zero())
    })
}

/// Gaussian factor `exp(-D / (2σ²))` for every sample/centre pair.
fn gaussian_factor<T: Real>(dist2: &DMatrix<T>, sigma: T) -> DMatrix<T> {
    let denom = (sigma * sigma) * T::lit(2.0);
    dist2.map(|d| (-d / denom).exp())
}

/// Design matrices `Ψ` (values) and `Ψ'` (partials) for coordinate `j`.
fn design<T: Real>(
    y: &DMatrix<T>,
    centers: &DMatrix<T>,
    gauss: &DMatrix<T>,
    sigma: T,
    j: usize,
) -> (DMatrix<T>, DMatrix<T>) {
    let s2 = sigma * sigma;
    let inv_s2 = T::one() / s2;
    let inv_s4 = inv_s2 * inv_s2;
    let (n, b) = gauss.shape();
    let mut psi = DMatrix::zeros(n, b);
    let mut dpsi = DMatrix::zeros(n, b);
    for k in 0..b {
        let ck = centers[(k, j)];
        for i in 0..n {
            let e = gauss[(i, k)];
            let delta = ck - y[(i, j)];
            psi[(i, k)] = delta * inv_s2 * e;
            dpsi[(i, k)] = e * (delta * delta * inv_s4 - inv_s2);
        }
    }
    (psi, dpsi)
}

/// Empirical moments `G_j = (1/n) Σ ψ_j ψ_jᵀ` and `h_j = (1/n) Σ ∂_j ψ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair<T: Real> {
    pub g: DMatrix<T>,
    pub h: DVector<T>,
}

pub fn moments<T: Real>(y: &DMatrix<T>, basis: &BasisSet<T>, j: usize) -> Result<MomentPair<T>> {
    if y.nrows() == 0 {
        return Err(NgcaError::EmptyInput("moments need at least one sample".into()));
    }
    if y.ncols() != basis.dims() {
        return Err(NgcaError::shape(
            format!("{} columns", basis.dims()),
            format!("{} columns", y.ncols()),
        ));
    }
    if j >= basis.dims() {
        return Err(NgcaError::Dimension(format!("coordinate {j} out of range")));
    }
    let dist2 = sq_distances(y, &basis.centers);
    let gauss = gaussian_factor(&dist2, basis.width(j));
    let (psi, dpsi) = design(y, &basis.centers, &gauss, basis.width(j), j);
    Ok(moments_from_design(&psi, &dpsi))
}

fn moments_from_design<T: Real>(psi: &DMatrix<T>, dpsi: &DMatrix<T>) -> MomentPair<T> {
    let n = T::from_count(psi.nrows());
    let mut g = psi.tr_mul(psi) / n;
    linalg::symmetrize(&mut g);
    let h = DVector::from_iterator(dpsi.ncols(), dpsi.column_iter().map(|c| c.sum() / n));
    MomentPair { g, h }
}

/// Ridge solution `θ = -(G + λI)^{-1} h` by Cholesky, with up to two steps of
/// iterative refinement.
pub fn solve_theta<T: Real>(m: &MomentPair<T>, lambda: T) -> Result<DVector<T>> {
    if !(lambda > T::zero()) || !lambda.finite() {
        return Err(NgcaError::Config("ridge parameter must be finite and positive".into()));
    }
    solve_ridge(&m.g, &m.h, lambda)
}

fn solve_ridge<T: Real>(g: &DMatrix<T>, h: &DVector<T>, lambda: T) -> Result<DVector<T>> {
    if g.iter().chain(h.iter()).any(|v| !v.finite()) {
        return Err(NgcaError::Numeric("non-finite moment entries".into()));
    }
    let mut a = g.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let chol = Cholesky::new(a.clone())
        .ok_or_else(|| NgcaError::Numeric("ridge system is not positive definite".into()))?;
    let rhs = -h;
    let mut theta = chol.solve(&rhs);
    let tol = T::lit(1e-12) * (T::one() + h.norm());
    for _ in 0..2 {
        let residual = &rhs - &a * &theta;
        if residual.norm() <= tol {
            break;
        }
        theta += chol.solve(&residual);
    }
    if theta.iter().any(|v| !v.finite()) {
        return Err(NgcaError::Numeric("ridge solution is not finite".into()));
    }
    Ok(theta)
}

/// Candidate grids and fold count for cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LsldgConfig {
    pub sigma_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    /// Upper bound on the number of basis centres, `b = min(n, max_centers)`.
    pub max_centers: usize,
}

impl Default for LsldgConfig {
    fn default() -> Self {
        Self {
            sigma_grid: log_grid(1e-1, 10.0, 10),
            lambda_grid: log_grid(1e-5, 10.0, 10),
            folds: 5,
            max_centers: 100,
        }
    }
}

/// `count` values from `lo` to `hi` evenly spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

/// Per-coordinate outcome of cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSelection<T: Real> {
    pub sigma: Vec<T>,
    pub lambda: Vec<T>,
    /// `scores[j][(s, l)]`: mean hold-out criterion for `sigma_grid[s]`,
    /// `lambda_grid[l]` on coordinate `j`. Failed solves score `+inf`.
    pub scores: Vec<DMatrix<f64>>,
}

/// Selects `(σ_j, λ_j)` for every coordinate by k-fold cross-validation of
/// the hold-out criterion `(1/n_val) Σ [g_j² + 2 ∂_j g_j]`.
///
/// Folds are contiguous blocks of one seeded permutation; the hold-out score
/// is the unweighted mean over folds. Ties go to the larger `λ`, then the
/// larger `σ`.
///
/// Samples that coincide with a centre always stay in the training part: a
/// held-out point sitting on a centre adds `∂ψ = -1/σ²` to the hold-out
/// criterion and biases the choice towards narrow widths. When fewer than
/// `folds` other samples remain, every sample takes part in the folds.
pub fn cross_validate<T: Real>(
    y: &DMatrix<T>,
    centers: &DMatrix<T>,
    cfg: &LsldgConfig,
    seed: u64,
) -> Result<CvSelection<T>> {
    let (n, d) = y.shape();
    validate_config(cfg)?;
    if centers.ncols() != d || centers.nrows() == 0 {
        return Err(NgcaError::shape(
            format!("b x {d} centre matrix"),
            format!("{}x{}", centers.nrows(), centers.ncols()),
        ));
    }
    if n < cfg.folds {
        return Err(NgcaError::Config(format!(
            "{} folds over {n} samples leaves an empty fold",
            cfg.folds
        )));
    }
    let center_rows: HashSet<Vec<u64>> = centers.row_iter().map(|r| row_bits(&r)).collect();
    let (mut free, pinned): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| !center_rows.contains(&row_bits(&y.row(i))));
    if free.len() < cfg.folds {
        free = (0..n).collect();
    }
    free.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let m = free.len();
    let perm: Vec<usize> = if m == n {
        free
    } else {
        free.into_iter().chain(pinned).collect()
    };
    let yp = y.select_rows(perm.iter());
    let bounds: Vec<(usize, usize)> = (0..cfg.folds)
        .map(|f| (f * m / cfg.folds, (f + 1) * m / cfg.folds))
        .collect();
    let dist2 = sq_distances(&yp, centers);
    let lambdas: Vec<T> = cfg.lambda_grid.iter().map(|&l| T::lit(l)).collect();

    // per sigma: d x |lambda| score table
    let per_sigma: Vec<Vec<Vec<f64>>> = cfg
        .sigma_grid
        .par_iter()
        .map(|&s| {
            let sigma = T::lit(s);
            let gauss = gaussian_factor(&dist2, sigma);
            (0..d)
                .map(|j| {
                    let (psi, dpsi) = design(&yp, centers, &gauss, sigma, j);
                    fold_scores(&psi, &dpsi, &bounds, &lambdas)
                })
                .collect()
        })
        .collect();

    let mut sel_sigma = Vec::with_capacity(d);
    let mut sel_lambda = Vec::with_capacity(d);
    let mut scores = Vec::with_capacity(d);
    for j in 0..d {
        let table = DMatrix::from_fn(cfg.sigma_grid.len(), lambdas.len(), |s, l| per_sigma[s][j][l]);
        let mut best: Option<(f64, f64, f64)> = None;
        for (s, &sv) in cfg.sigma_grid.iter().enumerate() {
            for (l, &lv) in cfg.lambda_grid.iter().enumerate() {
                let score = table[(s, l)];
                let better = match best {
                    None => true,
                    Some((bs, bl, bsig)) => {
                        score < bs || (score == bs && (lv > bl || (lv == bl && sv > bsig)))
                    }
                };
                if better {
                    best = Some((score, lv, sv));
                }
            }
        }
        let (_, lv, sv) = best.expect("non-empty grids");
        sel_sigma.push(T::lit(sv));
        sel_lambda.push(T::lit(lv));
        scores.push(table);
    }
    Ok(CvSelection {
        sigma: sel_sigma,
        lambda: sel_lambda,
        scores,
    })
}

fn row_bits<T: Real, S: nalgebra::storage::Storage<T, nalgebra::U1, nalgebra::Dyn>>(
    row: &nalgebra::Matrix<T, nalgebra::U1, nalgebra::Dyn, S>,
) -> Vec<u64> {
    row.iter().map(|v| v.as_f64().to_bits()).collect()
}

/// Mean hold-out criterion over folds for every ridge value. Rows past the
/// last fold are never held out.
fn fold_scores<T: Real>(
    psi: &DMatrix<T>,
    dpsi: &DMatrix<T>,
    bounds: &[(usize, usize)],
    lambdas: &[T],
) -> Vec<f64> {
    let b = psi.ncols();
    let n = psi.nrows();
    let parts: Vec<(DMatrix<T>, DVector<T>)> = bounds
        .iter()
        .map(|&(lo, hi)| {
            let block = psi.rows(lo, hi - lo);
            let mut g = block.tr_mul(&block);
            linalg::symmetrize(&mut g);
            let dblock = dpsi.rows(lo, hi - lo);
            let h = DVector::from_iterator(b, dblock.column_iter().map(|c| c.sum()));
            (g, h)
        })
        .collect();
    let tail = bounds.last().map_or(0, |&(_, hi)| hi);
    let rest = psi.rows(tail, n - tail);
    let mut g_total = rest.tr_mul(&rest);
    linalg::symmetrize(&mut g_total);
    let mut h_total = DVector::from_iterator(b, dpsi.rows(tail, n - tail).column_iter().map(|c| c.sum()));
    for (g, h) in &parts {
        g_total += g;
        h_total += h;
    }
    let mut totals = vec![0.0; lambdas.len()];
    for (&(lo, hi), (g_val, h_val)) in bounds.iter().zip(&parts) {
        let n_val = T::from_count(hi - lo);
        let n_train = T::from_count(n - (hi - lo));
        let g_train = (&g_total - g_val) / n_train;
        let h_train = (&h_total - h_val) / n_train;
        let g_hold = g_val / n_val;
        let h_hold = h_val / n_val;
        for (l, &lambda) in lambdas.iter().enumerate() {
            let score = match solve_ridge(&g_train, &h_train, lambda) {
                Ok(theta) => {
                    let quad = theta.dot(&(&g_hold * &theta));
                    (quad + (theta.dot(&h_hold) * T::lit(2.0))).as_f64()
                }
                Err(_) => f64::INFINITY,
            };
            totals[l] += if score.is_finite() { score } else { f64::INFINITY };
        }
    }
    let k = bounds.len() as f64;
    totals.into_iter().map(|t| t / k).collect()
}

fn validate_config(cfg: &LsldgConfig) -> Result<()> {
    if cfg.sigma_grid.is_empty() || cfg.lambda_grid.is_empty() {
        return Err(NgcaError::Config("cross-validation grids must be non-empty".into()));
    }
    if cfg.sigma_grid.iter().chain(&cfg.lambda_grid).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(NgcaError::Config("grid values must be finite and positive".into()));
    }
    if cfg.folds < 2 {
        return Err(NgcaError::Config("cross-validation needs at least two folds".into()));
    }
    if cfg.max_centers == 0 {
        return Err(NgcaError::Config("max_centers must be positive".into()));
    }
    Ok(())
}

/// Fitted per-coordinate gradient model.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientModel<T: Real> {
    centers: DMatrix<T>,
    sigma: Vec<T>,
    lambda: Vec<T>,
    theta: Vec<DVector<T>>,
}

/// Fits with the default grids: `b = min(n, 100)` centres, 5-fold CV over
/// ten widths in `[0.1, 10]` and ten ridges in `[1e-5, 10]`.
pub fn fit<T: Real>(y: &DMatrix<T>, seed: u64) -> Result<GradientModel<T>> {
    fit_with(y, &LsldgConfig::default(), seed)
}

pub fn fit_with<T: Real>(y: &DMatrix<T>, cfg: &LsldgConfig, seed: u64) -> Result<GradientModel<T>> {
    validate_config(cfg)?;
    let n = y.nrows();
    let min_n = cfg.folds.max(5);
    if n < min_n {
        return Err(NgcaError::EmptyInput(format!(
            "gradient fitting needs at least {min_n} samples, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center_seed = rng.random::<u64>();
    let fold_seed = rng.random::<u64>();
    let b = n.min(cfg.max_centers);
    let picked = index::sample(&mut ChaCha8Rng::seed_from_u64(center_seed), n, b).into_vec();
    let centers = y.select_rows(picked.iter());
    let sel = cross_validate(y, &centers, cfg, fold_seed)?;
    fit_fixed(y, centers, sel.sigma, sel.lambda)
}

/// Solves for `θ_j` on all of `y` with given centres, widths and ridges.
pub fn fit_fixed<T: Real>(
    y: &DMatrix<T>,
    centers: DMatrix<T>,
    sigma: Vec<T>,
    lambda: Vec<T>,
) -> Result<GradientModel<T>> {
    let d = y.ncols();
    if lambda.len() != d {
        return Err(NgcaError::shape(format!("{d} ridges"), lambda.len().to_string()));
    }
    let basis = BasisSet::new(centers, sigma)?;
    let dist2 = sq_distances(y, basis.centers());
    let theta = (0..d)
        .map(|j| {
            let gauss = gaussian_factor(&dist2, basis.width(j));
            let (psi, dpsi) = design(y, basis.centers(), &gauss, basis.width(j), j);
            solve_theta(&moments_from_design(&psi, &dpsi), lambda[j])
        })
        .collect::<Result<Vec<_>>>()?;
    let BasisSet { centers, widths } = basis;
    GradientModel::from_parts(centers, widths, lambda, theta)
}

impl<T: Real> GradientModel<T> {
    pub fn from_parts(
        centers: DMatrix<T>,
        sigma: Vec<T>,
        lambda: Vec<T>,
        theta: Vec<DVector<T>>,
    ) -> Result<Self> {
        let (b, d) = centers.shape();
        if sigma.len() != d || lambda.len() != d || theta.len() != d {
            return Err(NgcaError::shape(
                format!("{d} widths, ridges and coefficient vectors"),
                format!("{}, {}, {}", sigma.len(), lambda.len(), theta.len()),
            ));
        }
        if theta.iter().any(|t| t.len() != b) {
            return Err(NgcaError::shape(format!("coefficient vectors of length {b}"), "other"));
        }
        if lambda.iter().any(|l| !(*l > T::zero())) {
            return Err(NgcaError::Config("ridge parameters must be positive".into()));
        }
        if theta.iter().flat_map(|t| t.iter()).any(|v| !v.finite()) {
            return Err(NgcaError::Numeric("non-finite coefficients".into()));
        }
        BasisSet::new(centers.clone(), sigma.clone())?;
        Ok(Self {
            centers,
            sigma,
            lambda,
            theta,
        })
    }

    pub fn dims(&self) -> usize {
        self.centers.ncols()
    }

    pub fn num_basis(&self) -> usize {
        self.centers.nrows()
    }

    pub fn centers(&self) -> &DMatrix<T> {
        &self.centers
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    pub fn theta(&self, j: usize) -> &DVector<T> {
        &self.theta[j]
    }

    pub fn basis(&self) -> BasisSet<T> {
        BasisSet {
            centers: self.centers.clone(),
            widths: self.sigma.clone(),
        }
    }

    /// Estimated gradients, row `i` column `j` is `θ_jᵀ ψ_j(y_i)`.
    pub fn predict(&self, y: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.predict_with_partials(y).map(|(g, _)| g)
    }

    /// Gradients and the diagonal partials `∂_j g_j(y_i)`.
    pub fn predict_with_partials(&self, y: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
        if y.ncols() != self.dims() {
            return Err(NgcaError::shape(
                format!("{} columns", self.dims()),
                format!("{} columns", y.ncols()),
            ));
        }
        let dist2 = sq_distances(y, &self.centers);
        let mut grad = DMatrix::zeros(y.nrows(), self.dims());
        let mut diag = DMatrix::zeros(y.nrows(), self.dims());
        for j in 0..self.dims() {
            let gauss = gaussian_factor(&dist2, self.sigma[j]);
            let (psi, dpsi) = design(y, &self.centers, &gauss, self.sigma[j], j);
            grad.set_column(j, &(&psi * &self.theta[j]));
            diag.set_column(j, &(&dpsi * &self.theta[j]));
        }
        Ok((grad, diag))
    }

    /// Empirical criterion `(1/n) Σ [g_j(y_i)² + 2 ∂_j g_j(y_i)]` per coordinate.
    pub fn objective(&self, y: &DMatrix<T>) -> Result<Vec<T>> {
        let (g, dg) = self.predict_with_partials(y)?;
        let n = T::from_count(y.nrows().max(1));
        Ok((0..self.dims())
            .map(|j| {
                g.column(j)
                    .iter()
                    .zip(dg.column(j).iter())
                    .fold(T::zero(), |acc, (&v, &dv)| acc + v * v + dv + dv)
                    / n
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDoc {
            centers: self
                .centers
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            sigma: self.sigma.clone(),
            lambda: self.lambda.clone(),
            theta: self.theta.iter().map(|t| t.iter().copied().collect()).collect(),
            dims: self.dims(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc<T> = serde_json::from_str(text)?;
        let b = doc.centers.len();
        if doc.centers.iter().any(|r| r.len() != doc.dims) {
            return Err(NgcaError::shape(format!("centres with {} coordinates", doc.dims), "ragged"));
        }
        let flat: Vec<T> = doc.centers.into_iter().flatten().collect();
        let centers = DMatrix::from_row_slice(b, doc.dims, &flat);
        let theta = doc.theta.into_iter().map(DVector::from_vec).collect();
        Self::from_parts(centers, doc.sigma, doc.lambda, theta)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct ModelDoc<T> {
    centers: Vec<Vec<T>>,
    sigma: Vec<T>,
    lambda: Vec<T>,
    theta: Vec<Vec<T>>,
    dims: usize,
}
