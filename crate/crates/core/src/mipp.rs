//! Multi-index projection pursuit.
//!
//! For whitened data and any smooth `h`, `β(h) = E[y h(y) - ∇h(y)]` lies in
//! the non-Gaussian index space (Stein's identity annihilates the Gaussian
//! directions). MIPP evaluates `β̂` for a family of single-index functions
//! `h(y) = r(ωᵀy)`, scales each by its noise level, and takes the principal
//! subspace of the resulting vectors.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{center_whiten, DataMatrix};
use crate::error::{NgcaError, Result};
use crate::lsngca::{pull_back, top_eigenspace_with_tol, GammaMatrix, PIPELINE_GAP_TOL};
use crate::scalar::Real;
use crate::subspace::Subspace;

/// Profile `r` of a single-index function `h(y) = r(ωᵀy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `r(z) = z`; `β̂` vanishes on whitened data. Mostly useful in tests.
    Linear,
    /// `r(z) = z³`.
    Pow3,
    /// `r(z) = tanh(a z)`.
    Tanh(f64),
    /// `r(z) = sin(b z)`.
    FourierSin(f64),
    /// `r(z) = cos(b z)`.
    FourierCos(f64),
}

impl Profile {
    /// `(r(z), r'(z))`.
    pub fn eval<T: Real>(self, z: T) -> (T, T) {
        match self {
            Profile::Linear => (z, T::one()),
            Profile::Pow3 => (z * z * z, T::lit(3.0) * z * z),
            Profile::Tanh(a) => {
                let a = T::lit(a);
                let t = (a * z).tanh();
                (t, a * (T::one() - t * t))
            }
            Profile::FourierSin(b) => {
                let b = T::lit(b);
                ((b * z).sin(), b * (b * z).cos())
            }
            Profile::FourierCos(b) => {
                let b = T::lit(b);
                ((b * z).cos(), -b * (b * z).sin())
            }
        }
    }
}

/// `h(y) = r(ωᵀy)` with unit-norm `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexFunction<T: Real> {
    direction: DVector<T>,
    profile: Profile,
}

impl<T: Real> IndexFunction<T> {
    /// Normalises `direction` to unit length.
    pub fn new(direction: DVector<T>, profile: Profile) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > T::zero()) || !norm.finite() {
            return Err(NgcaError::Numeric("index direction must be a non-zero finite vector".into()));
        }
        Ok(Self {
            direction: direction / norm,
            profile,
        })
    }

    pub fn direction(&self) -> &DVector<T> {
        &self.direction
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn value(&self, y: &DVector<T>) -> T {
        self.profile.eval(self.direction.dot(y)).0
    }

    pub fn gradient(&self, y: &DVector<T>) -> DVector<T> {
        &self.direction * self.profile.eval(self.direction.dot(y)).1
    }
}

/// Raw `β̂`, its noise-normalised version, and the normalised length.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaVector<T: Real> {
    pub raw: DVector<T>,
    /// `None` when the normalising denominator is not positive (dropped).
    pub normalized: Option<DVector<T>>,
    pub informative_norm: T,
}

impl<T: Real> BetaVector<T> {
    pub fn dropped(&self) -> bool {
        self.normalized.is_none()
    }
}

fn check_dims<T: Real>(y: &DMatrix<T>, h: &IndexFunction<T>) -> Result<()> {
    if y.ncols() != h.direction.len() {
        return Err(NgcaError::shape(
            format!("{} columns", h.direction.len()),
            format!("{} columns", y.ncols()),
        ));
    }
    if y.nrows() == 0 {
        return Err(NgcaError::EmptyInput("no samples".into()));
    }
    Ok(())
}

/// Per-sample summands `y_i r(z_i) - r'(z_i) ω` as rows of an `n x d` matrix.
fn summands<T: Real>(y: &DMatrix<T>, h: &IndexFunction<T>) -> DMatrix<T> {
    let z = y * &h.direction;
    let mut out = y.clone();
    for i in 0..y.nrows() {
        let (r, dr) = h.profile.eval(z[i]);
        for k in 0..y.ncols() {
            out[(i, k)] = y[(i, k)] * r - dr * h.direction[k];
        }
    }
    out
}

/// `β̂ = (1/n) Σ_i [y_i h(y_i) - ∇h(y_i)]` (not yet normalised).
pub fn beta_hat<T: Real>(y: &DMatrix<T>, h: &IndexFunction<T>) -> Result<BetaVector<T>> {
    check_dims(y, h)?;
    let s = summands(y, h);
    let n = T::from_count(y.nrows());
    let raw = DVector::from_iterator(s.ncols(), s.column_iter().map(|c| c.sum() / n));
    Ok(BetaVector {
        raw,
        normalized: None,
        informative_norm: T::zero(),
    })
}

/// Divides `β̂` by `sqrt(Σ_i ‖y_i h(y_i) - ∇h(y_i)‖² - ‖β̂‖²)`. A non-positive
/// radicand drops the vector.
pub fn normalize<T: Real>(
    y: &DMatrix<T>,
    h: &IndexFunction<T>,
    raw: &BetaVector<T>,
) -> Result<BetaVector<T>> {
    check_dims(y, h)?;
    let s = summands(y, h);
    let radicand = s.norm_squared() - raw.raw.norm_squared();
    if !(radicand > T::zero()) || !radicand.finite() {
        return Ok(BetaVector {
            raw: raw.raw.clone(),
            normalized: None,
            informative_norm: T::zero(),
        });
    }
    let normalized = &raw.raw / radicand.sqrt();
    let informative_norm = normalized.norm();
    Ok(BetaVector {
        raw: raw.raw.clone(),
        normalized: Some(normalized),
        informative_norm,
    })
}

/// `β̂` followed by [`normalize`].
pub fn beta_vector<T: Real>(y: &DMatrix<T>, h: &IndexFunction<T>) -> Result<BetaVector<T>> {
    normalize(y, h, &beta_hat(y, h)?)
}

/// Seeded random unit vectors refined by up to `iters` one-unit FastICA
/// fixed-point steps `ω ← E[y tanh(ωᵀy)] - E[1 - tanh²(ωᵀy)] ω`.
pub fn candidate_directions<T: Real>(
    y: &DMatrix<T>,
    count: usize,
    iters: usize,
    seed: u64,
) -> Result<Vec<DVector<T>>> {
    if count == 0 {
        return Err(NgcaError::Config("need at least one candidate direction".into()));
    }
    let d = y.ncols();
    if d == 0 {
        return Err(NgcaError::EmptyInput("data has no columns".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<DVector<T>> = (0..count)
        .map(|_| loop {
            let v = DVector::from_iterator(
                d,
                (0..d).map(|_| T::lit(StandardNormal.sample(&mut rng))),
            );
            let norm = v.norm();
            if norm > T::zero() {
                break v / norm;
            }
        })
        .collect();
    Ok(starts
        .into_par_iter()
        .map(|w| fastica_refine(y, w, iters))
        .collect())
}

fn fastica_refine<T: Real>(y: &DMatrix<T>, mut w: DVector<T>, iters: usize) -> DVector<T> {
    let n = T::from_count(y.nrows().max(1));
    for _ in 0..iters {
        let z = y * &w;
        let t = z.map(|v| v.tanh());
        let mean_dg = t.iter().fold(T::zero(), |a, &v| a + (T::one() - v * v)) / n;
        let next = y.tr_mul(&t) / n - &w * mean_dg;
        let norm = next.norm();
        if !(norm > T::zero()) || !norm.finite() {
            break;
        }
        let next = next / norm;
        let converged = next.dot(&w).abs() > T::one() - T::lit(1e-12);
        w = next;
        if converged {
            break;
        }
    }
    w
}

/// `E[log cosh N(0, 1)]`.
pub const GAUSSIAN_LOGCOSH_MEAN: f64 = 0.374_567_207_491_438_5;

/// Negentropy approximation `(E[log cosh(ωᵀy)] - E[log cosh ν])²` with
/// `ν ~ N(0, 1)`, used to rank candidate directions.
pub fn negentropy_proxy<T: Real>(y: &DMatrix<T>, w: &DVector<T>) -> T {
    let z = y * w;
    let n = T::from_count(z.len().max(1));
    let m = z.iter().fold(T::zero(), |a, &v| a + log_cosh(v)) / n;
    let diff = m - T::lit(GAUSSIAN_LOGCOSH_MEAN);
    diff * diff
}

fn log_cosh<T: Real>(v: T) -> T {
    let a = v.abs();
    a + (T::one() + (T::lit(-2.0) * a).exp()).ln() - T::lit(std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MippConfig {
    pub profiles: Vec<Profile>,
    /// Number of FastICA-refined directions `K_dir`.
    pub directions: usize,
    /// FastICA iterations per direction.
    pub iters: usize,
    pub gap_tol: f64,
}

impl MippConfig {
    pub fn default_profiles() -> Vec<Profile> {
        let params = [0.5, 1.0, 1.5, 2.0, 2.5];
        let mut out = vec![Profile::Pow3];
        out.extend(params.iter().map(|&a| Profile::Tanh(a)));
        out.extend(params.iter().map(|&b| Profile::FourierSin(b)));
        out.extend(params.iter().map(|&b| Profile::FourierCos(b)));
        out
    }

    /// Total number of index functions `K`.
    pub fn family_size(&self) -> usize {
        self.profiles.len() * self.directions
    }
}

impl Default for MippConfig {
    fn default() -> Self {
        Self {
            profiles: Self::default_profiles(),
            directions: 50,
            iters: 10,
            gap_tol: PIPELINE_GAP_TOL,
        }
    }
}

/// Intermediate results of one MIPP run.
#[derive(Debug, Clone)]
pub struct MippFit<T: Real> {
    pub subspace: Subspace<T>,
    /// Surviving normalised `β̂` vectors.
    pub betas: Vec<DVector<T>>,
    pub dropped: usize,
    pub scatter: GammaMatrix<T>,
}

pub fn run_mipp<T: Real>(
    x: &DataMatrix<T>,
    d_s: usize,
    cfg: &MippConfig,
    seed: u64,
) -> Result<Subspace<T>> {
    run_mipp_detailed(x, d_s, cfg, seed).map(|f| f.subspace)
}

/// Whiten, build the index family, compute normalised `β̂`, PCA over the
/// unnormalised scatter `Σ_k β̂_k β̂_kᵀ`, pull back.
pub fn run_mipp_detailed<T: Real>(
    x: &DataMatrix<T>,
    d_s: usize,
    cfg: &MippConfig,
    seed: u64,
) -> Result<MippFit<T>> {
    if d_s == 0 || d_s >= x.ncols() {
        return Err(NgcaError::Dimension(format!(
            "need 1 <= d_s < d_x = {}, got d_s = {d_s}",
            x.ncols()
        )));
    }
    if cfg.profiles.is_empty() || cfg.directions == 0 {
        return Err(NgcaError::Config("MIPP needs at least one profile and one direction".into()));
    }
    if cfg.family_size() < d_s {
        return Err(NgcaError::InsufficientFunctions {
            survivors: cfg.family_size(),
            needed: d_s,
        });
    }
    let whitening = center_whiten(x)?;
    let y = whitening.whitened();
    let directions = candidate_directions(y, cfg.directions, cfg.iters, seed)?;
    let family: Vec<IndexFunction<T>> = cfg
        .profiles
        .iter()
        .flat_map(|&p| {
            directions
                .iter()
                .map(move |w| IndexFunction::new(w.clone(), p))
        })
        .collect::<Result<_>>()?;
    let betas: Vec<BetaVector<T>> = family
        .par_iter()
        .map(|h| beta_vector(y, h))
        .collect::<Result<_>>()?;
    let dropped = betas.iter().filter(|b| b.dropped()).count();
    let kept: Vec<DVector<T>> = betas.into_iter().filter_map(|b| b.normalized).collect();
    if kept.len() < d_s {
        return Err(NgcaError::InsufficientFunctions {
            survivors: kept.len(),
            needed: d_s,
        });
    }
    let d = y.ncols();
    let mut scatter = DMatrix::zeros(d, d);
    for b in &kept {
        scatter.ger(T::one(), b, b, T::one());
    }
    let scatter = GammaMatrix::from_symmetric(scatter)?;
    let whitened = top_eigenspace_with_tol(&scatter, d_s, cfg.gap_tol)?;
    let subspace = pull_back(&whitened, whitening.whitener())?;
    Ok(MippFit {
        subspace,
        betas: kept,
        dropped,
        scatter,
    })
}
