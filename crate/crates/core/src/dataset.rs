//! Synthetic benchmark data, CSV ingestion and whitening.
//!
//! The four signal families mirror the classic NGCA benchmark: a bimodal
//! Gaussian mixture, a super-Gaussian (Laplace) law, a sub-Gaussian law with
//! density proportional to `exp(-s^4 / beta)`, and a mixed pair. The scale
//! parameters of the Laplace and quartic laws are calibrated numerically so
//! that each coordinate has variance 3.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{NgcaError, Result};
use crate::linalg;
use crate::scalar::Real;

/// Target variance of the calibrated Laplace and quartic signal coordinates.
pub const SIGNAL_VARIANCE: f64 = 3.0;

/// Number of signal coordinates produced by [`sample_signals`].
pub const SIGNAL_DIMS: usize = 2;

/// Number of grid points of the quartic inverse-CDF table.
pub const QUARTIC_GRID_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Each coordinate from `0.5 N(-3, 1) + 0.5 N(3, 1)`.
    GaussianMixture,
    /// Each coordinate Laplace with variance 3.
    SuperGaussian,
    /// Each coordinate with density proportional to `exp(-s^4 / beta)`, variance 3.
    SubGaussian,
    /// First coordinate Laplace, second quartic.
    MixedSuperSub,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::GaussianMixture,
        GeneratorKind::SuperGaussian,
        GeneratorKind::SubGaussian,
        GeneratorKind::MixedSuperSub,
    ];

    pub fn id(self) -> &'static str {
        match self {
            GeneratorKind::GaussianMixture => "gaussian_mixture",
            GeneratorKind::SuperGaussian => "super_gaussian",
            GeneratorKind::SubGaussian => "sub_gaussian",
            GeneratorKind::MixedSuperSub => "mixed_super_sub",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GeneratorKind {
    type Err = NgcaError;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| NgcaError::Config(format!("unknown generator '{s}'")))
    }
}

/// `n x 2` matrix of signal draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix<T: Real>(DMatrix<T>);

impl<T: Real> SignalMatrix<T> {
    pub fn new(values: DMatrix<T>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(NgcaError::EmptyInput("signal matrix has no entries".into()));
        }
        if values.iter().any(|v| !v.finite()) {
            return Err(NgcaError::Numeric("signal matrix has non-finite entries".into()));
        }
        Ok(Self(values))
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

/// `n x d_x` matrix of observations, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T: Real>(DMatrix<T>);

impl<T: Real> DataMatrix<T> {
    pub fn new(values: DMatrix<T>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(NgcaError::EmptyInput("data matrix has no entries".into()));
        }
        if let Some(((i, j), _)) = enumerate_entries(&values).find(|(_, v)| !v.finite()) {
            return Err(NgcaError::Numeric(format!(
                "non-finite observation at row {i}, column {j}"
            )));
        }
        Ok(Self(values))
    }

    pub fn from_row_slice(n: usize, d: usize, values: &[T]) -> Result<Self> {
        if values.len() != n * d {
            return Err(NgcaError::shape(format!("{} values", n * d), values.len().to_string()));
        }
        Self::new(DMatrix::from_row_slice(n, d, values))
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

fn enumerate_entries<T: Real>(m: &DMatrix<T>) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
    (0..m.ncols()).flat_map(move |j| (0..m.nrows()).map(move |i| ((i, j), m[(i, j)])))
}

/// Empirical mean, covariance and symmetric inverse square root of a data
/// set, together with the whitened samples.
#[derive(Debug, Clone)]
pub struct Whitening<T: Real> {
    mean: DVector<T>,
    covariance: DMatrix<T>,
    whitener: DMatrix<T>,
    whitened: DMatrix<T>,
}

impl<T: Real> Whitening<T> {
    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    /// `(1/n) Σ (x_i - μ)(x_i - μ)ᵀ`.
    pub fn covariance(&self) -> &DMatrix<T> {
        &self.covariance
    }

    /// Symmetric `Σ^{-1/2}`.
    pub fn whitener(&self) -> &DMatrix<T> {
        &self.whitener
    }

    /// `n x d_x` whitened samples, row `i` is `W (x_i - μ)`.
    pub fn whitened(&self) -> &DMatrix<T> {
        &self.whitened
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Whitens new samples with the stored mean and whitener.
    pub fn apply(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        if x.ncols() != self.dim() {
            return Err(NgcaError::shape(
                format!("{} columns", self.dim()),
                format!("{} columns", x.ncols()),
            ));
        }
        Ok(linalg::center_rows(x, &self.mean) * &self.whitener)
    }
}

/// Centers the data and whitens it with `W = Σ^{-1/2} = U diag(λ^{-1/2}) Uᵀ`.
pub fn center_whiten<T: Real>(x: &DataMatrix<T>) -> Result<Whitening<T>> {
    let (n, d) = (x.nrows(), x.ncols());
    if n <= d {
        return Err(NgcaError::Dimension(format!(
            "whitening needs more samples than dimensions (n = {n}, d_x = {d})"
        )));
    }
    let mean = linalg::column_means(x.as_matrix());
    let centered = linalg::center_rows(x.as_matrix(), &mean);
    let covariance = linalg::second_moment(&centered);
    let eig = linalg::sym_eigen_desc(&covariance)?;
    let largest = eig.values[0];
    let smallest = eig.values[d - 1];
    if !(largest > T::zero()) || smallest < T::lit(1e-12) * largest {
        return Err(NgcaError::SingularCovariance {
            eigenvalue: smallest.as_f64(),
            largest: largest.as_f64(),
        });
    }
    let inv_sqrt = eig.values.map(|l| T::one() / l.sqrt());
    let mut whitener = &eig.vectors * DMatrix::from_diagonal(&inv_sqrt) * eig.vectors.transpose();
    linalg::symmetrize(&mut whitener);
    let whitened = &centered * &whitener;
    Ok(Whitening {
        mean,
        covariance,
        whitener,
        whitened,
    })
}

/// Draws `n` i.i.d. two-dimensional signal vectors from the named family.
pub fn sample_signals<T: Real>(kind: GeneratorKind, n: usize, seed: u64) -> Result<SignalMatrix<T>> {
    if n == 0 {
        return Err(NgcaError::EmptyInput("cannot sample zero signals".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let laplace = laplace_scale();
    let quartic = quartic_table();
    let mut out = DMatrix::<T>::zeros(n, SIGNAL_DIMS);
    for i in 0..n {
        for j in 0..SIGNAL_DIMS {
            let s = match (kind, j) {
                (GeneratorKind::GaussianMixture, _) => {
                    let shift = if rng.random::<bool>() { 3.0 } else { -3.0 };
                    let z: f64 = rng.sample(StandardNormal);
                    shift + z
                }
                (GeneratorKind::SuperGaussian, _) | (GeneratorKind::MixedSuperSub, 0) => {
                    sample_laplace(&mut rng, laplace)
                }
                (GeneratorKind::SubGaussian, _) | (GeneratorKind::MixedSuperSub, _) => {
                    quartic.sample(rng.random::<f64>())
                }
            };
            out[(i, j)] = T::lit(s);
        }
    }
    SignalMatrix::new(out)
}

fn sample_laplace<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    // u in (-1/2, 1/2]
    let u = 0.5 - rng.random::<f64>();
    let mag = -(1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln() * scale;
    if u < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Embeds signals into `d_x` dimensions: columns 1..=2 carry the signals
/// plus `N(0, γ²)` noise, the remaining columns are standard normal.
pub fn assemble<T: Real>(
    signals: &SignalMatrix<T>,
    d_x: usize,
    gamma2: f64,
    seed: u64,
) -> Result<DataMatrix<T>> {
    let d_s = signals.ncols();
    if d_x <= d_s {
        return Err(NgcaError::Dimension(format!(
            "d_x = {d_x} must exceed the {d_s} signal dimensions"
        )));
    }
    if !(gamma2 >= 0.0) || !gamma2.is_finite() {
        return Err(NgcaError::Config(format!("noise variance must be >= 0, got {gamma2}")));
    }
    let noise_sd = gamma2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = signals.nrows();
    let mut out = DMatrix::<T>::zeros(n, d_x);
    for i in 0..n {
        for j in 0..d_x {
            out[(i, j)] = if j < d_s {
                let s = signals.as_matrix()[(i, j)];
                if gamma2 > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    s + T::lit(noise_sd * z)
                } else {
                    s
                }
            } else {
                T::lit(rng.sample::<f64, _>(StandardNormal))
            };
        }
    }
    DataMatrix::new(out)
}

/// Signals from `kind` assembled into `d_x` dimensions with noise `γ²`.
/// Signal and noise streams use distinct seeds derived from `seed`.
pub fn generate<T: Real>(
    kind: GeneratorKind,
    n: usize,
    d_x: usize,
    gamma2: f64,
    seed: u64,
) -> Result<DataMatrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signal_seed = rng.random::<u64>();
    let noise_seed = rng.random::<u64>();
    let s = sample_signals::<T>(kind, n, signal_seed)?;
    assemble(&s, d_x, gamma2, noise_seed)
}

/// Laplace scale `α` such that `Var = 2α² = 3`, found by bisection on the
/// numerically integrated second moment.
pub fn laplace_scale() -> f64 {
    static ALPHA: OnceLock<f64> = OnceLock::new();
    *ALPHA.get_or_init(|| {
        calibrate_variance(|a, s| (-s.abs() / a).exp(), |a| 60.0 * a, SIGNAL_VARIANCE, 1e-3, 1e3)
    })
}

/// `β` such that the density proportional to `exp(-s^4/β)` has variance 3.
pub fn quartic_beta() -> f64 {
    static BETA: OnceLock<f64> = OnceLock::new();
    *BETA.get_or_init(|| {
        calibrate_variance(
            |b, s| (-s.powi(4) / b).exp(),
            |b| 8.0 * b.powf(0.25),
            SIGNAL_VARIANCE,
            1e-3,
            1e6,
        )
    })
}

/// Variance of the symmetric density proportional to `f(s)`, by composite
/// Simpson integration over `[0, radius]`.
fn symmetric_variance(f: impl Fn(f64) -> f64, radius: f64) -> f64 {
    const INTERVALS: usize = 20_000;
    let h = radius / INTERVALS as f64;
    let (mut mass, mut second) = (0.0, 0.0);
    for k in 0..=INTERVALS {
        let s = k as f64 * h;
        let w = if k == 0 || k == INTERVALS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let p = f(s);
        mass += w * p;
        second += w * p * s * s;
    }
    second / mass
}

fn calibrate_variance(
    density: impl Fn(f64, f64) -> f64,
    radius: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let var = |p: f64| symmetric_variance(|s| density(p, s), radius(p));
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if var(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Tabulated CDF of the quartic law on a uniform grid over `[-6√3, 6√3]`.
#[derive(Debug)]
struct QuarticTable {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

fn quartic_table() -> &'static QuarticTable {
    static TABLE: OnceLock<QuarticTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let beta = quartic_beta();
        let half_width = 6.0 * 3f64.sqrt();
        let m = QUARTIC_GRID_POINTS;
        let h = 2.0 * half_width / (m - 1) as f64;
        let grid: Vec<f64> = (0..m).map(|k| -half_width + k as f64 * h).collect();
        let pdf: Vec<f64> = grid.iter().map(|s| (-s.powi(4) / beta).exp()).collect();
        let mut cdf = vec![0.0; m];
        for k in 1..m {
            cdf[k] = cdf[k - 1] + 0.5 * h * (pdf[k - 1] + pdf[k]);
        }
        let total = cdf[m - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        QuarticTable { grid, cdf }
    })
}

impl QuarticTable {
    /// Inverse CDF by linear interpolation; `u` in `[0, 1)`.
    fn sample(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let (s0, s1) = (self.grid[k - 1], self.grid[k]);
        if c1 > c0 {
            s0 + (u - c0) / (c1 - c0) * (s1 - s0)
        } else {
            s0
        }
    }
}

/// Reads a comma-separated numeric file, one sample per row. A first row
/// containing any non-numeric cell is treated as a header.
pub fn load_csv<T: Real>(path: impl AsRef<Path>) -> Result<DataMatrix<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| NgcaError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(file)
}

pub fn parse_csv<T: Real, R: Read>(input: R) -> Result<DataMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values: Vec<T> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| NgcaError::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(idx + 1),
            col: None,
            message: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        let parsed: Vec<std::result::Result<f64, _>> =
            record.iter().map(|cell| cell.parse::<f64>()).collect();
        if idx == 0 && parsed.iter().any(|p| p.is_err()) {
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(NgcaError::Parse {
                    row,
                    col: None,
                    message: format!("expected {w} columns, found {}", record.len()),
                })
            }
            None => width = Some(record.len()),
            _ => {}
        }
        for (c, (cell, p)) in record.iter().zip(parsed).enumerate() {
            match p {
                Ok(v) if v.is_finite() => values.push(T::lit(v)),
                _ => {
                    return Err(NgcaError::Parse {
                        row,
                        col: Some(c + 1),
                        message: format!("'{cell}' is not a finite number"),
                    })
                }
            }
        }
        rows += 1;
    }
    let width = width.unwrap_or(0);
    if rows == 0 || width == 0 {
        return Err(NgcaError::EmptyInput("CSV input contains no data rows".into()));
    }
    DataMatrix::from_row_slice(rows, width, &values)
}
