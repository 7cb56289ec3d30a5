//! Experiment harness around the `ngca` estimators.
//!
//! An [`ExperimentConfig`] describes a grid over sample sizes and noise
//! variances. Every cell and trial draws one synthetic data set from a seed
//! derived from the master seed; each requested algorithm is run on it and
//! scored against the planted subspace `span{e_1, ..., e_{d_s}}`. Results
//! are written as CSV in a stable order, so identical configs produce
//! identical files when timing is disabled.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use ngca::imak::{self, ImakConfig};
use ngca::lsngca::{self, LsngcaConfig};
use ngca::metrics::{pca_baseline, subspace_distance, subspace_error, SubspacePair};
use ngca::mipp::{self, MippConfig};
use ngca::{dataset, DataMatrix64, Frame, GeneratorKind, NgcaError, Subspace64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] NgcaError),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rate fit: {0}")]
    Rate(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lsngca,
    Mipp,
    Imak,
    Pca,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Lsngca, Algorithm::Mipp, Algorithm::Imak, Algorithm::Pca];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Lsngca => "lsngca",
            Algorithm::Mipp => "mipp",
            Algorithm::Imak => "imak",
            Algorithm::Pca => "pca",
        }
    }

    fn code(self) -> u64 {
        match self {
            Algorithm::Lsngca => 1,
            Algorithm::Mipp => 2,
            Algorithm::Imak => 3,
            Algorithm::Pca => 4,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm '{s}' (expected lsngca, mipp, imak or pca)"))
    }
}

/// Which score a rate fit is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Subspace error `E`.
    Error,
    /// Procrustes distance `D`.
    Distance,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "E" | "e" | "error" => Ok(Metric::Error),
            "D" | "d" | "distance" => Ok(Metric::Distance),
            _ => Err(format!("unknown metric '{s}' (expected E or D)")),
        }
    }
}

/// One experiment grid. Missing fields take the desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub generator: GeneratorKind,
    pub n_grid: Vec<usize>,
    pub gamma2_grid: Vec<f64>,
    pub d_x: usize,
    pub d_s: usize,
    pub trials: usize,
    pub seed: u64,
    pub lsngca: LsngcaConfig,
    pub mipp: MippConfig,
    pub imak: ImakConfig,
    /// Where `run` writes the CSV; the CLI may override it.
    pub output: Option<PathBuf>,
    /// Off by default so that result files are reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Lsngca],
            generator: GeneratorKind::GaussianMixture,
            n_grid: vec![500, 1000, 2000, 4000],
            gamma2_grid: vec![0.0],
            d_x: 10,
            d_s: 2,
            trials: 10,
            seed: 0,
            lsngca: LsngcaConfig::default(),
            mipp: MippConfig::default(),
            imak: ImakConfig::default(),
            output: None,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.gamma2_grid.is_empty() {
            return bad("n_grid and gamma2_grid must be non-empty".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n_grid must be strictly ascending, got {:?}", self.n_grid));
        }
        if let Some(g) = self.gamma2_grid.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return bad(format!("noise variance {g} is not a finite non-negative number"));
        }
        if self.d_s != dataset::SIGNAL_DIMS {
            return bad(format!(
                "the generators plant {} signal dimensions, got d_s = {}",
                dataset::SIGNAL_DIMS,
                self.d_s
            ));
        }
        if self.d_x <= self.d_s {
            return bad(format!("d_x = {} must exceed d_s = {}", self.d_x, self.d_s));
        }
        Ok(())
    }
}

/// One CSV row. Failed runs carry NaN scores and a message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub generator: GeneratorKind,
    pub n: usize,
    pub gamma2: f64,
    pub trial: usize,
    pub seed: u64,
    #[serde(rename = "error_E")]
    pub error_e: f64,
    #[serde(rename = "distance_D")]
    pub distance_d: f64,
    pub time_sec: f64,
    pub error_msg: String,
}

pub const CSV_HEADER: &str = "algorithm,generator,n,gamma2,trial,seed,error_E,distance_D,time_sec,error_msg";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0u64, |h, &p| splitmix64(h ^ p))
}

/// Seed of the data set for one grid cell and trial.
pub fn data_seed(master: u64, n: usize, gamma2: f64, trial: usize) -> u64 {
    mix(&[master, n as u64, gamma2.to_bits(), trial as u64])
}

/// Seed handed to one algorithm on one data set.
pub fn algorithm_seed(data_seed: u64, algorithm: Algorithm) -> u64 {
    mix(&[data_seed, algorithm.code()])
}

/// Runs one estimator with the per-algorithm settings of `cfg`.
pub fn estimate(
    algorithm: Algorithm,
    x: &DataMatrix64,
    d_s: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Subspace64> {
    Ok(match algorithm {
        Algorithm::Lsngca => lsngca::run_lsngca_with(x, d_s, &cfg.lsngca, seed)?.subspace,
        Algorithm::Mipp => mipp::run_mipp(x, d_s, &cfg.mipp, seed)?,
        Algorithm::Imak => imak::run_imak(x, d_s, &cfg.imak)?.subspace,
        Algorithm::Pca => pca_baseline(x, d_s)?,
    })
}

fn score(est: &Subspace64, truth: &Subspace64) -> Result<(f64, f64)> {
    let pair = SubspacePair::new(est, truth)?;
    Ok((subspace_error(&pair), subspace_distance(&pair)?))
}

/// Runs the whole grid. Rows are ordered by `n`, then `γ²`, then trial, then
/// the configured algorithm order, independent of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let truth = Subspace64::canonical(cfg.d_x, cfg.d_s, Frame::Original)?;
    let cells: Vec<(usize, f64, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| {
            cfg.gamma2_grid
                .iter()
                .flat_map(move |&g| (0..cfg.trials).map(move |t| (n, g, t)))
        })
        .collect();
    let rows: Vec<Vec<TrialRecord>> = cells
        .par_iter()
        .map(|&(n, gamma2, trial)| run_cell(cfg, &truth, n, gamma2, trial))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn run_cell(cfg: &ExperimentConfig, truth: &Subspace64, n: usize, gamma2: f64, trial: usize) -> Vec<TrialRecord> {
    let seed = data_seed(cfg.seed, n, gamma2, trial);
    let data = dataset::generate::<f64>(cfg.generator, n, cfg.d_x, gamma2, seed).map_err(|e| e.to_string());
    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let outcome = match &data {
                Err(msg) => Err(format!("data generation failed: {msg}")),
                Ok(x) => estimate(algorithm, x, cfg.d_s, cfg, algorithm_seed(seed, algorithm))
                    .and_then(|s| score(&s, truth))
                    .map_err(|e| e.to_string()),
            };
            let elapsed = start.elapsed().as_secs_f64();
            let (error_e, distance_d, error_msg) = match outcome {
                Ok((e, d)) => (e, d, String::new()),
                Err(msg) => (f64::NAN, f64::NAN, msg),
            };
            TrialRecord {
                algorithm,
                generator: cfg.generator,
                n,
                gamma2,
                trial,
                seed,
                error_e,
                distance_d,
                time_sec: if cfg.record_timing { elapsed } else { 0.0 },
                error_msg,
            }
        })
        .collect()
}

pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_records_to(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_records(records, std::io::BufWriter::new(file))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Config(format!(
            "unexpected results header '{}'",
            header.join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

pub fn read_records_from(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    read_records(file)
}

/// Least-squares line `log(mean score) = intercept + slope · log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals (`k - 2` dof).
    pub slope_stderr: f64,
    /// `(n, mean score)` per sample size, ascending in `n`.
    pub points: Vec<(usize, f64)>,
}

/// Fits the convergence rate of `algorithm` from result rows. Failed rows are
/// skipped; at least three sample sizes with a positive mean are needed.
pub fn fit_rate(records: &[TrialRecord], algorithm: Algorithm, metric: Metric) -> Result<RateFit> {
    let mut by_n: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for r in records.iter().filter(|r| r.algorithm == algorithm) {
        let v = match metric {
            Metric::Error => r.error_e,
            Metric::Distance => r.distance_d,
        };
        if v.is_finite() {
            let e = by_n.entry(r.n).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    let points: Vec<(usize, f64)> = by_n
        .into_iter()
        .map(|(n, (sum, count))| (n, sum / count as f64))
        .filter(|&(_, m)| m > 0.0)
        .collect();
    if points.len() < 3 {
        return Err(HarnessError::Rate(format!(
            "need at least 3 sample sizes with positive mean for {algorithm}, found {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, m)| m.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = (rss / (k - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        slope_stderr,
        points,
    })
}

/// Rows `basisᵀ (x_i - μ̂)` for an original-frame subspace.
pub fn project(x: &DataMatrix64, subspace: &Subspace64) -> Result<DMatrix<f64>> {
    if subspace.frame() != Frame::Original {
        return Err(NgcaError::FrameMismatch(subspace.frame().to_string(), Frame::Original.to_string()).into());
    }
    if subspace.ambient_dim() != x.ncols() {
        return Err(NgcaError::ShapeMismatch {
            expected: format!("{} columns", subspace.ambient_dim()),
            actual: format!("{} columns", x.ncols()),
        }
        .into());
    }
    let m = x.as_matrix();
    let mean = m.row_mean();
    let mut centered = m.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    Ok(centered * subspace.basis())
}

/// Writes [`project`] output as CSV with header `p1,...,pk`.
pub fn export_projection(x: &DataMatrix64, subspace: &Subspace64, path: impl AsRef<Path>) -> Result<()> {
    let z = project(x, subspace)?;
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record((1..=z.ncols()).map(|k| format!("p{k}")))?;
    for row in z.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
