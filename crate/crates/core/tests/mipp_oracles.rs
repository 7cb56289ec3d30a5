mod common;

use common::{gaussian, rng, score};
use nalgebra::{DMatrix, DVector};
use ngca::dataset::{self, center_whiten};
use ngca::mipp::{self, IndexFunction, MippConfig, Profile};
use ngca::{DataMatrix, GeneratorKind};
use rand::Rng;

fn summands(y: &DMatrix<f64>, h: &IndexFunction<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(y.nrows(), y.ncols());
    for i in 0..y.nrows() {
        let yi = y.row(i).transpose();
        let row = &yi * h.value(&yi) - h.gradient(&yi);
        out.set_row(i, &row.transpose());
    }
    out
}

#[test]
fn stein_identity_holds_within_clt_error_on_gaussian_data() {
    let n = 20_000;
    let y = gaussian(&mut rng(1), n, 6);
    let mut r = rng(2);
    for profile in MippConfig::default_profiles() {
        let h = IndexFunction::new(common::gaussian_vec(&mut r, 6), profile).unwrap();
        let beta = mipp::beta_hat(&y, &h).unwrap().raw;
        let s = summands(&y, &h);
        for k in 0..6 {
            let col = s.column(k);
            let mean = col.mean();
            let sd = (col.map(|v| (v - mean) * (v - mean)).sum() / (n as f64 - 1.0)).sqrt();
            let se = sd / (n as f64).sqrt();
            assert!(beta[k].abs() <= 5.0 * se, "{profile:?} component {k}: {} vs se {se}", beta[k]);
        }
    }
}

#[test]
fn linear_profile_vanishes_on_whitened_data() {
    let x = DataMatrix::new(gaussian(&mut rng(3), 500, 5)).unwrap();
    let w = center_whiten(&x).unwrap();
    let h = IndexFunction::new(common::gaussian_vec(&mut rng(4), 5), Profile::Linear).unwrap();
    let beta = mipp::beta_hat(w.whitened(), &h).unwrap();
    assert!(beta.raw.amax() < 1e-12, "{}", beta.raw.amax());
}

#[test]
fn normalisation_uses_raw_sum_denominator() {
    let y = gaussian(&mut rng(5), 80, 4);
    let h = IndexFunction::new(DVector::from_vec(vec![1.0, -2.0, 0.5, 0.0]), Profile::Tanh(1.5)).unwrap();
    let b = mipp::beta_vector(&y, &h).unwrap();
    let s = summands(&y, &h);
    let oracle_raw = DVector::from_iterator(4, s.column_iter().map(|c| c.sum() / 80.0));
    assert!((&b.raw - &oracle_raw).amax() < 1e-14);
    let radicand = s.norm_squared() - oracle_raw.norm_squared();
    let oracle = &oracle_raw / radicand.sqrt();
    let normalized = b.normalized.clone().unwrap();
    assert!((&normalized - &oracle).amax() < 1e-14);
    assert!((b.informative_norm - oracle.norm()).abs() < 1e-14);
    let cos = normalized.dot(&b.raw) / (normalized.norm() * b.raw.norm());
    assert!((cos - 1.0).abs() < 1e-14);
}

#[test]
fn single_sample_is_dropped() {
    let y = DMatrix::from_row_slice(1, 3, &[0.4, -1.2, 2.0]);
    let h = IndexFunction::new(DVector::from_vec(vec![0.0, 1.0, 0.0]), Profile::Pow3).unwrap();
    let b = mipp::beta_vector(&y, &h).unwrap();
    assert!(b.dropped());
    assert_eq!(b.informative_norm, 0.0);
}

#[test]
fn zero_direction_is_rejected() {
    assert!(IndexFunction::new(DVector::<f64>::zeros(3), Profile::Pow3).is_err());
}

fn laplace_data(seed: u64, n: usize, d: usize) -> DMatrix<f64> {
    let mut r = rng(seed);
    let mut y = gaussian(&mut r, n, d);
    let scale = 1.0 / 2.0f64.sqrt();
    for i in 0..n {
        let u: f64 = r.random_range(-0.5..0.5);
        y[(i, 0)] = -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln();
    }
    y
}

#[test]
fn fastica_finds_the_laplace_direction() {
    let x = DataMatrix::new(laplace_data(6, 5000, 6)).unwrap();
    let w = center_whiten(&x).unwrap();
    let y = w.whitened();
    let dirs = mipp::candidate_directions(y, 10, 30, 7).unwrap();
    let best = dirs
        .iter()
        .max_by(|a, b| mipp::negentropy_proxy(y, a).total_cmp(&mipp::negentropy_proxy(y, b)))
        .unwrap();
    assert!(best[0].abs() > 0.95, "{best}");
    assert!(dirs.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
}

#[test]
fn beta_lies_in_the_index_space() {
    let x = dataset::generate::<f64>(GeneratorKind::GaussianMixture, 20_000, 8, 0.0, 8).unwrap();
    let w = center_whiten(&x).unwrap();
    let mut dir = DVector::zeros(8);
    dir[0] = 1.0;
    dir[1] = 1.0;
    for profile in [Profile::Pow3, Profile::Tanh(1.0), Profile::FourierCos(1.0)] {
        let h = IndexFunction::new(dir.clone(), profile).unwrap();
        let beta = mipp::beta_hat(w.whitened(), &h).unwrap().raw;
        let s = summands(w.whitened(), &h);
        let n = s.nrows() as f64;
        let var: f64 = (2..8)
            .map(|k| {
                let c = s.column(k);
                let m = c.mean();
                c.map(|v| (v - m) * (v - m)).sum() / (n - 1.0) / n
            })
            .sum();
        let off = beta.rows(2, 6).norm();
        assert!(off < 5.0 * var.sqrt(), "{profile:?}: {off} vs se {}", var.sqrt());
        if profile == Profile::Pow3 {
            assert!(beta.rows(0, 2).norm() > 10.0 * var.sqrt());
        }
    }
}

#[test]
fn mixture_recovery_flags_and_determinism() {
    let x = dataset::generate::<f64>(GeneratorKind::GaussianMixture, 2000, 10, 0.0, 9).unwrap();
    let cfg = MippConfig::default();
    let a = mipp::run_mipp_detailed(&x, 2, &cfg, 3).unwrap();
    let b = mipp::run_mipp_detailed(&x, 2, &cfg, 3).unwrap();
    assert_eq!(a.subspace.basis(), b.subspace.basis());
    assert_eq!(a.betas.len() + a.dropped, cfg.family_size());
    let (e, _) = score(&a.subspace);
    assert!(e < 0.3, "E = {e}");
    assert!(!a.subspace.degenerate_gap());

    let g = DataMatrix::new(gaussian(&mut rng(10), 2000, 10)).unwrap();
    assert!(mipp::run_mipp(&g, 2, &cfg, 3).unwrap().degenerate_gap());
}

#[test]
fn too_small_family_is_an_error() {
    let x = DataMatrix::new(gaussian(&mut rng(11), 100, 4)).unwrap();
    let cfg = MippConfig {
        profiles: vec![Profile::Pow3],
        directions: 1,
        ..MippConfig::default()
    };
    assert!(matches!(
        mipp::run_mipp(&x, 2, &cfg, 0),
        Err(ngca::NgcaError::InsufficientFunctions { .. })
    ));
}
