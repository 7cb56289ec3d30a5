//! Acceptance criteria 1-10. Each test prints one `ACCEPTANCE <k> PASS|FAIL`
//! line (visible with `--nocapture`, and in the failure output otherwise)
//! before asserting.

use nalgebra::{DMatrix, DVector};
use ngca::dataset::center_whiten;
use ngca::imak;
use ngca::lsldg::{self, BasisSet};
use ngca::lsngca;
use ngca::metrics::{subspace_distance, subspace_error, SubspacePair};
use ngca::mipp::{self, IndexFunction, MippConfig};
use ngca::{DataMatrix64, Frame, GeneratorKind, Subspace64};
use ngca_harness::{fit_rate, run_experiment, write_records, Algorithm, ExperimentConfig, Metric, TrialRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn report(k: u32, pass: bool, what: &str) {
    println!("ACCEPTANCE {k} {}: {what}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {k} failed: {what}");
}

fn gaussian(seed: u64, n: usize, d: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

#[test]
fn a1_basis_derivatives_match_finite_differences() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let centers = gaussian(2, 20, 3);
    let basis = BasisSet::new(centers, vec![0.6, 1.0, 1.7]).unwrap();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
        for j in 0..3 {
            let (_, partials) = lsldg::eval_basis(&basis, x.as_view(), j).unwrap();
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            let (vp, _) = lsldg::eval_basis(&basis, xp.as_view(), j).unwrap();
            let (vm, _) = lsldg::eval_basis(&basis, xm.as_view(), j).unwrap();
            for i in 0..basis.len() {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                worst = worst.max((partials[i] - fd).abs() / fd.abs().max(1.0));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst < 1e-6 && secs < 1.0,
        &format!("max relative error {worst:.2e} (< 1e-6) in {secs:.3}s"),
    );
}

/// Gradient RMSE against `-y` on held-out N(0, I₂) points with `‖y‖ <= 2`.
fn held_out(seed: u64) -> DMatrix<f64> {
    let test = gaussian(seed, 4000, 2);
    let rows: Vec<usize> = (0..4000).filter(|&i| test.row(i).norm() <= 2.0).collect();
    test.select_rows(rows.iter())
}

fn rmse(model: &lsldg::GradientModel<f64>, test: &DMatrix<f64>) -> f64 {
    let g = model.predict(test).unwrap();
    ((g + test).norm_squared() / test.nrows() as f64).sqrt()
}

const LSLDG_RMSE_THRESHOLD: f64 = 0.3;

#[test]
fn a2_lsldg_recovers_the_gaussian_score() {
    let start = std::time::Instant::now();
    let test = held_out(99);
    let mut errors = Vec::new();
    let mut worst_at_2000 = 0.0f64;
    for n in [500usize, 2000, 8000] {
        let y = gaussian(n as u64, n, 2);
        let model = lsldg::fit(&y, 7).unwrap();
        errors.push(rmse(&model, &test));
        if n == 2000 {
            let cfg = lsldg::LsldgConfig::default();
            for &s in &cfg.sigma_grid {
                for &l in &cfg.lambda_grid {
                    let m = lsldg::fit_fixed(&y, model.centers().clone(), vec![s, s], vec![l, l]).unwrap();
                    worst_at_2000 = worst_at_2000.max(rmse(&m, &test));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let at_2000 = errors[1];
    let pass = at_2000.is_finite()
        && at_2000 < worst_at_2000
        && at_2000 < LSLDG_RMSE_THRESHOLD
        && errors.windows(2).all(|w| w[1] <= w[0])
        && secs < 120.0;
    report(
        2,
        pass,
        &format!(
            "RMSE at n=500/2000/8000 = {:.4}/{:.4}/{:.4}, worst grid pair at 2000 = {worst_at_2000:.3}, threshold {LSLDG_RMSE_THRESHOLD}, {secs:.1}s",
            errors[0], errors[1], errors[2]
        ),
    );
}

#[test]
fn a3_stein_identity_zeroes_beta_on_gaussian_data() {
    let start = std::time::Instant::now();
    let n = 100_000;
    let y = gaussian(3, n, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_z = 0.0f64;
    for profile in MippConfig::default_profiles() {
        let w = DVector::from_fn(10, |_, _| rng.sample::<f64, _>(StandardNormal));
        let h = IndexFunction::new(w, profile).unwrap();
        let beta = mipp::beta_hat(&y, &h).unwrap().raw;
        let mut sum_sq = DVector::<f64>::zeros(10);
        for i in 0..n {
            let yi = y.row(i).transpose();
            let s = &yi * h.value(&yi) - h.gradient(&yi) - &beta;
            sum_sq += s.component_mul(&s);
        }
        for k in 0..10 {
            let se = (sum_sq[k] / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
            worst_z = worst_z.max(beta[k].abs() / se);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        worst_z < 5.0 && secs < 60.0,
        &format!("largest |β̂_k| / standard error over 16 profiles = {worst_z:.2} (< 5), {secs:.1}s"),
    );
}

#[test]
fn a4_rayleigh_quotient_matches_direct_criterion() {
    let y = gaussian(5, 50, 3);
    let metric = DMatrix::from_row_slice(3, 3, &[1.2, 0.2, 0.0, 0.2, 0.9, 0.1, 0.0, 0.1, 0.9]);
    let sigma2 = 1.5;
    let state = imak::build_kernel(&y, &metric, sigma2).unwrap();
    let (f, g) = imak::build_fg(&y, &state).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let alpha = DVector::from_fn(50, |_, _| rng.sample::<f64, _>(StandardNormal));
        let quotient = alpha.dot(&(&f * &alpha)) / alpha.dot(&(&g * &alpha));
        let mut beta = DVector::<f64>::zeros(3);
        let mut second = 0.0;
        for i in 0..50 {
            let yi = y.row(i).transpose();
            let (h, grad) = imak::kernel_function(&y, &alpha, &metric, sigma2, &yi);
            let t = &yi * h - grad;
            second += t.norm_squared() / 50.0;
            beta += t / 50.0;
        }
        let direct = beta.norm_squared() / (second - beta.norm_squared());
        worst = worst.max((quotient - direct).abs() / direct.abs().max(1.0));
    }
    report(4, worst < 1e-8, &format!("max |αᵀFα/αᵀGα - direct| = {worst:.2e} (< 1e-8)"));
}

fn random_subspace(rng: &mut ChaCha8Rng, d_x: usize, d_s: usize) -> Subspace64 {
    let m = DMatrix::from_fn(d_x, d_s, |_, _| rng.sample::<f64, _>(StandardNormal));
    Subspace64::from_spanning(&m, Frame::Original).unwrap()
}

fn rotation_brute_force(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let cost = |t: f64, reflect: bool| {
        let (c, s) = (t.cos(), t.sin());
        let q = if reflect {
            DMatrix::from_row_slice(2, 2, &[c, s, s, -c])
        } else {
            DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
        };
        (a * q - b).norm()
    };
    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let steps = 7200;
        let h = std::f64::consts::TAU / steps as f64;
        let k = (0..steps)
            .min_by(|&i, &j| cost(i as f64 * h, reflect).total_cmp(&cost(j as f64 * h, reflect)))
            .unwrap();
        let (mut lo, mut hi) = ((k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if cost(m1, reflect) < cost(m2, reflect) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(cost(0.5 * (lo + hi), reflect));
    }
    best
}

#[test]
fn a5_procrustes_distance_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_brute = 0.0f64;
    let mut worst_relation = 0.0f64;
    for _ in 0..20 {
        let a = random_subspace(&mut rng, 8, 1);
        let b = random_subspace(&mut rng, 8, 1);
        let pair = SubspacePair::new(&a, &b).unwrap();
        let d = subspace_distance(&pair).unwrap();
        let e = subspace_error(&pair);
        let brute = (a.basis() - b.basis()).norm().min((a.basis() + b.basis()).norm());
        worst_brute = worst_brute.max((d - brute).abs());
        let half = 1.0 - d * d / 2.0;
        worst_relation = worst_relation.max((e - (1.0 - half * half)).abs());
    }
    for _ in 0..20 {
        let a = random_subspace(&mut rng, 8, 2);
        let b = random_subspace(&mut rng, 8, 2);
        let d = subspace_distance(&SubspacePair::new(&a, &b).unwrap()).unwrap();
        worst_brute = worst_brute.max((d - rotation_brute_force(a.basis(), b.basis())).abs());
    }
    report(
        5,
        worst_brute < 1e-6 && worst_relation < 1e-10,
        &format!("closed form vs brute force {worst_brute:.2e} (< 1e-6), E/D relation {worst_relation:.2e} (< 1e-10)"),
    );
}

fn mean_of(records: &[TrialRecord], n: usize, gamma2: f64, pick: fn(&TrialRecord) -> f64) -> f64 {
    let v: Vec<f64> = records
        .iter()
        .filter(|r| r.n == n && r.gamma2 == gamma2)
        .map(pick)
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

const RECOVERY_THRESHOLD: f64 = 0.05;

fn rate_config() -> ExperimentConfig {
    ExperimentConfig {
        algorithms: vec![Algorithm::Lsngca],
        generator: GeneratorKind::GaussianMixture,
        n_grid: vec![500, 1000, 2000, 4000, 8000],
        gamma2_grid: vec![0.0],
        trials: 10,
        seed: 2016,
        ..ExperimentConfig::default()
    }
}

#[test]
fn a6_a7_recovery_and_parametric_rate() {
    let start = std::time::Instant::now();
    let records = run_experiment(&rate_config()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let failures = records.iter().filter(|r| !r.error_msg.is_empty()).count();
    let e500 = mean_of(&records, 500, 0.0, |r| r.error_e);
    let e2000 = mean_of(&records, 2000, 0.0, |r| r.error_e);
    let pass6 = failures == 0 && e2000 < RECOVERY_THRESHOLD && e2000 < e500;
    let fit = fit_rate(&records, Algorithm::Lsngca, Metric::Distance).unwrap();
    let pass7 = (-0.85..=-0.25).contains(&fit.slope) && secs < 1800.0;
    let means: Vec<String> = fit.points.iter().map(|(n, m)| format!("{n}:{m:.4}")).collect();
    println!(
        "ACCEPTANCE 6 {}: mean E at n=2000 = {e2000:.4} (< {RECOVERY_THRESHOLD}), at n=500 = {e500:.4}, {failures} failed runs",
        if pass6 { "PASS" } else { "FAIL" }
    );
    println!(
        "ACCEPTANCE 7 {}: slope of log mean D on log n = {:.3} ± {:.3} (in [-0.85, -0.25]); means {}; {secs:.0}s",
        if pass7 { "PASS" } else { "FAIL" },
        fit.slope,
        fit.slope_stderr,
        means.join(" ")
    );
    assert!(pass6, "criterion 6 failed");
    assert!(pass7, "criterion 7 failed");
}

#[test]
fn a8_noise_degrades_recovery() {
    let cfg = ExperimentConfig {
        algorithms: vec![Algorithm::Lsngca],
        n_grid: vec![2000],
        gamma2_grid: vec![0.0, 1.0],
        trials: 10,
        seed: 8,
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&cfg).unwrap();
    let clean = mean_of(&records, 2000, 0.0, |r| r.error_e);
    let noisy = mean_of(&records, 2000, 1.0, |r| r.error_e);
    report(
        8,
        clean <= noisy,
        &format!("mean E at γ²=0 is {clean:.4}, at γ²=1 is {noisy:.4}"),
    );
}

#[test]
fn a9_identical_configs_give_identical_csv() {
    let mut cfg = ExperimentConfig {
        algorithms: vec![Algorithm::Lsngca, Algorithm::Mipp, Algorithm::Imak, Algorithm::Pca],
        generator: GeneratorKind::MixedSuperSub,
        n_grid: vec![150, 250],
        gamma2_grid: vec![0.0, 0.5],
        d_x: 5,
        trials: 2,
        seed: 9,
        ..ExperimentConfig::default()
    };
    cfg.mipp.directions = 5;
    cfg.imak.outer_iters = 1;
    cfg.imak.sigma2_grid = vec![1.0, 2.0];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let loaded = ExperimentConfig::load(&path).unwrap();
        let mut buf = Vec::new();
        write_records(&run_experiment(&loaded).unwrap(), &mut buf).unwrap();
        outputs.push(buf);
    }
    let rows = outputs[0].iter().filter(|&&b| b == b'\n').count() - 1;
    report(
        9,
        outputs[0] == outputs[1] && rows == 32,
        &format!("two runs of the same config, {rows} rows, {} bytes each, byte-identical = {}", outputs[0].len(), outputs[0] == outputs[1]),
    );
}

#[test]
fn a10_gamma_vanishes_for_exact_gaussian_scores() {
    let n = 10_000;
    let x = gaussian(10, n, 10);
    let w = center_whiten(&DataMatrix64::new(x).unwrap()).unwrap();
    // y = W (x - μ̂) with x ~ N(0, I) has score -W⁻² y - W⁻¹ μ̂.
    let w_inv = w.whitener().clone().try_inverse().unwrap();
    let w_inv2 = &w_inv * &w_inv;
    let shift = &w_inv * w.mean();
    let y = w.whitened();
    let mut grads = y * w_inv2.transpose();
    for mut row in grads.row_iter_mut() {
        row += shift.transpose();
    }
    grads.neg_mut();
    let gamma = lsngca::compute_gamma(y, &grads).unwrap();
    let norm = gamma.matrix().norm();
    let bound = 5.0 / (n as f64).sqrt();
    report(10, norm < bound, &format!("‖Γ̂‖_F = {norm:.3e} (< 5/√n = {bound:.3e})"));
}
